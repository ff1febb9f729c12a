//! Statistical model checking of Markov chains without structural knowledge.
//!
//! Paths are simulated until the property is decided or the path's candidate
//! is confirmed as a bottom strongly connected component with high
//! probability. Only a lower bound on the transition probabilities is needed.

pub mod automaton;
pub mod chain;
pub mod error;
pub mod exact;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod ltl;
pub mod monitor;
pub mod mp;
pub mod reach;
pub mod report;
pub mod runner;
pub mod scc;
pub mod stats;

pub use automaton::{LabelExpr, RabinAutomaton, RabinPair};
pub use chain::{ChainParts, MarkovChain, PathSampler, StateId};
pub use error::{ModelError, ParseError, SmcError, ValidationError};
pub use ltl::verify_ltl;
pub use monitor::CandidateTracker;
pub use mp::{estimate_mp, SampleCount};
pub use reach::verify_reach;
pub use report::{MpInterval, Property, VerificationReport};
pub use runner::RunConfig;
pub use stats::{Decision, HypothesisSpec, SprtSession};
