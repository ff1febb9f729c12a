use thiserror::Error;

/// A structural invariant of a chain or automaton does not hold.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("model has no states")]
    Empty,
    #[error("state {state} out of range (model has {n_states} states)")]
    StateOutOfRange { state: usize, n_states: usize },
    #[error("transition {src} -> {dst} has probability {prob} outside (0, 1]")]
    BadProbability { src: usize, dst: usize, prob: f64 },
    #[error("duplicate transition {src} -> {dst}")]
    DuplicateTransition { src: usize, dst: usize },
    #[error("outgoing probabilities of state {state} sum to {sum}")]
    RowSum { state: usize, sum: f64 },
    #[error("initial probability {prob} of state {state} is not positive")]
    BadInitial { state: usize, prob: f64 },
    #[error("state {state} listed twice in the initial distribution")]
    DuplicateInitial { state: usize },
    #[error("initial distribution sums to {sum}")]
    InitialSum { sum: f64 },
    #[error("unknown label id {id}")]
    UnknownLabelId { id: usize },
    #[error("reward {reward} of state {state} outside [0, 1]")]
    RewardRange { state: usize, reward: f64 },
    #[error("expected {expected} rewards, got {got}")]
    RewardLength { expected: usize, got: usize },
    #[error("declared pmin {declared} exceeds the smallest transition probability {actual}")]
    PminTooLarge { declared: f64, actual: f64 },
    #[error("line {line}: automaton state {state} has no transition for letter {letter:#b}")]
    Incomplete { line: usize, state: usize, letter: u32 },
    #[error("line {line}: automaton state {state} has overlapping transitions on letter {letter:#b}")]
    Nondeterministic { line: usize, state: usize, letter: u32 },
    #[error("automaton has no acceptance pairs")]
    NoAcceptancePairs,
}

/// Malformed input text; `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

impl ParseError {
    pub fn new(line: usize, reason: impl Into<String>) -> Self {
        ParseError {
            line,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("invalid model: {0}")]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("singular linear system")]
pub struct SingularSystem;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmcError {
    #[error("path {path_index} exceeded the step cap of {max_steps} without a decision")]
    Diverged { path_index: u64, max_steps: u64 },
    #[error("label {0:?} is not declared by the chain")]
    GoalUnknownLabel(String),
    #[error("automaton proposition {0:?} does not match any chain label")]
    UnmatchedAp(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("path has no candidate")]
    NoCandidate,
    #[error("candidate state {0} has no observed outgoing transition")]
    UnobservedState(u64),
    #[error(transparent)]
    Singular(#[from] SingularSystem),
    #[error(transparent)]
    Model(#[from] ModelError),
}
