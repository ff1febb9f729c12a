//! ω-regular properties: the chain is sampled in lockstep with a
//! deterministic Rabin automaton and each path ends once the product
//! candidate is confirmed; the path satisfies the property iff that
//! candidate is accepting.

use crate::automaton::RabinAutomaton;
use crate::chain::{MarkovChain, PathSampler, StateId};
use crate::error::SmcError;
use crate::monitor::{required_occurrences, CandidateTracker};
use crate::reach::check_pmin;
use crate::report::{Parameters, Property, VerificationReport};
use crate::runner::{run_until, LengthStats, RunConfig};
use crate::stats::HypothesisSpec;

/// Letter of every chain state as a bitmask over the automaton's APs,
/// matched to chain labels by name.
pub fn letters_of(chain: &MarkovChain, dra: &RabinAutomaton) -> Result<Vec<u32>, SmcError> {
    let mut letters = vec![0u32; chain.n_states()];
    for (bit, name) in dra.ap_names().iter().enumerate() {
        let states = chain
            .states_with_label(name)
            .ok_or_else(|| SmcError::UnmatchedAp(name.clone()))?;
        for s in states {
            letters[s] |= 1 << bit;
        }
    }
    Ok(letters)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProductState {
    pub s: StateId,
    pub q: usize,
}

/// The lazily explored product of a chain and an automaton.
#[derive(Debug, Clone)]
pub struct Product<'a> {
    pub chain: &'a MarkovChain,
    pub dra: &'a RabinAutomaton,
    letters: Vec<u32>,
}

impl<'a> Product<'a> {
    pub fn new(chain: &'a MarkovChain, dra: &'a RabinAutomaton) -> Result<Self, SmcError> {
        Ok(Product {
            chain,
            dra,
            letters: letters_of(chain, dra)?,
        })
    }

    pub fn letter(&self, s: StateId) -> u32 {
        self.letters[s]
    }

    pub fn key_space(&self) -> usize {
        self.chain.n_states() * self.dra.n_states()
    }

    pub fn key(&self, ps: ProductState) -> u64 {
        (ps.s * self.dra.n_states() + ps.q) as u64
    }

    pub fn unkey(&self, key: u64) -> ProductState {
        let nq = self.dra.n_states();
        ProductState {
            s: key as usize / nq,
            q: key as usize % nq,
        }
    }

    /// Automaton successor on entering chain state `s`; from `None` this is
    /// the initial product state `(s, γ(q₀, L(s)))`.
    pub fn lift(&self, prev: Option<ProductState>, s: StateId) -> ProductState {
        let q = prev.map_or(self.dra.start(), |p| p.q);
        ProductState {
            s,
            q: self.dra.step(q, self.letters[s]),
        }
    }

    /// Draws the next chain state and moves the automaton on its label.
    pub fn step(&self, path: &mut PathSampler<'_>, prev: Option<ProductState>) -> ProductState {
        let s = path.next_state();
        self.lift(prev, s)
    }

    /// Some Rabin pair avoids `E` and meets `F` on the automaton
    /// components of `states`.
    pub fn is_accepting_set(&self, states: &[ProductState]) -> bool {
        self.dra.accepts_inf_set(states.iter().map(|p| p.q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LtlSample {
    pub accepted: bool,
    pub path_length: u64,
}

#[derive(Debug, Clone)]
pub struct LtlSampler<'a> {
    pub product: Product<'a>,
    pub pmin: f64,
    pub delta: f64,
    pub max_steps: u64,
}

impl<'a> LtlSampler<'a> {
    pub fn new(product: Product<'a>, pmin: f64, delta: f64) -> Self {
        LtlSampler {
            product,
            pmin,
            delta,
            max_steps: crate::runner::DEFAULT_MAX_STEPS,
        }
    }

    pub fn tracker(&self, check_bound: u64) -> CandidateTracker {
        CandidateTracker::new(Some(self.product.key_space()), check_bound)
    }

    pub fn sample(
        &self,
        tracker: &mut CandidateTracker,
        master_seed: u64,
        path_index: u64,
    ) -> Result<LtlSample, SmcError> {
        tracker.clear();
        let mut path = self.product.chain.sampler(master_seed, path_index);
        let mut ps = None;
        let mut cached = (0u32, 0u64);
        loop {
            let next = self.product.step(&mut path, ps);
            ps = Some(next);
            tracker.advance(self.product.key(next));
            if tracker.has_candidate() {
                let i = tracker.candidate_index();
                if i != cached.0 {
                    cached = (i, required_occurrences(i, self.delta, self.pmin));
                }
                if tracker.strong_k_holds(cached.1) {
                    let members: Vec<ProductState> = tracker
                        .candidate()
                        .unwrap_or_default()
                        .into_iter()
                        .map(|k| self.product.unkey(k))
                        .collect();
                    return Ok(LtlSample {
                        accepted: self.product.is_accepting_set(&members),
                        path_length: path.length(),
                    });
                }
            }
            if path.length() >= self.max_steps {
                return Err(SmcError::Diverged {
                    path_index,
                    max_steps: self.max_steps,
                });
            }
        }
    }
}

/// One observation of the acceptance indicator on path `(master_seed, path_index)`.
pub fn single_path_ltl(
    chain: &MarkovChain,
    dra: &RabinAutomaton,
    pmin: f64,
    delta: f64,
    check_bound: u64,
    master_seed: u64,
    path_index: u64,
) -> Result<LtlSample, SmcError> {
    let sampler = LtlSampler::new(Product::new(chain, dra)?, pmin, delta);
    sampler.sample(&mut sampler.tracker(check_bound), master_seed, path_index)
}

/// Decides `P[φ] >= p + ε` (H0) against `<= p - ε` (H1), with both
/// hypotheses narrowed by `delta` since the per-path bias is two-sided.
pub fn verify_ltl(
    chain: &MarkovChain,
    dra: &RabinAutomaton,
    spec: &HypothesisSpec,
    pmin: f64,
    cfg: &RunConfig,
) -> Result<VerificationReport, SmcError> {
    spec.validate()?;
    check_pmin(chain, pmin)?;
    let mut sampler = LtlSampler::new(Product::new(chain, dra)?, pmin, spec.delta);
    sampler.max_steps = cfg.max_steps;
    let mut sprt = spec.ltl_session();
    let mut lengths = LengthStats::default();
    run_until(
        cfg.threads,
        || sampler.tracker(cfg.check_bound),
        |tracker, i| sampler.sample(tracker, cfg.master_seed, i),
        |_, x| {
            lengths.push(x.path_length);
            sprt.feed(x.accepted).is_some()
        },
    )?;
    let params = Parameters {
        p: Some(spec.p),
        epsilon: Some(spec.epsilon),
        alpha: spec.alpha,
        beta: Some(spec.beta),
        delta: Some(spec.delta),
        pmin: Some(pmin),
        hypotheses: Some(spec.ltl_hypotheses()),
        sim_bound: Some(spec.sim_bound()),
        check_bound: Some(cfg.check_bound),
        max_steps: Some(cfg.max_steps),
        ..Parameters::default()
    };
    let mut report = VerificationReport::new(Property::Ltl, &lengths, cfg.master_seed, params);
    report.decision = sprt.decision();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::library;
    use crate::generators::{self, GOAL};
    use crate::stats::Decision;

    #[test]
    fn universal_lifts_chain() {
        let c = generators::fig1(2);
        let dra = library::universal(GOAL);
        let prod = Product::new(&c, &dra).unwrap();
        let mut a = c.sampler(5, 0);
        let mut b = c.sampler(5, 0);
        let mut ps = None;
        for _ in 0..50 {
            let next = prod.step(&mut a, ps);
            assert_eq!(next, ProductState { s: b.next_state(), q: 0 });
            ps = Some(next);
        }
    }

    #[test]
    fn eventually_sink_after_goal() {
        // fig1: s = 0, r = 1; the letter of the destination drives q
        let c = generators::fig1(2);
        let dra = library::eventually(GOAL);
        let prod = Product::new(&c, &dra).unwrap();
        let init = prod.lift(None, 0);
        assert_eq!(init, ProductState { s: 0, q: 0 });
        let at_r = prod.lift(Some(init), 1);
        assert_eq!(at_r.q, 1);
        assert_eq!(prod.lift(Some(at_r), 1).q, 1);
        // starting in r already moves q
        assert_eq!(prod.lift(None, 1).q, 1);
    }

    #[test]
    fn accepting_sets() {
        let c = generators::fig1(1);
        let dra = library::eventually(GOAL);
        let prod = Product::new(&c, &dra).unwrap();
        let ps = |s, q| ProductState { s, q };
        assert!(prod.is_accepting_set(&[ps(3, 1), ps(4, 1)]));
        assert!(!prod.is_accepting_set(&[ps(3, 0)]));
        // only q matters
        assert_eq!(prod.is_accepting_set(&[ps(0, 1)]), prod.is_accepting_set(&[ps(4, 1)]));
        let ea = library::eventually_always(GOAL);
        let prod = Product::new(&c, &ea).unwrap();
        assert!(!prod.is_accepting_set(&[ps(0, 0), ps(1, 1)]));
    }

    #[test]
    fn unmatched_ap() {
        let c = generators::fig1(1);
        let dra = library::eventually("nope");
        assert_eq!(Product::new(&c, &dra).err(), Some(SmcError::UnmatchedAp("nope".into())));
    }

    #[test]
    fn trivial_automata() {
        let c = generators::random(6, 3, 2);
        for i in 0..100 {
            let yes = single_path_ltl(&c, &library::universal(GOAL), c.actual_pmin(), 0.1, 1, 0, i).unwrap();
            assert!(yes.accepted);
            let no = single_path_ltl(&c, &library::empty(GOAL), c.actual_pmin(), 0.1, 1, 0, i).unwrap();
            assert!(!no.accepted);
        }
    }

    #[test]
    fn fig1_decisions() {
        let c = generators::fig1(3);
        let dra = library::eventually(GOAL);
        let cfg = RunConfig::with_seed(3);
        let low = HypothesisSpec::new(0.4, 0.01, 0.01, 0.01, 0.001).unwrap();
        let r = verify_ltl(&c, &dra, &low, c.actual_pmin(), &cfg).unwrap();
        assert_eq!(r.decision, Some(Decision::AcceptH0));
        assert_eq!(r, verify_ltl(&c, &dra, &low, c.actual_pmin(), &cfg).unwrap());
        let high = HypothesisSpec::new(0.6, 0.01, 0.01, 0.01, 0.001).unwrap();
        let r = verify_ltl(&c, &dra, &high, c.actual_pmin(), &cfg).unwrap();
        assert_eq!(r.decision, Some(Decision::AcceptH1));
    }
}
