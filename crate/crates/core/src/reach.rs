//! Unbounded reachability: one Bernoulli observation per sampled path,
//! combined by an SPRT.
//!
//! A path stops with YES as soon as it enters the goal set and with NO once
//! its candidate is confirmed as a BSCC, so the observable under-reports the
//! reachability probability by at most `delta`.

use crate::chain::{MarkovChain, StateId};
use crate::error::SmcError;
use crate::monitor::{required_occurrences, CandidateTracker};
use crate::report::{Parameters, Property, VerificationReport};
use crate::runner::{run_until, LengthStats, RunConfig};
use crate::stats::HypothesisSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Goal,
    BsccDetected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReachSample {
    pub terminated_by: Termination,
    pub path_length: u64,
}

impl ReachSample {
    pub fn outcome(&self) -> bool {
        self.terminated_by == Termination::Goal
    }
}

/// Membership mask for the states carrying `label`.
pub fn goal_mask(chain: &MarkovChain, label: &str) -> Result<Vec<bool>, SmcError> {
    let states = chain
        .states_with_label(label)
        .ok_or_else(|| SmcError::GoalUnknownLabel(label.to_string()))?;
    Ok(mask_of(chain.n_states(), &states))
}

pub fn mask_of(n: usize, states: &[StateId]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &s in states {
        mask[s] = true;
    }
    mask
}

/// Per-path reachability sampler.
#[derive(Debug, Clone)]
pub struct ReachSampler<'a> {
    pub chain: &'a MarkovChain,
    pub goal: &'a [bool],
    pub pmin: f64,
    pub delta: f64,
    pub max_steps: u64,
}

impl<'a> ReachSampler<'a> {
    pub fn new(chain: &'a MarkovChain, goal: &'a [bool], pmin: f64, delta: f64) -> Self {
        ReachSampler {
            chain,
            goal,
            pmin,
            delta,
            max_steps: crate::runner::DEFAULT_MAX_STEPS,
        }
    }

    pub fn tracker(&self, check_bound: u64) -> CandidateTracker {
        CandidateTracker::new(Some(self.chain.n_states()), check_bound)
    }

    pub fn sample(
        &self,
        tracker: &mut CandidateTracker,
        master_seed: u64,
        path_index: u64,
    ) -> Result<ReachSample, SmcError> {
        tracker.clear();
        let mut path = self.chain.sampler(master_seed, path_index);
        let mut cached = (0u32, 0u64);
        loop {
            let s = path.next_state();
            if self.goal[s] {
                return Ok(ReachSample {
                    terminated_by: Termination::Goal,
                    path_length: path.length(),
                });
            }
            tracker.advance(s as u64);
            if tracker.has_candidate() {
                let i = tracker.candidate_index();
                if i != cached.0 {
                    cached = (i, required_occurrences(i, self.delta, self.pmin));
                }
                if tracker.strong_k_holds(cached.1) {
                    return Ok(ReachSample {
                        terminated_by: Termination::BsccDetected,
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

/// One observation of the reachability indicator on path `(master_seed, path_index)`.
pub fn single_path_reach(
    chain: &MarkovChain,
    goal: &[bool],
    pmin: f64,
    delta: f64,
    check_bound: u64,
    master_seed: u64,
    path_index: u64,
) -> Result<ReachSample, SmcError> {
    let sampler = ReachSampler::new(chain, goal, pmin, delta);
    sampler.sample(&mut sampler.tracker(check_bound), master_seed, path_index)
}

pub(crate) fn check_pmin(chain: &MarkovChain, pmin: f64) -> Result<(), SmcError> {
    if !(pmin > 0.0 && pmin <= 1.0) {
        return Err(SmcError::InvalidParameter(format!("pmin = {pmin} outside (0, 1]")));
    }
    if pmin > chain.declared_pmin() {
        return Err(SmcError::InvalidParameter(format!(
            "pmin = {pmin} exceeds the chain's declared bound {}",
            chain.declared_pmin()
        )));
    }
    Ok(())
}

/// Decides `P[reach goal] >= p + ε` (H0) against `<= p - ε` (H1).
pub fn verify_reach(
    chain: &MarkovChain,
    goal: &[bool],
    spec: &HypothesisSpec,
    pmin: f64,
    cfg: &RunConfig,
) -> Result<VerificationReport, SmcError> {
    spec.validate()?;
    check_pmin(chain, pmin)?;
    let mut sampler = ReachSampler::new(chain, goal, pmin, spec.delta);
    sampler.max_steps = cfg.max_steps;
    let mut sprt = spec.reach_session();
    let mut lengths = LengthStats::default();
    run_until(
        cfg.threads,
        || sampler.tracker(cfg.check_bound),
        |tracker, i| sampler.sample(tracker, cfg.master_seed, i),
        |_, x| {
            lengths.push(x.path_length);
            sprt.feed(x.outcome()).is_some()
        },
    )?;
    let params = Parameters {
        p: Some(spec.p),
        epsilon: Some(spec.epsilon),
        alpha: spec.alpha,
        beta: Some(spec.beta),
        delta: Some(spec.delta),
        pmin: Some(pmin),
        hypotheses: Some(spec.reach_hypotheses()),
        sim_bound: Some(spec.sim_bound()),
        check_bound: Some(cfg.check_bound),
        max_steps: Some(cfg.max_steps),
        ..Parameters::default()
    };
    let mut report = VerificationReport::new(Property::Reach, &lengths, cfg.master_seed, params);
    report.decision = sprt.decision();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainParts;
    use crate::generators;

    fn absorbing() -> MarkovChain {
        MarkovChain::new(ChainParts {
            n_states: 2,
            transitions: vec![(0, 0, 1.0), (1, 1, 1.0)],
            label_names: vec!["goal".into()],
            labels: vec![(1, 0)],
            ..ChainParts::default()
        })
        .unwrap()
    }

    #[test]
    fn initial_goal_is_immediate() {
        let c = generators::fig3(3);
        let goal = mask_of(c.n_states(), &[0]);
        let x = single_path_reach(&c, &goal, 0.5, 0.01, 1, 9, 0).unwrap();
        assert_eq!(x, ReachSample { terminated_by: Termination::Goal, path_length: 1 });
    }

    #[test]
    fn absorbing_non_goal_length() {
        let c = absorbing();
        let goal = goal_mask(&c, "goal").unwrap();
        for (delta, pmin) in [(0.5, 0.5), (0.01, 0.3), (0.001, 0.01)] {
            let x = single_path_reach(&c, &goal, pmin, delta, 1, 1, 0).unwrap();
            assert!(!x.outcome());
            assert_eq!(x.path_length, required_occurrences(1, delta, pmin) + 2);
        }
    }

    #[test]
    fn unknown_goal_label() {
        let c = absorbing();
        assert_eq!(goal_mask(&c, "nope"), Err(SmcError::GoalUnknownLabel("nope".into())));
    }

    #[test]
    fn yes_paths_contain_a_goal_state() {
        let c = generators::random(8, 3, 4);
        let goal = goal_mask(&c, "goal").unwrap();
        let sampler = ReachSampler::new(&c, &goal, c.actual_pmin(), 0.05);
        let mut tr = sampler.tracker(1);
        for i in 0..200 {
            let x = sampler.sample(&mut tr, 3, i).unwrap();
            let mut replay = c.sampler(3, i);
            let states: Vec<usize> = (0..x.path_length).map(|_| replay.next_state()).collect();
            let hit = states.iter().position(|&s| goal[s]);
            if x.outcome() {
                assert_eq!(hit, Some(states.len() - 1));
            } else {
                assert_eq!(hit, None);
            }
        }
    }

    #[test]
    fn step_cap_diverges() {
        let c = generators::fig3(30);
        let goal = goal_mask(&c, "goal").unwrap();
        let mut s = ReachSampler::new(&c, &goal, 0.5, 0.01);
        s.max_steps = 50;
        let r = s.sample(&mut s.tracker(1), 0, 4);
        assert_eq!(r, Err(SmcError::Diverged { path_index: 4, max_steps: 50 }));
    }

    #[test]
    fn rejects_overstated_pmin() {
        let c = generators::fig1(2);
        let goal = goal_mask(&c, "goal").unwrap();
        let spec = HypothesisSpec::with_default_delta(0.4, 0.05, 0.05, 0.05).unwrap();
        let r = verify_reach(&c, &goal, &spec, 0.02, &RunConfig::default());
        assert!(matches!(r, Err(SmcError::InvalidParameter(_))));
    }

    #[test]
    fn verification_is_deterministic_across_threads() {
        let c = generators::fig1(3);
        let goal = goal_mask(&c, "goal").unwrap();
        let spec = HypothesisSpec::with_default_delta(0.4, 0.05, 0.05, 0.05).unwrap();
        let one = verify_reach(&c, &goal, &spec, 0.01, &RunConfig::with_seed(17)).unwrap();
        let three = verify_reach(
            &c,
            &goal,
            &spec,
            0.01,
            &RunConfig {
                threads: 3,
                ..RunConfig::with_seed(17)
            },
        )
        .unwrap();
        assert_eq!(one, three);
        assert_eq!(one.decision, Some(crate::stats::Decision::AcceptH0));
    }
}
