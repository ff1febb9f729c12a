//! Numerical ground truth for white-box chains, plus the termination-based
//! baseline estimator.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::automaton::RabinAutomaton;
use crate::chain::{ChainParts, MarkovChain, StateId};
use crate::error::SmcError;
use crate::linalg::{solve_leaky, stationary_sparse};
use crate::ltl::letters_of;
use crate::reach::{goal_mask, Termination};
use crate::report::{Parameters, Property, VerificationReport};
use crate::runner::{run_fixed, LengthStats, RunConfig};
use crate::scc;

/// Bottom strongly connected components, each sorted, ordered by first member.
pub fn bsccs(chain: &MarkovChain) -> Vec<Vec<StateId>> {
    scc::bottom_components(chain.n_states(), |v, i| chain.row(v).get(i).map(|e| e.0))
}

/// Number of BSCCs and the size of the largest one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BsccInventory {
    pub count: usize,
    pub max_size: usize,
}

impl fmt::Display for BsccInventory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}", self.count, self.max_size)
    }
}

pub fn bscc_inventory(chain: &MarkovChain) -> BsccInventory {
    let b = bsccs(chain);
    BsccInventory {
        count: b.len(),
        max_size: b.iter().map(Vec::len).max().unwrap_or(0),
    }
}

/// Probability of eventually visiting `goal`, per starting state.
pub fn reachability_vector(chain: &MarkovChain, goal: &[bool]) -> Result<Vec<f64>, SmcError> {
    let n = chain.n_states();
    let mut preds = vec![Vec::new(); n];
    for s in 0..n {
        for &(t, _) in chain.row(s) {
            preds[t].push(s);
        }
    }
    let backward = |from: &[bool], through: &dyn Fn(StateId) -> bool| {
        let mut seen = from.to_vec();
        let mut queue: VecDeque<StateId> = (0..n).filter(|&s| from[s]).collect();
        while let Some(t) = queue.pop_front() {
            for &s in &preds[t] {
                if !seen[s] && through(s) {
                    seen[s] = true;
                    queue.push_back(s);
                }
            }
        }
        seen
    };
    // probability 0: cannot reach the goal at all
    let can_reach = backward(goal, &|_| true);
    let never: Vec<bool> = can_reach.iter().map(|&r| !r).collect();
    // probability 1: cannot reach a probability-0 state while avoiding the goal
    let may_fail = backward(&never, &|s| !goal[s]);
    let sure: Vec<bool> = (0..n).map(|s| !may_fail[s]).collect();
    let maybe: Vec<StateId> = (0..n).filter(|&s| !sure[s] && !never[s]).collect();
    let mut local = vec![usize::MAX; n];
    for (i, &s) in maybe.iter().enumerate() {
        local[s] = i;
    }
    let mut q = vec![Vec::new(); maybe.len()];
    let mut b = vec![0.0; maybe.len()];
    for (i, &s) in maybe.iter().enumerate() {
        for &(t, p) in chain.row(s) {
            if sure[t] {
                b[i] += p;
            } else if local[t] != usize::MAX {
                q[i].push((local[t], p));
            }
        }
    }
    let x = solve_leaky(&q, &b)?;
    let mut out: Vec<f64> = sure.iter().map(|&g| if g { 1.0 } else { 0.0 }).collect();
    for (i, &s) in maybe.iter().enumerate() {
        out[s] = x[i].clamp(0.0, 1.0);
    }
    Ok(out)
}

/// Probability of eventually visiting `goal` from the initial distribution.
pub fn exact_reachability(chain: &MarkovChain, goal: &[bool]) -> Result<f64, SmcError> {
    let x = reachability_vector(chain, goal)?;
    Ok(chain.initial().iter().map(|&(s, p)| p * x[s]).sum::<f64>().clamp(0.0, 1.0))
}

/// Long-run average reward: `Σ_C P[reach C] · MP_C` over the BSCCs.
pub fn exact_mp(chain: &MarkovChain) -> Result<f64, SmcError> {
    let n = chain.n_states();
    let mut total = 0.0;
    for c in bsccs(chain) {
        let mut local = HashMap::with_capacity(c.len());
        for (i, &s) in c.iter().enumerate() {
            local.insert(s, i);
        }
        let rows: Vec<Vec<(usize, f64)>> = c
            .iter()
            .map(|&s| chain.row(s).iter().map(|&(t, p)| (local[&t], p)).collect())
            .collect();
        let pi = stationary_sparse(&rows)?;
        let mp: f64 = pi.iter().zip(&c).map(|(w, &s)| w * chain.rewards()[s]).sum();
        let mut mask = vec![false; n];
        for &s in &c {
            mask[s] = true;
        }
        total += exact_reachability(chain, &mask)? * mp;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Explicit product restricted to the states reachable from its initial
/// distribution. Returns the product chain and the automaton component of
/// each product state.
pub fn explicit_product(chain: &MarkovChain, dra: &RabinAutomaton) -> Result<(MarkovChain, Vec<(StateId, usize)>), SmcError> {
    let letters = letters_of(chain, dra)?;
    let mut ids: HashMap<(StateId, usize), usize> = HashMap::new();
    let mut states = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |ps: (StateId, usize), states: &mut Vec<(StateId, usize)>, queue: &mut VecDeque<usize>| {
        *ids.entry(ps).or_insert_with(|| {
            states.push(ps);
            queue.push_back(states.len() - 1);
            states.len() - 1
        })
    };
    let mut initial = Vec::new();
    for &(s, p) in chain.initial() {
        let id = intern((s, dra.step(dra.start(), letters[s])), &mut states, &mut queue);
        initial.push((id, p));
    }
    let mut transitions = Vec::new();
    while let Some(id) = queue.pop_front() {
        let (s, q) = states[id];
        for &(t, p) in chain.row(s) {
            let dst = intern((t, dra.step(q, letters[t])), &mut states, &mut queue);
            transitions.push((id, dst, p));
        }
    }
    let product = MarkovChain::new(ChainParts {
        n_states: states.len(),
        transitions,
        initial,
        ..ChainParts::default()
    })
    .map_err(crate::error::ModelError::from)?;
    Ok((product, states))
}

/// Probability that a run satisfies the automaton's acceptance condition.
pub fn exact_ltl(chain: &MarkovChain, dra: &RabinAutomaton) -> Result<f64, SmcError> {
    let (product, states) = explicit_product(chain, dra)?;
    let mut goal = vec![false; product.n_states()];
    for c in bsccs(&product) {
        if dra.accepts_inf_set(c.iter().map(|&i| states[i].1)) {
            for i in c {
                goal[i] = true;
            }
        }
    }
    exact_reachability(&product, &goal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaselineSample {
    pub terminated_by: Option<Termination>,
    pub path_length: u64,
}

impl BaselineSample {
    pub fn outcome(&self) -> bool {
        self.terminated_by == Some(Termination::Goal)
    }
}

/// One path of the termination-based baseline: after entering each state
/// the path returns 1 if it is a goal, otherwise stops with probability
/// `p_term` and returns 0.
pub fn sim_termination_sample(
    chain: &MarkovChain,
    goal: &[bool],
    p_term: f64,
    master_seed: u64,
    path_index: u64,
    max_steps: u64,
) -> Result<BaselineSample, SmcError> {
    let mut path = chain.sampler(master_seed, path_index);
    loop {
        let s = path.next_state();
        if goal[s] {
            return Ok(BaselineSample {
                terminated_by: Some(Termination::Goal),
                path_length: path.length(),
            });
        }
        if path.coin() < p_term {
            return Ok(BaselineSample {
                terminated_by: None,
                path_length: path.length(),
            });
        }
        if path.length() >= max_steps {
            return Err(SmcError::Diverged { path_index, max_steps });
        }
    }
}

/// Fraction of `n` baseline paths that reach the goal.
pub fn baseline_estimate(
    chain: &MarkovChain,
    goal_label: &str,
    p_term: f64,
    n: u64,
    cfg: &RunConfig,
) -> Result<VerificationReport, SmcError> {
    if !(p_term > 0.0 && p_term < 1.0) {
        return Err(SmcError::InvalidParameter(format!("p_term = {p_term} outside (0, 1)")));
    }
    if n == 0 {
        return Err(SmcError::InvalidParameter("need at least one sample".into()));
    }
    let goal = goal_mask(chain, goal_label)?;
    let samples = run_fixed(cfg.threads, n, || (), |_, i| {
        sim_termination_sample(chain, &goal, p_term, cfg.master_seed, i, cfg.max_steps)
    })?;
    let mut lengths = LengthStats::default();
    let mut yes = 0u64;
    for s in &samples {
        lengths.push(s.path_length);
        yes += u64::from(s.outcome());
    }
    let params = Parameters {
        alpha: 0.0,
        p_term: Some(p_term),
        max_steps: Some(cfg.max_steps),
        ..Parameters::default()
    };
    let mut report = VerificationReport::new(Property::Baseline, &lengths, cfg.master_seed, params);
    report.estimate = Some(yes as f64 / n as f64);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::library;
    use crate::generators::{self, GOAL};
    use crate::reach::mask_of;

    #[test]
    fn inventories() {
        assert_eq!(bsccs(&generators::fig1(5)), vec![vec![6], vec![7, 8]]);
        assert_eq!(bscc_inventory(&generators::fig1(5)).to_string(), "2, 2");
        assert_eq!(bscc_inventory(&generators::fig3(16)).to_string(), "1, 1");
        assert_eq!(bscc_inventory(&generators::fig4(1000, 5)).to_string(), "2, 5");
        assert_eq!(bscc_inventory(&generators::fig4(3, 7)), BsccInventory { count: 2, max_size: 7 });
    }

    #[test]
    fn reachability_examples() {
        for m in [1, 3, 10] {
            let c = generators::fig1(m);
            let v = exact_reachability(&c, &goal_mask(&c, GOAL).unwrap()).unwrap();
            assert!((v - 0.5).abs() < 1e-12);
        }
        let c = generators::random(10, 3, 1);
        assert_eq!(exact_reachability(&c, &vec![true; 10]).unwrap(), 1.0);
        let c = generators::fig3(18);
        let v = exact_reachability(&c, &goal_mask(&c, GOAL).unwrap()).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reachability_is_monotone() {
        let c = generators::random(12, 3, 5);
        let mut goal = vec![false; 12];
        let mut prev = exact_reachability(&c, &goal).unwrap();
        assert_eq!(prev, 0.0);
        for s in [4, 0, 9, 2] {
            goal[s] = true;
            let v = exact_reachability(&c, &goal).unwrap();
            assert!(v >= prev - 1e-12 && v <= 1.0);
            prev = v;
        }
    }

    #[test]
    fn almost_sure_needs_no_solve() {
        // hitting time 2^n: only the qualitative precomputation gets this right
        let c = generators::fig3(2500);
        let v = exact_reachability(&c, &goal_mask(&c, GOAL).unwrap()).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn large_systems_use_iteration() {
        // biased walk on 0..=n from 1, up with 0.6; 0 absorbing, n absorbing goal
        let n = 2500;
        let mut tr = vec![(0, 0, 1.0), (n, n, 1.0)];
        for i in 1..n {
            tr.push((i, i + 1, 0.6));
            tr.push((i, i - 1, 0.4));
        }
        let c = MarkovChain::new(ChainParts {
            n_states: n + 1,
            transitions: tr,
            initial: vec![(1, 1.0)],
            ..ChainParts::default()
        })
        .unwrap();
        let v = exact_reachability(&c, &mask_of(n + 1, &[n])).unwrap();
        let r: f64 = 0.4 / 0.6;
        let truth = (1.0 - r) / (1.0 - r.powi(n as i32));
        assert!((v - truth).abs() < 1e-8, "{v} vs {truth}");
    }

    #[test]
    fn mean_payoff_examples() {
        let v = exact_mp(&generators::fig4(5, 2)).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        let v = exact_mp(&generators::fig1(4)).unwrap();
        // reward 1 only on the transient r
        assert!(v.abs() < 1e-12);
        let e = generators::random_ergodic(5, 0.1, 3);
        let b = bsccs(&e);
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn ltl_examples() {
        let c = generators::fig1(3);
        assert!((exact_ltl(&c, &library::universal(GOAL)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(exact_ltl(&c, &library::empty(GOAL)).unwrap(), 0.0);
        let reach = exact_reachability(&c, &goal_mask(&c, GOAL).unwrap()).unwrap();
        let ltl = exact_ltl(&c, &library::eventually(GOAL)).unwrap();
        assert!((reach - ltl).abs() < 1e-9);
    }

    #[test]
    fn universal_product_keeps_bscc_count() {
        for seed in 0..10 {
            let c = generators::random(8, 3, seed);
            let (p, _) = explicit_product(&c, &library::universal(GOAL)).unwrap();
            let reachable = bsccs(&p).len();
            // every BSCC of the product projects onto a chain BSCC
            assert!(reachable <= bsccs(&c).len());
        }
        let c = generators::fig4(3, 2);
        let (p, _) = explicit_product(&c, &library::universal(GOAL)).unwrap();
        assert_eq!(bsccs(&p).len(), bsccs(&c).len());
    }

    #[test]
    fn baseline_examples() {
        let c = generators::fig3(4);
        let start_in_goal = mask_of(c.n_states(), &[0]);
        assert!(sim_termination_sample(&c, &start_in_goal, 0.5, 0, 0, 100).unwrap().outcome());
        let unreachable = mask_of(c.n_states(), &[]);
        for i in 0..50 {
            assert!(!sim_termination_sample(&c, &unreachable, 0.1, 0, i, 1_000_000).unwrap().outcome());
        }
    }
}
