use adaptive_smc::exact::{exact_mp, exact_reachability};
use adaptive_smc::generators::{self, GOAL};
use adaptive_smc::reach::goal_mask;
use adaptive_smc::MarkovChain;

/// States from which the goal is reachable in the graph.
fn can_reach(chain: &MarkovChain, goal: &[bool]) -> Vec<bool> {
    let mut ok = goal.to_vec();
    loop {
        let mut changed = false;
        for s in 0..chain.n_states() {
            if !ok[s] && chain.row(s).iter().any(|&(t, _)| ok[t]) {
                ok[s] = true;
                changed = true;
            }
        }
        if !changed {
            return ok;
        }
    }
}

#[test]
fn reachability_matches_bounded_simulation() {
    const N: u64 = 1_000_000;
    const HORIZON: u64 = 1_000;
    for seed in 0..10 {
        let chain = generators::random(10, 3, 50 + seed);
        let goal = goal_mask(&chain, GOAL).unwrap();
        let alive = can_reach(&chain, &goal);
        let truth = exact_reachability(&chain, &goal).unwrap();
        let mut hits = 0u64;
        for i in 0..N {
            let mut path = chain.sampler(seed, i);
            while path.length() < HORIZON {
                let s = path.next_state();
                if goal[s] {
                    hits += 1;
                    break;
                }
                if !alive[s] {
                    break;
                }
            }
        }
        let est = hits as f64 / N as f64;
        let sigma = (truth * (1.0 - truth) / N as f64).sqrt();
        assert!((est - truth).abs() <= 3.0 * sigma + 1e-9, "seed {seed}: {est} vs {truth}");
    }
}

#[test]
fn mean_payoff_matches_long_run_average() {
    for seed in 0..5 {
        let chain = generators::random_ergodic(5, 0.05, seed);
        let truth = exact_mp(&chain).unwrap();
        let mut path = chain.sampler(seed, 0);
        let steps = 1_000_000;
        let total: f64 = (0..steps).map(|_| chain.rewards()[path.next_state()]).sum();
        let avg = total / steps as f64;
        assert!((avg - truth).abs() < 0.005, "seed {seed}: {avg} vs {truth}");
    }
}
