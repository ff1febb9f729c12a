//! Synthetic chain families used in experiments and tests.
//!
//! Every family carries a single label `goal`, and rewards equal to the goal
//! indicator unless stated otherwise.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{ChainParts, MarkovChain, StateId};
use crate::error::SmcError;

pub const GOAL: &str = "goal";

fn build(
    n_states: usize,
    transitions: Vec<(StateId, StateId, f64)>,
    goal: &[StateId],
    rewards: Vec<(StateId, f64)>,
) -> MarkovChain {
    MarkovChain::new(ChainParts {
        n_states,
        transitions,
        initial: vec![(0, 1.0)],
        label_names: vec![GOAL.to_string()],
        labels: goal.iter().map(|&s| (s, 0)).collect(),
        rewards,
        declared_pmin: None,
    })
    .expect("generated chain is valid by construction")
}

/// The introductory chain: `s` branches 0.5/0.5 to `r` and `t`; `r` leads
/// through the deterministic corridor `v_1 .. v_m` into an absorbing `v_m`;
/// `t` and `u` swap with probability 0.99 and self-loop with 0.01.
///
/// Numbering: `s = 0`, `r = 1`, `v_i = 1 + i`, `t = m + 2`, `u = m + 3`.
/// `r` is labelled `goal`.
pub fn fig1(m: usize) -> MarkovChain {
    assert!(m >= 1, "fig1 needs at least one corridor state");
    let (s, r) = (0, 1);
    let v = |i: usize| 1 + i;
    let (t, u) = (m + 2, m + 3);
    let mut tr = vec![(s, r, 0.5), (s, t, 0.5), (r, v(1), 1.0)];
    for i in 1..m {
        tr.push((v(i), v(i + 1), 1.0));
    }
    tr.push((v(m), v(m), 1.0));
    tr.extend([(t, u, 0.99), (t, t, 0.01), (u, t, 0.99), (u, u, 0.01)]);
    build(m + 4, tr, &[r], vec![(r, 1.0)])
}

/// Chain with many nested strongly connected sets: `s_0` self-loops with 0.5,
/// each `s_i` (`i < n`) moves forward or back to `s_0` with 0.5, and `s_n`
/// is absorbing and labelled `goal`.
pub fn fig3(n: usize) -> MarkovChain {
    assert!(n >= 1, "fig3 needs n >= 1");
    let mut tr = vec![(0, 0, 0.5)];
    for i in 0..n {
        tr.push((i, i + 1, 0.5));
        if i > 0 {
            tr.push((i, 0, 0.5));
        }
    }
    tr.push((n, n, 1.0));
    build(n + 1, tr, &[n], vec![(n, 1.0)])
}

/// Two symmetric arms of `n` self-looping singletons, each ending in a
/// deterministic ring of `m` states. The right ring is labelled `goal`.
///
/// Numbering: `0` is the initial state, left arm `1..=n`, right arm
/// `n+1..=2n`, left ring `2n+1..=2n+m`, right ring `2n+m+1..=2n+2m`.
pub fn fig4(n: usize, m: usize) -> MarkovChain {
    assert!(n >= 1 && m >= 1, "fig4 needs N, M >= 1");
    let left = |i: usize| i;
    let right = |i: usize| n + i;
    let left_ring = |j: usize| 2 * n + 1 + j;
    let right_ring = |j: usize| 2 * n + m + 1 + j;
    let mut tr = vec![(0, left(1), 0.5), (0, right(1), 0.5)];
    for i in 1..=n {
        tr.push((left(i), left(i), 0.5));
        tr.push((right(i), right(i), 0.5));
        let (ln, rn) = if i < n {
            (left(i + 1), right(i + 1))
        } else {
            (left_ring(0), right_ring(0))
        };
        tr.push((left(i), ln, 0.5));
        tr.push((right(i), rn, 0.5));
    }
    for j in 0..m {
        tr.push((left_ring(j), left_ring((j + 1) % m), 1.0));
        tr.push((right_ring(j), right_ring((j + 1) % m), 1.0));
    }
    let goal: Vec<StateId> = (0..m).map(right_ring).collect();
    let rewards = goal.iter().map(|&s| (s, 1.0)).collect();
    build(2 * n + 2 * m + 1, tr, &goal, rewards)
}

/// Splits 1000 milli-units over `weights`, each share at least one unit.
fn milli_split(weights: &[u32]) -> Vec<u32> {
    let total: u32 = weights.iter().sum();
    let mut shares: Vec<u32> = weights
        .iter()
        .map(|&w| (1000 * w / total).max(1))
        .collect();
    let mut assigned: u32 = shares.iter().sum();
    // hand out or take back the rounding remainder on the largest shares
    while assigned != 1000 {
        let i = (0..shares.len()).max_by_key(|&i| shares[i]).unwrap();
        if assigned < 1000 {
            shares[i] += 1000 - assigned;
            assigned = 1000;
        } else {
            let take = (assigned - 1000).min(shares[i] - 1);
            shares[i] -= take;
            assigned -= take;
        }
    }
    shares
}

/// Random chain with out-degrees in `1..=max_out_degree` and probabilities on
/// a 1/1000 grid whose integer numerators sum to exactly 1000 per row.
/// Roughly a quarter of the states (at least one) are labelled `goal`;
/// rewards are random multiples of 1/1000.
pub fn random(n_states: usize, max_out_degree: usize, seed: u64) -> MarkovChain {
    assert!(n_states >= 1 && max_out_degree >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tr = Vec::new();
    for s in 0..n_states {
        let d = rng.gen_range(1..=max_out_degree.min(n_states));
        let mut targets = sample(&mut rng, n_states, d).into_vec();
        targets.sort_unstable();
        let weights: Vec<u32> = (0..d).map(|_| rng.gen_range(1..=10)).collect();
        for (t, share) in targets.into_iter().zip(milli_split(&weights)) {
            tr.push((s, t, f64::from(share) / 1000.0));
        }
    }
    let mut goal: Vec<StateId> = (0..n_states).filter(|_| rng.gen_bool(0.25)).collect();
    if goal.is_empty() {
        goal.push(rng.gen_range(0..n_states));
    }
    let rewards: Vec<f64> = (0..n_states)
        .map(|_| f64::from(rng.gen_range(0..=1000u32)) / 1000.0)
        .collect();
    build(n_states, tr, &goal, Vec::new())
        .with_rewards(rewards)
        .expect("rewards in range")
}

/// Random irreducible chain: every row has full support with probabilities
/// drawn on a 1/1000 grid and bounded below by `floor` (so the chain is
/// ergodic and its minimum transition probability is at least `floor`).
pub fn random_ergodic(n_states: usize, floor: f64, seed: u64) -> MarkovChain {
    assert!(n_states >= 1 && floor > 0.0 && floor * n_states as f64 <= 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let floor_units = (floor * 1000.0).ceil() as u32;
    let spare = 1000 - floor_units * n_states as u32;
    let mut tr = Vec::new();
    for s in 0..n_states {
        let weights: Vec<u32> = (0..n_states).map(|_| rng.gen_range(1..=10)).collect();
        let total: u32 = weights.iter().sum();
        let mut extra: Vec<u32> = weights.iter().map(|&w| spare * w / total).collect();
        let given: u32 = extra.iter().sum();
        extra[rng.gen_range(0..n_states)] += spare - given;
        for (t, e) in extra.into_iter().enumerate() {
            tr.push((s, t, f64::from(floor_units + e) / 1000.0));
        }
    }
    let rewards: Vec<f64> = (0..n_states)
        .map(|_| f64::from(rng.gen_range(0..=1000u32)) / 1000.0)
        .collect();
    build(n_states, tr, &[0], Vec::new())
        .with_rewards(rewards)
        .expect("rewards in range")
}

/// Builds a family from `name:arg,arg,...`: `fig1:M`, `fig3:N`, `fig4:N,M`,
/// `random:N,D,SEED` or `ergodic:N,FLOOR,SEED`.
pub fn from_spec(spec: &str) -> Result<MarkovChain, SmcError> {
    let bad = || {
        SmcError::InvalidParameter(format!(
            "unknown family {spec:?}; expected fig1:M, fig3:N, fig4:N,M, random:N,D,SEED or ergodic:N,FLOOR,SEED"
        ))
    };
    let (name, args) = spec.split_once(':').ok_or_else(bad)?;
    let args: Vec<&str> = args.split(',').map(str::trim).collect();
    let int = |i: usize| -> Result<usize, SmcError> {
        args[i].parse().ok().filter(|&v: &usize| v >= 1).ok_or_else(bad)
    };
    let arity = match name {
        "fig1" | "fig3" => 1,
        "fig4" => 2,
        "random" | "ergodic" => 3,
        _ => return Err(bad()),
    };
    if args.len() != arity {
        return Err(bad());
    }
    Ok(match name {
        "fig1" => fig1(int(0)?),
        "fig3" => fig3(int(0)?),
        "fig4" => fig4(int(0)?, int(1)?),
        "random" => random(int(0)?, int(1)?, args[2].parse().map_err(|_| bad())?),
        _ => {
            let n = int(0)?;
            let floor: f64 = args[1].parse().map_err(|_| bad())?;
            if !(floor > 0.0 && floor * n as f64 <= 1.0) {
                return Err(SmcError::InvalidParameter(format!(
                    "floor {floor} must be positive and at most 1/{n}"
                )));
            }
            random_ergodic(n, floor, args[2].parse().map_err(|_| bad())?)
        }
    })
}
