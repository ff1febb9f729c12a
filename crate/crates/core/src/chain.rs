//! Labelled, reward-annotated discrete-time Markov chains.
//!
//! A [`MarkovChain`] is immutable once built and can be shared freely between
//! samplers. Each sampled path owns a [`PathSampler`], whose random stream is
//! derived from a master seed and the path index so that any path can be
//! replayed on its own.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ValidationError;

/// Tolerance on row sums and on the initial distribution.
pub const PROB_TOLERANCE: f64 = 1e-6;

/// Rows whose sum is this close to one are taken as already normalized.
const RENORM_SLACK: f64 = 1e-12;

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain {
    rows: Vec<Vec<(StateId, f64)>>,
    /// Flattened sampling tables: row `s` occupies `offsets[s]..offsets[s + 1]`.
    offsets: Vec<usize>,
    targets: Vec<StateId>,
    cumulative: Vec<f64>,
    initial: Vec<(StateId, f64)>,
    initial_cumulative: Vec<f64>,
    label_names: Vec<String>,
    labels: Vec<Vec<usize>>,
    rewards: Vec<f64>,
    declared_pmin: f64,
}

/// Builder-side description of a chain; validated by [`MarkovChain::new`].
#[derive(Debug, Clone, Default)]
pub struct ChainParts {
    pub n_states: usize,
    pub transitions: Vec<(StateId, StateId, f64)>,
    pub initial: Vec<(StateId, f64)>,
    pub label_names: Vec<String>,
    /// `(state, label id)` pairs.
    pub labels: Vec<(StateId, usize)>,
    /// Sparse rewards; missing states get reward zero.
    pub rewards: Vec<(StateId, f64)>,
    /// Defaults to the actual minimum transition probability.
    pub declared_pmin: Option<f64>,
}

fn normalize(row: &mut [(StateId, f64)]) {
    let sum: f64 = row.iter().map(|&(_, p)| p).sum();
    if (sum - 1.0).abs() > RENORM_SLACK {
        for entry in row.iter_mut() {
            entry.1 /= sum;
        }
    }
}

fn cumulative_of(row: &[(StateId, f64)]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = row
        .iter()
        .map(|&(_, p)| {
            acc += p;
            acc
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    cdf
}

#[inline]
fn pick(cdf: &[f64], u: f64) -> usize {
    // first index with cdf[i] > u; the last entry is exactly 1 > u.
    // Short rows count branch-free: the outcome is random, so a scan mispredicts.
    if cdf.len() <= 8 {
        cdf.iter().map(|&c| usize::from(c <= u)).sum()
    } else {
        cdf.partition_point(|&c| c <= u)
    }
}

impl MarkovChain {
    pub fn new(parts: ChainParts) -> Result<Self, ValidationError> {
        let n = parts.n_states;
        if n == 0 {
            return Err(ValidationError::Empty);
        }
        let mut rows: Vec<Vec<(StateId, f64)>> = vec![Vec::new(); n];
        for &(src, dst, p) in &parts.transitions {
            if src >= n || dst >= n {
                return Err(ValidationError::StateOutOfRange {
                    state: src.max(dst),
                    n_states: n,
                });
            }
            if !(p > 0.0 && p <= 1.0 + PROB_TOLERANCE) {
                return Err(ValidationError::BadProbability { src, dst, prob: p });
            }
            if rows[src].iter().any(|&(t, _)| t == dst) {
                return Err(ValidationError::DuplicateTransition { src, dst });
            }
            rows[src].push((dst, p));
        }
        for (state, row) in rows.iter_mut().enumerate() {
            let sum = row.iter().fold(0.0, |acc, &(_, p)| acc + p);
            if (sum - 1.0).abs() > PROB_TOLERANCE {
                return Err(ValidationError::RowSum { state, sum });
            }
            normalize(row);
        }

        let mut initial = if parts.initial.is_empty() {
            vec![(0, 1.0)]
        } else {
            parts.initial.clone()
        };
        for &(s, p) in &initial {
            if s >= n {
                return Err(ValidationError::StateOutOfRange {
                    state: s,
                    n_states: n,
                });
            }
            if !(p > 0.0) {
                return Err(ValidationError::BadInitial { state: s, prob: p });
            }
        }
        {
            let mut seen = vec![false; n];
            for &(s, _) in &initial {
                if std::mem::replace(&mut seen[s], true) {
                    return Err(ValidationError::DuplicateInitial { state: s });
                }
            }
        }
        let sum: f64 = initial.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(ValidationError::InitialSum { sum });
        }
        normalize(&mut initial);

        let mut labels = vec![Vec::new(); n];
        for &(s, l) in &parts.labels {
            if s >= n {
                return Err(ValidationError::StateOutOfRange {
                    state: s,
                    n_states: n,
                });
            }
            if l >= parts.label_names.len() {
                return Err(ValidationError::UnknownLabelId { id: l });
            }
            if !labels[s].contains(&l) {
                labels[s].push(l);
            }
        }
        for l in &mut labels {
            l.sort_unstable();
        }

        let mut rewards = vec![0.0; n];
        for &(s, r) in &parts.rewards {
            if s >= n {
                return Err(ValidationError::StateOutOfRange {
                    state: s,
                    n_states: n,
                });
            }
            if !(0.0..=1.0).contains(&r) {
                return Err(ValidationError::RewardRange { state: s, reward: r });
            }
            rewards[s] = r;
        }

        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut cumulative = Vec::new();
        offsets.push(0);
        for row in &rows {
            targets.extend(row.iter().map(|&(t, _)| t));
            cumulative.extend(cumulative_of(row));
            offsets.push(targets.len());
        }
        let initial_cumulative = cumulative_of(&initial);
        let mut chain = MarkovChain {
            rows,
            offsets,
            targets,
            cumulative,
            initial,
            initial_cumulative,
            label_names: parts.label_names,
            labels,
            rewards,
            declared_pmin: 1.0,
        };
        let actual = chain.actual_pmin();
        chain.declared_pmin = match parts.declared_pmin {
            Some(p) => {
                if !(p > 0.0 && p <= actual) {
                    return Err(ValidationError::PminTooLarge {
                        declared: p,
                        actual,
                    });
                }
                p
            }
            None => actual,
        };
        Ok(chain)
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn n_transitions(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, s: StateId) -> &[(StateId, f64)] {
        &self.rows[s]
    }

    pub fn initial(&self) -> &[(StateId, f64)] {
        &self.initial
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    /// Label ids holding in `s`, sorted.
    pub fn labels_of(&self, s: StateId) -> &[usize] {
        &self.labels[s]
    }

    pub fn label_id(&self, name: &str) -> Option<usize> {
        self.label_names.iter().position(|n| n == name)
    }

    /// States carrying the named label, or `None` if the label is undeclared.
    pub fn states_with_label(&self, name: &str) -> Option<Vec<StateId>> {
        let id = self.label_id(name)?;
        Some(
            (0..self.n_states())
                .filter(|&s| self.labels[s].binary_search(&id).is_ok())
                .collect(),
        )
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn declared_pmin(&self) -> f64 {
        self.declared_pmin
    }

    /// Smallest listed transition probability.
    pub fn actual_pmin(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .map(|&(_, p)| p)
            .fold(f64::INFINITY, f64::min)
    }

    /// Replaces the reward vector (entries must lie in `[0, 1]`).
    pub fn with_rewards(mut self, rewards: Vec<f64>) -> Result<Self, ValidationError> {
        if rewards.len() != self.n_states() {
            return Err(ValidationError::RewardLength {
                expected: self.n_states(),
                got: rewards.len(),
            });
        }
        if let Some((s, &r)) = rewards
            .iter()
            .enumerate()
            .find(|(_, r)| !(0.0..=1.0).contains(*r))
        {
            return Err(ValidationError::RewardRange { state: s, reward: r });
        }
        self.rewards = rewards;
        Ok(self)
    }

    pub fn with_declared_pmin(mut self, pmin: f64) -> Result<Self, ValidationError> {
        let actual = self.actual_pmin();
        if !(pmin > 0.0 && pmin <= actual) {
            return Err(ValidationError::PminTooLarge {
                declared: pmin,
                actual,
            });
        }
        self.declared_pmin = pmin;
        Ok(self)
    }

    /// Draws a state from the initial distribution given a uniform `u` in `[0, 1)`.
    #[inline]
    pub fn draw_initial(&self, u: f64) -> StateId {
        self.initial[pick(&self.initial_cumulative, u)].0
    }

    /// Draws a successor of `s` given a uniform `u` in `[0, 1)`.
    #[inline]
    pub fn draw_successor(&self, s: StateId, u: f64) -> StateId {
        let (a, b) = (self.offsets[s], self.offsets[s + 1]);
        self.targets[a + pick(&self.cumulative[a..b], u)]
    }

    pub fn sampler(&self, master_seed: u64, path_index: u64) -> PathSampler<'_> {
        PathSampler::new(self, master_seed, path_index)
    }
}

/// Independent, reproducible random stream for one sampled path.
pub fn path_stream(master_seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path_index);
    rng
}

/// A path under construction: last state, length and the path's own stream.
#[derive(Debug, Clone)]
pub struct PathSampler<'a> {
    chain: &'a MarkovChain,
    rng: ChaCha8Rng,
    last: Option<StateId>,
    length: u64,
}

impl<'a> PathSampler<'a> {
    pub fn new(chain: &'a MarkovChain, master_seed: u64, path_index: u64) -> Self {
        PathSampler {
            chain,
            rng: path_stream(master_seed, path_index),
            last: None,
            length: 0,
        }
    }

    /// Extends the path by one state; the empty path draws from the initial distribution.
    #[inline]
    pub fn next_state(&mut self) -> StateId {
        let u: f64 = self.rng.gen();
        let s = match self.last {
            None => self.chain.draw_initial(u),
            Some(l) => self.chain.draw_successor(l, u),
        };
        self.last = Some(s);
        self.length += 1;
        s
    }

    pub fn last_state(&self) -> Option<StateId> {
        self.last
    }

    pub fn length(&self) -> u64 {
        self.length
    }

    /// Uniform draw from the same stream (used by baselines that need extra coins).
    pub fn coin(&mut self) -> f64 {
        self.rng.gen()
    }

    pub fn chain(&self) -> &'a MarkovChain {
        self.chain
    }
}
