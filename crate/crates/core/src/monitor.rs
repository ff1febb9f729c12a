//! On-the-fly BSCC candidate detection along a single sampled path.
//!
//! The candidate of a path is the strongly connected component of the last
//! state in the graph of the path (vertices = visited states, edges =
//! traversed steps), provided that component is bottom and contains an edge.
//! The tracker maintains the candidate incrementally together with its
//! index in the sequence of distinct candidates, its birthday (the position
//! at which it first became the candidate) and per-state occurrence counts
//! since that birthday.
//!
//! States are opaque `u64` keys so the same tracker serves plain chains and
//! lazily explored products.

use std::cell::Cell;
use std::collections::HashMap;

use crate::error::SmcError;
use crate::scc::Tarjan;

/// Default period between candidate recomputations.
pub const DEFAULT_CHECK_BOUND: u64 = 1000;

/// Key spaces up to this size use a dense lookup table.
const DENSE_LIMIT: usize = 1 << 24;

const NO_LOCAL: u32 = u32::MAX;

/// Required strength of the `i`-th candidate: `(i - log2 δ) / -log2(1 - pmin)`.
pub fn k_threshold(i: u32, delta: f64, pmin: f64) -> f64 {
    (f64::from(i) - delta.log2()) / -(1.0 - pmin).log2()
}

/// `⌈k_threshold⌉` as an occurrence count.
pub fn required_occurrences(i: u32, delta: f64, pmin: f64) -> u64 {
    let k = k_threshold(i, delta, pmin).ceil();
    if k >= u64::MAX as f64 {
        u64::MAX
    } else {
        k as u64
    }
}

#[derive(Debug, Clone)]
struct Edge {
    to: u32,
    /// Path position of the edge's target when it was first traversed.
    first_seen: usize,
}

#[derive(Debug, Clone)]
enum KeyIndex {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

#[derive(Debug, Clone)]
pub struct CandidateTracker {
    check_bound: u64,
    index: KeyIndex,
    keys: Vec<u64>,
    adj: Vec<Vec<Edge>>,
    /// Bit `w` of `adj_bits[v]` is set iff the edge `v -> w` exists, for `w < 64`.
    adj_bits: Vec<u64>,
    path: Vec<u32>,
    /// Sorted local ids of the current candidate; empty when there is none.
    candidate: Vec<u32>,
    in_candidate: Vec<bool>,
    /// Last candidate seen (survives the candidate becoming undefined).
    previous: Vec<u32>,
    candidate_index: u32,
    birthday: usize,
    counts: Vec<u64>,
    /// `(len, k)`: the candidate cannot be a strong `k'`-candidate for any
    /// `k' >= k` before the path has length `len` (counts grow by at most
    /// one per step).
    recheck_at: Cell<(usize, u64)>,
    pending: bool,
    tarjan: Tarjan,
}

impl CandidateTracker {
    /// `key_space` bounds the keys fed to [`advance`](Self::advance) when known;
    /// `check_bound` (C_b ≥ 1) is the recomputation period.
    pub fn new(key_space: Option<usize>, check_bound: u64) -> Self {
        let index = match key_space {
            Some(n) if n <= DENSE_LIMIT => KeyIndex::Dense(vec![NO_LOCAL; n]),
            _ => KeyIndex::Sparse(HashMap::new()),
        };
        CandidateTracker {
            check_bound: check_bound.max(1),
            index,
            keys: Vec::new(),
            adj: Vec::new(),
            adj_bits: Vec::new(),
            path: Vec::new(),
            candidate: Vec::new(),
            in_candidate: Vec::new(),
            previous: Vec::new(),
            candidate_index: 0,
            birthday: 0,
            counts: Vec::new(),
            recheck_at: Cell::new((0, 0)),
            pending: false,
            tarjan: Tarjan::new(),
        }
    }

    /// Forgets the path while keeping allocations.
    pub fn clear(&mut self) {
        match &mut self.index {
            KeyIndex::Dense(table) => {
                for &k in &self.keys {
                    table[k as usize] = NO_LOCAL;
                }
            }
            KeyIndex::Sparse(map) => map.clear(),
        }
        self.keys.clear();
        self.adj.clear();
        self.adj_bits.clear();
        self.path.clear();
        self.candidate.clear();
        self.in_candidate.clear();
        self.previous.clear();
        self.candidate_index = 0;
        self.birthday = 0;
        self.counts.clear();
        self.recheck_at.set((0, 0));
        self.pending = false;
    }

    pub fn check_bound(&self) -> u64 {
        self.check_bound
    }

    #[inline]
    fn intern(&mut self, key: u64) -> u32 {
        let next = self.keys.len() as u32;
        let local = match &mut self.index {
            KeyIndex::Dense(table) => {
                let slot = &mut table[key as usize];
                if *slot == NO_LOCAL {
                    *slot = next;
                }
                *slot
            }
            KeyIndex::Sparse(map) => *map.entry(key).or_insert(next),
        };
        if local == next {
            self.keys.push(key);
            self.adj.push(Vec::new());
            self.adj_bits.push(0);
            self.in_candidate.push(false);
            self.counts.push(0);
            self.pending = true;
        }
        local
    }

    /// Appends `key` to the path and updates the candidate bookkeeping.
    #[inline]
    pub fn advance(&mut self, key: u64) {
        let v = self.intern(key);
        let pos = self.path.len();
        let has_candidate = !self.candidate.is_empty();
        let mut leaving = false;
        if let Some(&u) = self.path.last() {
            if !self.has_edge(u, v) {
                leaving = has_candidate && !self.in_candidate[v as usize];
                self.adj[u as usize].push(Edge { to: v, first_seen: pos });
                if v < 64 {
                    self.adj_bits[u as usize] |= 1 << v;
                }
                self.pending = true;
            }
        }
        self.path.push(v);
        if has_candidate && !leaving {
            self.counts[v as usize] += 1;
        }
        if self.pending && (leaving || (self.path.len() as u64).is_multiple_of(self.check_bound)) {
            self.recompute();
        }
    }

    #[inline]
    fn has_edge(&self, u: u32, v: u32) -> bool {
        if v < 64 {
            self.adj_bits[u as usize] >> v & 1 == 1
        } else {
            self.adj[u as usize].iter().any(|e| e.to == v)
        }
    }

    /// Forces a candidate recomputation if the path graph changed since the last one.
    pub fn refresh(&mut self) {
        if self.pending {
            self.recompute();
        }
    }

    fn drop_candidate(&mut self) {
        for &m in &self.candidate {
            self.in_candidate[m as usize] = false;
        }
        self.candidate.clear();
        self.recheck_at.set((0, 0));
    }

    fn recompute(&mut self) {
        self.pending = false;
        let Some(&last) = self.path.last() else {
            return;
        };
        let adj = &self.adj;
        let mut n_components = 0usize;
        let mut root_component: Vec<u32> = Vec::new();
        self.tarjan.run(
            self.keys.len(),
            [last as usize],
            |v, i| adj[v].get(i).map(|e| e.to as usize),
            |comp| {
                n_components += 1;
                root_component.clear();
                root_component.extend(comp.iter().map(|&x| x as u32));
            },
        );
        // Tarjan from `last` visits exactly what `last` reaches, so its
        // component is bottom iff it is the only one emitted.
        let nontrivial =
            root_component.len() > 1 || self.adj[last as usize].iter().any(|e| e.to == last);
        if n_components != 1 || !nontrivial {
            self.drop_candidate();
            return;
        }
        root_component.sort_unstable();
        if root_component == self.candidate {
            return;
        }
        self.drop_candidate();
        if root_component != self.previous {
            self.candidate_index += 1;
            self.previous.clone_from(&root_component);
        }
        for &m in &root_component {
            self.in_candidate[m as usize] = true;
        }
        self.candidate = root_component;
        self.birthday = self.find_birthday();
        self.rebuild_counts();
    }

    /// First position at which the current candidate was the candidate of the
    /// path prefix ending there.
    fn find_birthday(&self) -> usize {
        let local_of: HashMap<u32, usize> = self
            .candidate
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, i))
            .collect();
        let mut edges: Vec<(usize, usize, usize)> = Vec::new();
        for (i, &m) in self.candidate.iter().enumerate() {
            for e in &self.adj[m as usize] {
                edges.push((e.first_seen, i, local_of[&e.to]));
            }
        }
        edges.sort_unstable();
        let k = self.candidate.len();
        let strongly_connected = |prefix: &[(usize, usize, usize)]| {
            let mut fwd = vec![Vec::new(); k];
            let mut bwd = vec![Vec::new(); k];
            for &(_, a, b) in prefix {
                fwd[a].push(b);
                bwd[b].push(a);
            }
            let reaches_all = |g: &Vec<Vec<usize>>| {
                let mut seen = vec![false; k];
                let mut stack = vec![0];
                seen[0] = true;
                let mut n = 1;
                while let Some(v) = stack.pop() {
                    for &w in &g[v] {
                        if !seen[w] {
                            seen[w] = true;
                            n += 1;
                            stack.push(w);
                        }
                    }
                }
                n == k
            };
            // a singleton additionally needs its self-loop
            !prefix.is_empty() && reaches_all(&fwd) && reaches_all(&bwd)
        };
        // smallest prefix of edges (by first traversal) that is strongly connected
        let (mut lo, mut hi) = (1, edges.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if strongly_connected(&edges[..mid]) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        edges[lo - 1].0
    }

    fn rebuild_counts(&mut self) {
        for &m in &self.candidate {
            self.counts[m as usize] = 0;
        }
        for &v in &self.path[self.birthday..] {
            self.counts[v as usize] += 1;
        }
        self.recheck_at.set((0, 0));
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    pub fn last(&self) -> Option<u64> {
        self.path.last().map(|&l| self.keys[l as usize])
    }

    /// Path as fed to [`advance`](Self::advance).
    pub fn path_keys(&self) -> impl Iterator<Item = u64> + '_ {
        self.path.iter().map(|&l| self.keys[l as usize])
    }

    pub fn has_candidate(&self) -> bool {
        !self.candidate.is_empty()
    }

    /// Keys of the current candidate, sorted ascending.
    pub fn candidate(&self) -> Option<Vec<u64>> {
        if self.candidate.is_empty() {
            return None;
        }
        let mut keys: Vec<u64> = self.candidate.iter().map(|&m| self.keys[m as usize]).collect();
        keys.sort_unstable();
        Some(keys)
    }

    pub fn candidate_size(&self) -> usize {
        self.candidate.len()
    }

    /// 1-based index of the current (or last) candidate in the sequence of distinct candidates.
    pub fn candidate_index(&self) -> u32 {
        self.candidate_index
    }

    /// 0-based path position of the current candidate's birthday.
    pub fn birthday(&self) -> Option<usize> {
        self.has_candidate().then_some(self.birthday)
    }

    /// Occurrences of `key` since the candidate's birthday.
    pub fn count_since_birth(&self, key: u64) -> u64 {
        self.local_of(key)
            .filter(|&l| self.in_candidate[l as usize])
            .map_or(0, |l| self.counts[l as usize])
    }

    fn local_of(&self, key: u64) -> Option<u32> {
        let l = match &self.index {
            KeyIndex::Dense(t) => *t.get(key as usize)?,
            KeyIndex::Sparse(m) => *m.get(&key)?,
        };
        (l != NO_LOCAL).then_some(l)
    }

    /// Strong k-candidacy without the `Result` wrapper; false when there is no candidate.
    #[inline]
    pub fn strong_k_holds(&self, k: u64) -> bool {
        let Some(&last) = self.path.last() else {
            return false;
        };
        if self.candidate.is_empty() || self.counts[last as usize] <= k {
            return false;
        }
        let (until, for_k) = self.recheck_at.get();
        if k >= for_k && self.path.len() < until {
            return false;
        }
        let min = self.candidate.iter().map(|&m| self.counts[m as usize]).min().unwrap_or(0);
        if min >= k {
            return true;
        }
        self.recheck_at.set((self.path.len() + (k - min) as usize, k));
        false
    }

    /// Counting from the birthday, every candidate state occurs at least `k`
    /// times and the last state at least `k + 1` times.
    pub fn is_strong_k_candidate(&self, k: u64) -> Result<bool, SmcError> {
        if !self.has_candidate() {
            return Err(SmcError::NoCandidate);
        }
        Ok(self.strong_k_holds(k))
    }

    /// As [`is_strong_k_candidate`](Self::is_strong_k_candidate), counting
    /// over the maximal suffix that stays inside the candidate.
    pub fn is_k_candidate(&self, k: u64) -> Result<bool, SmcError> {
        if !self.has_candidate() {
            return Err(SmcError::NoCandidate);
        }
        let mut counts: HashMap<u32, u64> = HashMap::new();
        for &v in self.path.iter().rev() {
            if !self.in_candidate[v as usize] {
                break;
            }
            *counts.entry(v).or_default() += 1;
        }
        let last = *self.path.last().expect("candidate implies a non-empty path");
        Ok(self
            .candidate
            .iter()
            .all(|m| counts.get(m).copied().unwrap_or(0) >= k)
            && counts[&last] > k)
    }

    /// Occurrence count the current candidate needs before it is accepted as a BSCC.
    pub fn required_strength(&self, pmin: f64, delta: f64) -> Option<u64> {
        self.has_candidate()
            .then(|| required_occurrences(self.candidate_index, delta, pmin))
    }

    /// True iff the candidate is a strong ⌈k_i⌉-candidate for its index `i`.
    pub fn reached_bscc(&self, pmin: f64, delta: f64) -> bool {
        self.required_strength(pmin, delta)
            .is_some_and(|k| self.strong_k_holds(k))
    }

    /// Observed transition counts inside the candidate since its birthday.
    pub fn transition_counts(&self) -> Option<TransitionCounts> {
        if self.candidate.is_empty() {
            return None;
        }
        let mut order: Vec<u32> = self.candidate.clone();
        order.sort_unstable_by_key(|&m| self.keys[m as usize]);
        let mut pos = vec![usize::MAX; self.keys.len()];
        for (i, &m) in order.iter().enumerate() {
            pos[m as usize] = i;
        }
        let k = order.len();
        let mut counts = vec![vec![0u64; k]; k];
        // the path stays inside the candidate from its birthday on
        for w in self.path[self.birthday..].windows(2) {
            counts[pos[w[0] as usize]][pos[w[1] as usize]] += 1;
        }
        Some(TransitionCounts {
            states: order.iter().map(|&m| self.keys[m as usize]).collect(),
            counts,
        })
    }
}

/// Transition counts over a candidate; `counts[i][j]` counts steps
/// `states[i] -> states[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionCounts {
    pub states: Vec<u64>,
    pub counts: Vec<Vec<u64>>,
}

impl TransitionCounts {
    /// Counts the steps of `segment` between members of `states`.
    pub fn from_segment(states: &[u64], segment: &[u64]) -> Self {
        let mut states = states.to_vec();
        states.sort_unstable();
        states.dedup();
        let k = states.len();
        let mut counts = vec![vec![0u64; k]; k];
        for w in segment.windows(2) {
            if let (Ok(i), Ok(j)) = (states.binary_search(&w[0]), states.binary_search(&w[1])) {
                counts[i][j] += 1;
            }
        }
        TransitionCounts { states, counts }
    }
}
