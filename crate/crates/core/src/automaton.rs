//! Deterministic Rabin automata over letters `2^AP`.
//!
//! Letters are bitmasks: bit `i` set means atomic proposition `i` holds.

use crate::error::ValidationError;

pub const MAX_AP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelExpr {
    True,
    False,
    Ap(u32),
    Not(Box<LabelExpr>),
    And(Box<LabelExpr>, Box<LabelExpr>),
    Or(Box<LabelExpr>, Box<LabelExpr>),
}

impl LabelExpr {
    pub fn eval(&self, letter: u32) -> bool {
        match self {
            LabelExpr::True => true,
            LabelExpr::False => false,
            LabelExpr::Ap(i) => letter >> i & 1 == 1,
            LabelExpr::Not(e) => !e.eval(letter),
            LabelExpr::And(a, b) => a.eval(letter) && b.eval(letter),
            LabelExpr::Or(a, b) => a.eval(letter) || b.eval(letter),
        }
    }

    /// Largest AP index mentioned, if any.
    pub fn max_ap(&self) -> Option<u32> {
        match self {
            LabelExpr::True | LabelExpr::False => None,
            LabelExpr::Ap(i) => Some(*i),
            LabelExpr::Not(e) => e.max_ap(),
            LabelExpr::And(a, b) | LabelExpr::Or(a, b) => a.max_ap().max(b.max_ap()),
        }
    }
}

/// Evaluates `e` on the letter given as a set of AP indices.
pub fn eval_label_expr(e: &LabelExpr, letter: &[u32]) -> bool {
    e.eval(letter.iter().fold(0, |m, &i| m | 1 << i))
}

/// Rabin pair: accepting iff `avoid` is visited finitely often and `visit`
/// infinitely often.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RabinPair {
    pub avoid: Vec<usize>,
    pub visit: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RabinAutomaton {
    n_states: usize,
    start: usize,
    ap_names: Vec<String>,
    transitions: Vec<Vec<(LabelExpr, usize)>>,
    pairs: Vec<RabinPair>,
    /// `table[q << n_ap | letter]` is the successor of `q` on `letter`.
    table: Vec<u32>,
    in_avoid: Vec<Vec<bool>>,
    in_visit: Vec<Vec<bool>>,
}

impl RabinAutomaton {
    /// Validates determinism and completeness by enumerating every letter.
    /// `state_lines` gives the 1-based source line of each state for error
    /// reporting (zeros when built programmatically).
    pub fn new(
        start: usize,
        ap_names: Vec<String>,
        transitions: Vec<Vec<(LabelExpr, usize)>>,
        pairs: Vec<RabinPair>,
        state_lines: &[usize],
    ) -> Result<Self, ValidationError> {
        let n = transitions.len();
        let n_ap = ap_names.len();
        if n == 0 {
            return Err(ValidationError::Empty);
        }
        let out_of_range = |state: usize| ValidationError::StateOutOfRange { state, n_states: n };
        if start >= n {
            return Err(out_of_range(start));
        }
        if n_ap > MAX_AP {
            return Err(ValidationError::UnknownLabelId { id: n_ap });
        }
        if pairs.is_empty() {
            return Err(ValidationError::NoAcceptancePairs);
        }
        for pair in &pairs {
            if let Some(&q) = pair.avoid.iter().chain(&pair.visit).find(|&&q| q >= n) {
                return Err(out_of_range(q));
            }
        }
        let letters = 1u32 << n_ap;
        let mut table = vec![0u32; n * letters as usize];
        for (q, guards) in transitions.iter().enumerate() {
            let line = state_lines.get(q).copied().unwrap_or(0);
            for (e, dst) in guards {
                if *dst >= n {
                    return Err(out_of_range(*dst));
                }
                if let Some(i) = e.max_ap() {
                    if i as usize >= n_ap {
                        return Err(ValidationError::UnknownLabelId { id: i as usize });
                    }
                }
            }
            for letter in 0..letters {
                let mut hits = guards.iter().filter(|(e, _)| e.eval(letter));
                match (hits.next(), hits.next()) {
                    (None, _) => {
                        return Err(ValidationError::Incomplete { line, state: q, letter });
                    }
                    (Some(_), Some(_)) => {
                        return Err(ValidationError::Nondeterministic { line, state: q, letter });
                    }
                    (Some((_, dst)), None) => {
                        table[(q << n_ap) | letter as usize] = *dst as u32;
                    }
                }
            }
        }
        let member = |sets: &[usize]| {
            let mut m = vec![false; n];
            for &q in sets {
                m[q] = true;
            }
            m
        };
        let in_avoid = pairs.iter().map(|p| member(&p.avoid)).collect();
        let in_visit = pairs.iter().map(|p| member(&p.visit)).collect();
        Ok(RabinAutomaton {
            n_states: n,
            start,
            ap_names,
            transitions,
            pairs,
            table,
            in_avoid,
            in_visit,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn ap_names(&self) -> &[String] {
        &self.ap_names
    }

    pub fn transitions(&self, q: usize) -> &[(LabelExpr, usize)] {
        &self.transitions[q]
    }

    pub fn pairs(&self) -> &[RabinPair] {
        &self.pairs
    }

    #[inline]
    pub fn step(&self, q: usize, letter: u32) -> usize {
        self.table[(q << self.ap_names.len()) | letter as usize] as usize
    }

    /// Whether a set of automaton states, visited infinitely often, is accepting.
    pub fn accepts_inf_set(&self, states: impl IntoIterator<Item = usize> + Clone) -> bool {
        (0..self.pairs.len()).any(|i| {
            let mut touches_visit = false;
            for q in states.clone() {
                if self.in_avoid[i][q] {
                    return false;
                }
                touches_visit |= self.in_visit[i][q];
            }
            touches_visit
        })
    }

    /// Runs the automaton on a finite word from the start state.
    pub fn run(&self, word: &[u32]) -> Vec<usize> {
        let mut q = self.start;
        let mut out = vec![q];
        for &l in word {
            q = self.step(q, l);
            out.push(q);
        }
        out
    }
}

/// Hand-built automata over a single proposition `a` (AP index 0).
pub mod library {
    use super::*;

    fn ap(name: &str) -> Vec<String> {
        vec![name.to_string()]
    }

    fn a() -> LabelExpr {
        LabelExpr::Ap(0)
    }

    fn not_a() -> LabelExpr {
        LabelExpr::Not(Box::new(a()))
    }

    /// One state, accepts every word.
    pub fn universal(name: &str) -> RabinAutomaton {
        RabinAutomaton::new(
            0,
            ap(name),
            vec![vec![(LabelExpr::True, 0)]],
            vec![RabinPair { avoid: vec![], visit: vec![0] }],
            &[],
        )
        .unwrap()
    }

    /// One state, accepts nothing.
    pub fn empty(name: &str) -> RabinAutomaton {
        RabinAutomaton::new(
            0,
            ap(name),
            vec![vec![(LabelExpr::True, 0)]],
            vec![RabinPair { avoid: vec![], visit: vec![] }],
            &[],
        )
        .unwrap()
    }

    /// Eventually `a`: waits in 0, moves to the accepting sink 1 on `a`.
    pub fn eventually(name: &str) -> RabinAutomaton {
        RabinAutomaton::new(
            0,
            ap(name),
            vec![vec![(not_a(), 0), (a(), 1)], vec![(LabelExpr::True, 1)]],
            vec![RabinPair { avoid: vec![], visit: vec![1] }],
            &[],
        )
        .unwrap()
    }

    /// Infinitely often `a`: state 1 is entered exactly on `a`-letters.
    pub fn infinitely_often(name: &str) -> RabinAutomaton {
        let guards = vec![(not_a(), 0), (a(), 1)];
        RabinAutomaton::new(
            0,
            ap(name),
            vec![guards.clone(), guards],
            vec![RabinPair { avoid: vec![], visit: vec![1] }],
            &[],
        )
        .unwrap()
    }

    /// Eventually always `a`: state 0 is entered exactly on non-`a` letters
    /// and must be seen finitely often.
    pub fn eventually_always(name: &str) -> RabinAutomaton {
        let guards = vec![(not_a(), 0), (a(), 1)];
        RabinAutomaton::new(
            0,
            ap(name),
            vec![guards.clone(), guards],
            vec![RabinPair { avoid: vec![0], visit: vec![1] }],
            &[],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and(a: LabelExpr, b: LabelExpr) -> LabelExpr {
        LabelExpr::And(Box::new(a), Box::new(b))
    }

    #[test]
    fn eval_examples() {
        let e = and(LabelExpr::Ap(0), LabelExpr::Not(Box::new(LabelExpr::Ap(1))));
        assert!(eval_label_expr(&e, &[0]));
        assert!(!eval_label_expr(&e, &[0, 1]));
        assert!(eval_label_expr(&LabelExpr::True, &[3]));
        let or = LabelExpr::Or(Box::new(LabelExpr::Ap(0)), Box::new(LabelExpr::Ap(1)));
        assert!(!eval_label_expr(&or, &[]));
    }

    #[test]
    fn eventually_trace() {
        let dra = library::eventually("goal");
        // letters: {} then {goal}
        assert_eq!(dra.run(&[0, 1]), vec![0, 0, 1]);
        assert!(dra.accepts_inf_set([1]));
        assert!(!dra.accepts_inf_set([0]));
    }

    #[test]
    fn acceptance_sets() {
        let dra = library::eventually_always("a");
        assert!(dra.accepts_inf_set([1]));
        assert!(!dra.accepts_inf_set([0, 1]));
        assert!(library::universal("a").accepts_inf_set([0]));
        assert!(!library::empty("a").accepts_inf_set([0]));
    }

    #[test]
    fn rejects_overlap_and_gaps() {
        let overlap = RabinAutomaton::new(
            0,
            vec!["a".into()],
            vec![vec![(LabelExpr::Ap(0), 0), (LabelExpr::True, 0)]],
            vec![RabinPair { avoid: vec![], visit: vec![0] }],
            &[7],
        );
        assert_eq!(
            overlap,
            Err(ValidationError::Nondeterministic { line: 7, state: 0, letter: 1 })
        );
        let gap = RabinAutomaton::new(
            0,
            vec!["a".into()],
            vec![vec![(LabelExpr::Ap(0), 0)]],
            vec![RabinPair { avoid: vec![], visit: vec![0] }],
            &[],
        );
        assert!(matches!(gap, Err(ValidationError::Incomplete { letter: 0, .. })));
    }
}
