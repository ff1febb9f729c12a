//! Wald's sequential probability ratio test, the indifference-region
//! narrowings for observables with bounded per-path error, and Hoeffding
//! intervals for bounded samples.

use serde::{Deserialize, Serialize};

use crate::error::SmcError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    /// Probability at least the upper bound of the indifference region.
    #[serde(rename = "H0")]
    AcceptH0,
    /// Probability at most the lower bound of the indifference region.
    #[serde(rename = "H1")]
    AcceptH1,
}

/// Sequential test between `H0: q >= p0` and `H1: q <= p1` (`p1 < p0`) on a
/// Bernoulli parameter `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SprtSession {
    p0: f64,
    p1: f64,
    /// log-likelihood increment (H1 over H0) of observing 1 and 0
    step_one: f64,
    step_zero: f64,
    accept_h1_at: f64,
    accept_h0_at: f64,
    llr: f64,
    n_samples: u64,
    decision: Option<Decision>,
}

impl SprtSession {
    pub fn new(p0: f64, p1: f64, alpha: f64, beta: f64) -> Result<Self, SmcError> {
        let in_unit = |x: f64| x > 0.0 && x < 1.0;
        if !(in_unit(p0) && in_unit(p1) && p1 < p0) {
            return Err(SmcError::InvalidParameter(format!(
                "SPRT needs 0 < p1 < p0 < 1, got p0 = {p0}, p1 = {p1}"
            )));
        }
        if !(in_unit(alpha) && in_unit(beta)) {
            return Err(SmcError::InvalidParameter(format!(
                "SPRT strengths must lie in (0, 1), got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(SprtSession {
            p0,
            p1,
            step_one: (p1 / p0).ln(),
            step_zero: ((1.0 - p1) / (1.0 - p0)).ln(),
            accept_h1_at: ((1.0 - beta) / alpha).ln(),
            accept_h0_at: (beta / (1.0 - alpha)).ln(),
            llr: 0.0,
            n_samples: 0,
            decision: None,
        })
    }

    /// Adds one observation; ignored once the test has decided.
    pub fn feed(&mut self, x: bool) -> Option<Decision> {
        if self.decision.is_some() {
            return self.decision;
        }
        self.llr += if x { self.step_one } else { self.step_zero };
        self.n_samples += 1;
        if self.llr >= self.accept_h1_at {
            self.decision = Some(Decision::AcceptH1);
        } else if self.llr <= self.accept_h0_at {
            self.decision = Some(Decision::AcceptH0);
        }
        self.decision
    }

    pub fn decision(&self) -> Option<Decision> {
        self.decision
    }

    pub fn llr(&self) -> f64 {
        self.llr
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }
}

/// Threshold `p`, indifference radius `epsilon`, strengths `alpha`/`beta`,
/// and the per-path error budget `delta < epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSpec {
    pub p: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

impl HypothesisSpec {
    pub fn new(p: f64, epsilon: f64, alpha: f64, beta: f64, delta: f64) -> Result<Self, SmcError> {
        let spec = HypothesisSpec {
            p,
            epsilon,
            alpha,
            beta,
            delta,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Uses `delta = epsilon / 2`.
    pub fn with_default_delta(p: f64, epsilon: f64, alpha: f64, beta: f64) -> Result<Self, SmcError> {
        Self::new(p, epsilon, alpha, beta, epsilon / 2.0)
    }

    pub fn validate(&self) -> Result<(), SmcError> {
        let bad = |msg: String| Err(SmcError::InvalidParameter(msg));
        if !(self.epsilon > 0.0 && self.p - self.epsilon > 0.0 && self.p + self.epsilon < 1.0) {
            return bad(format!(
                "indifference region [{} - {e}, {} + {e}] must lie strictly inside (0, 1)",
                self.p,
                self.p,
                e = self.epsilon
            ));
        }
        if !(self.delta > 0.0 && self.delta < self.epsilon) {
            return bad(format!(
                "delta = {} must satisfy 0 < delta < epsilon = {}",
                self.delta, self.epsilon
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0 && self.beta > 0.0 && self.beta < 1.0) {
            return bad(format!(
                "alpha = {} and beta = {} must lie in (0, 1)",
                self.alpha, self.beta
            ));
        }
        Ok(())
    }

    /// `(p + (ε - δ), p - ε)`: the one-sided narrowing for observables that
    /// may only under-report.
    pub fn reach_hypotheses(&self) -> (f64, f64) {
        (self.p + (self.epsilon - self.delta), self.p - self.epsilon)
    }

    /// `(p + (ε - δ), p - (ε - δ))`: the symmetric narrowing for observables
    /// with two-sided error.
    pub fn ltl_hypotheses(&self) -> (f64, f64) {
        let w = self.epsilon - self.delta;
        (self.p + w, self.p - w)
    }

    pub fn reach_session(&self) -> SprtSession {
        let (p0, p1) = self.reach_hypotheses();
        SprtSession::new(p0, p1, self.alpha, self.beta).expect("validated spec")
    }

    pub fn ltl_session(&self) -> SprtSession {
        let (p0, p1) = self.ltl_hypotheses();
        SprtSession::new(p0, p1, self.alpha, self.beta).expect("validated spec")
    }

    /// A-priori bound on the number of SPRT samples, evaluated with `δ = ε/2`.
    pub fn sim_bound(&self) -> f64 {
        sim_bound(self.p, self.epsilon, self.alpha, self.beta)
    }
}

/// `|log(β/(1-α)) · log((1-β)/α)| / |log((p-ε+δ)/(p+ε-δ)) · log((1-p-ε+δ)/(1-p+ε-δ))|`
/// with `δ = ε/2`.
pub fn sim_bound(p: f64, epsilon: f64, alpha: f64, beta: f64) -> f64 {
    let delta = epsilon / 2.0;
    let num = (beta / (1.0 - alpha)).ln() * ((1.0 - beta) / alpha).ln();
    let den = ((p - epsilon + delta) / (p + epsilon - delta)).ln()
        * ((1.0 - p - epsilon + delta) / (1.0 - p + epsilon - delta)).ln();
    (num / den).abs()
}

/// Hoeffding half-width `sqrt(ln(2/α) / (2n))` for samples in `[0, 1]`.
pub fn hoeffding_half_width(n: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Smallest sample count whose Hoeffding half-width is at most `half_width`.
pub fn hoeffding_samples(half_width: f64, alpha: f64) -> u64 {
    ((2.0 / alpha).ln() / (2.0 * half_width * half_width)).ceil() as u64
}

/// Two-sided `1 - α` interval for the mean of samples in `[0, 1]`, clamped to `[0, 1]`.
pub fn hoeffding_ci(samples: &[f64], alpha: f64) -> (f64, f64) {
    assert!(!samples.is_empty(), "need at least one sample");
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let h = hoeffding_half_width(samples.len() as u64, alpha);
    ((mean - h).max(0.0), (mean + h).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn llr_increments() {
        let mut s = SprtSession::new(0.6, 0.4, 0.01, 0.01).unwrap();
        s.feed(true);
        assert!((s.llr() - (0.4f64 / 0.6).ln()).abs() < 1e-15);
        assert!((s.llr() + 0.405_465_108_108_164_4).abs() < 1e-12);
        let mut s = SprtSession::new(0.6, 0.4, 0.01, 0.01).unwrap();
        s.feed(false);
        assert!((s.llr() - 0.405_465_108_108_164_4).abs() < 1e-12);
    }

    #[test]
    fn decisions() {
        let s = SprtSession::new(0.6, 0.4, 0.01, 0.01).unwrap();
        assert_eq!(s.decision(), None);
        let mut s = SprtSession::new(0.9, 0.1, 0.01, 0.01).unwrap();
        assert_eq!(s.feed(false), None);
        assert_eq!(s.feed(false), None);
        // 3 ln 9 = 6.59 >= ln 99 = 4.595
        assert_eq!(s.feed(false), Some(Decision::AcceptH1));
        assert_eq!(s.feed(true), Some(Decision::AcceptH1));
        assert_eq!(s.n_samples(), 3);
    }

    #[test]
    fn narrowings() {
        let spec = HypothesisSpec::new(0.5, 0.01, 0.01, 0.01, 0.001).unwrap();
        let (p0, p1) = spec.reach_hypotheses();
        assert!((p0 - 0.509).abs() < 1e-12 && (p1 - 0.49).abs() < 1e-12);
        let (q0, q1) = spec.ltl_hypotheses();
        assert!((q0 - 0.509).abs() < 1e-12 && (q1 - 0.491).abs() < 1e-12);
        assert_eq!(p0, q0);
        let tiny = HypothesisSpec::new(0.5, 0.01, 0.01, 0.01, 1e-15).unwrap();
        let (a, b) = tiny.reach_hypotheses();
        assert!((a - 0.51).abs() < 1e-12 && (b - 0.49).abs() < 1e-12);
        assert!(HypothesisSpec::new(0.5, 0.01, 0.01, 0.01, 0.01).is_err());
        assert!(HypothesisSpec::new(0.995, 0.01, 0.01, 0.01, 0.001).is_err());
    }

    #[test]
    fn sim_bound_properties() {
        let v = sim_bound(0.5, 0.02, 0.01, 0.01);
        assert!(v.is_finite() && v > 0.0);
        // same ratio in base 2
        let d = 0.01f64;
        let num = (0.01f64 / 0.99).log2() * (0.99f64 / 0.01).log2();
        let den = ((0.5 - 0.02 + d) / (0.5 + 0.02 - d)).log2()
            * ((1.0 - 0.5 - 0.02 + d) / (1.0 - 0.5 + 0.02 - d)).log2();
        assert!((v - (num / den).abs()).abs() < 1e-9 * v);
        for p in [0.2, 0.37, 0.5] {
            let a = sim_bound(p, 0.05, 0.01, 0.02);
            let b = sim_bound(1.0 - p, 0.05, 0.01, 0.02);
            assert!((a - b).abs() < 1e-9 * a);
        }
        let sweep: Vec<f64> = [0.05, 0.02, 0.01]
            .iter()
            .map(|&e| sim_bound(0.5, e, 0.01, 0.01))
            .collect();
        assert!(sweep[0] < sweep[1] && sweep[1] < sweep[2]);
    }

    #[test]
    fn hoeffding() {
        let (lo, hi) = hoeffding_ci(&[0.5], 0.05);
        assert_eq!((lo, hi), (0.0, 1.0));
        assert!((hoeffding_half_width(1, 0.05) - 1.358_1).abs() < 1e-4);
        let many = vec![0.3; 1_000_000];
        let (lo, hi) = hoeffding_ci(&many, 0.05);
        assert!(hi - lo < 0.003 && lo < 0.3 && hi > 0.3);
        assert_eq!(hoeffding_samples(0.019, 0.05), 5110);
    }

    #[test]
    fn hoeffding_coverage() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let reps = 1000;
        let mut covered = 0;
        for _ in 0..reps {
            let xs: Vec<f64> = (0..50).map(|_| rng.gen::<f64>().powi(3)).collect();
            let (lo, hi) = hoeffding_ci(&xs, 0.05);
            if lo <= 0.25 && 0.25 <= hi {
                covered += 1;
            }
        }
        let sigma = (0.95f64 * 0.05 / reps as f64).sqrt();
        assert!(covered as f64 / reps as f64 >= 0.95 - 3.0 * sigma);
    }

    fn run_session(truth: f64, p0: f64, p1: f64, alpha: f64, beta: f64, rng: &mut ChaCha8Rng) -> Decision {
        let mut s = SprtSession::new(p0, p1, alpha, beta).unwrap();
        loop {
            if let Some(d) = s.feed(rng.gen_bool(truth)) {
                return d;
            }
        }
    }

    #[test]
    fn wald_strength_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sessions = 10_000;
        for &(p0, p1, alpha, beta) in &[(0.6, 0.4, 0.01, 0.01), (0.55, 0.45, 0.05, 0.1), (0.3, 0.2, 0.1, 0.05)] {
            let type1 = (0..sessions)
                .filter(|_| run_session(p0, p0, p1, alpha, beta, &mut rng) == Decision::AcceptH1)
                .count() as f64
                / sessions as f64;
            let type2 = (0..sessions)
                .filter(|_| run_session(p1, p0, p1, alpha, beta, &mut rng) == Decision::AcceptH0)
                .count() as f64
                / sessions as f64;
            let s1 = (alpha * (1.0 - alpha) / sessions as f64).sqrt();
            let s2 = (beta * (1.0 - beta) / sessions as f64).sqrt();
            assert!(type1 <= alpha + 3.0 * s1, "type I {type1} for {p0}/{p1}");
            assert!(type2 <= beta + 3.0 * s2, "type II {type2} for {p0}/{p1}");
        }
    }

    proptest! {
        #[test]
        fn balanced_stream_cancels(n in 1usize..200) {
            let mut s = SprtSession::new(0.7, 0.3, 1e-9, 1e-9).unwrap();
            for _ in 0..n {
                s.feed(true);
                s.feed(false);
            }
            prop_assert!(s.llr().abs() < 1e-9);
        }

        #[test]
        fn decisions_are_terminal(bits in proptest::collection::vec(any::<bool>(), 1..400)) {
            let mut s = SprtSession::new(0.6, 0.4, 0.05, 0.05).unwrap();
            let mut first = None;
            for b in bits {
                let d = s.feed(b);
                if first.is_some() {
                    prop_assert_eq!(d, first);
                }
                first = d;
            }
        }
    }
}
