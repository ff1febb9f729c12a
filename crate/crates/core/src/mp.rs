//! Mean payoff: each path runs until its candidate is confirmed and has been
//! observed long enough to estimate the transition probabilities inside it,
//! then reports the mean payoff of the estimated component.

use crate::chain::MarkovChain;
use crate::error::{SingularSystem, SmcError};
use crate::linalg::stationary_dense;
use crate::monitor::{required_occurrences, CandidateTracker, TransitionCounts};
use crate::reach::check_pmin;
use crate::report::{MpInterval, Parameters, Property, VerificationReport};
use crate::runner::{run_fixed, LengthStats, RunConfig};
use crate::stats::{hoeffding_half_width, hoeffding_samples};

/// Precision of the transition estimates that keeps the mean payoff of a
/// component of `k_size` states within relative error `mperr`.
pub fn trerr_from_mperr(mperr: f64, pmin: f64, k_size: usize) -> f64 {
    pmin * ((1.0 + mperr).powf(1.0 / (2.0 * k_size as f64)) - 1.0)
}

/// Occurrences per state after which all `k_size²` estimates are within
/// `trerr` except with probability `delta / 2`.
pub fn k_from_trerr(k_size: usize, delta: f64, trerr: f64) -> f64 {
    let k = k_size as f64;
    ((2.0 * k * k).ln() - (delta / 2.0).ln()) / (2.0 * trerr * trerr)
}

/// Maximum-likelihood transition matrix from observed counts.
pub fn estimate_transitions(counts: &TransitionCounts) -> Result<Vec<Vec<f64>>, SmcError> {
    counts
        .counts
        .iter()
        .zip(&counts.states)
        .map(|(row, &state)| {
            let total: u64 = row.iter().sum();
            if total == 0 {
                return Err(SmcError::UnobservedState(state));
            }
            Ok(row.iter().map(|&c| c as f64 / total as f64).collect())
        })
        .collect()
}

/// Long-run average reward of an irreducible chain.
pub fn mp_of_bscc(p: &[Vec<f64>], rewards: &[f64]) -> Result<f64, SingularSystem> {
    let pi = stationary_dense(p)?;
    let v: f64 = pi.iter().zip(rewards).map(|(a, r)| a * r).sum();
    Ok(v.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpSample {
    pub value: f64,
    pub bscc_size: usize,
    pub path_length: u64,
}

#[derive(Debug, Clone)]
pub struct MpSampler<'a> {
    pub chain: &'a MarkovChain,
    pub pmin: f64,
    pub mperr: f64,
    pub delta: f64,
    pub max_steps: u64,
}

impl<'a> MpSampler<'a> {
    pub fn new(chain: &'a MarkovChain, pmin: f64, mperr: f64, delta: f64) -> Self {
        MpSampler {
            chain,
            pmin,
            mperr,
            delta,
            max_steps: crate::runner::DEFAULT_MAX_STEPS,
        }
    }

    pub fn tracker(&self, check_bound: u64) -> CandidateTracker {
        CandidateTracker::new(Some(self.chain.n_states()), check_bound)
    }

    /// Occurrences required of the `i`-th candidate of size `k_size`: enough
    /// for detection at `δ/2` and for the transition estimates.
    pub fn required(&self, i: u32, k_size: usize) -> u64 {
        let detect = required_occurrences(i, self.delta / 2.0, self.pmin);
        let trerr = trerr_from_mperr(self.mperr, self.pmin, k_size);
        let estimate = k_from_trerr(k_size, self.delta, trerr).ceil();
        let estimate = if estimate >= u64::MAX as f64 { u64::MAX } else { estimate as u64 };
        detect.max(estimate)
    }

    pub fn sample(
        &self,
        tracker: &mut CandidateTracker,
        master_seed: u64,
        path_index: u64,
    ) -> Result<MpSample, SmcError> {
        tracker.clear();
        let mut path = self.chain.sampler(master_seed, path_index);
        let mut cached = (0u32, 0u64);
        loop {
            tracker.advance(path.next_state() as u64);
            if tracker.has_candidate() {
                let i = tracker.candidate_index();
                if i != cached.0 {
                    cached = (i, self.required(i, tracker.candidate_size()));
                }
                if tracker.strong_k_holds(cached.1) {
                    let counts = tracker.transition_counts().ok_or(SmcError::NoCandidate)?;
                    let p = estimate_transitions(&counts)?;
                    let r: Vec<f64> = counts.states.iter().map(|&s| self.chain.rewards()[s as usize]).collect();
                    return Ok(MpSample {
                        value: mp_of_bscc(&p, &r)?,
                        bscc_size: counts.states.len(),
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

/// One mean-payoff observation on path `(master_seed, path_index)`.
pub fn single_path_mp(
    chain: &MarkovChain,
    pmin: f64,
    mperr: f64,
    delta: f64,
    check_bound: u64,
    master_seed: u64,
    path_index: u64,
) -> Result<MpSample, SmcError> {
    let sampler = MpSampler::new(chain, pmin, mperr, delta);
    sampler.sample(&mut sampler.tracker(check_bound), master_seed, path_index)
}

/// How many paths `estimate_mp` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleCount {
    Fixed(u64),
    /// Smallest count whose widened interval has at most this total size.
    TargetSize(f64),
}

impl SampleCount {
    pub fn resolve(self, alpha: f64, mperr: f64, delta: f64) -> Result<u64, SmcError> {
        match self {
            SampleCount::Fixed(0) => Err(SmcError::InvalidParameter("need at least one sample".into())),
            SampleCount::Fixed(n) => Ok(n),
            SampleCount::TargetSize(w) => {
                let h = w / 2.0 - mperr - delta;
                if !(h > 0.0) {
                    return Err(SmcError::InvalidParameter(format!(
                        "interval size {w} leaves no room beyond 2(mperr + delta) = {}",
                        2.0 * (mperr + delta)
                    )));
                }
                Ok(hoeffding_samples(h, alpha))
            }
        }
    }
}

/// Hoeffding interval on the sample values widened by `mperr + delta` on
/// both sides and clamped to `[0, 1]`.
pub fn widened_interval(values: &[f64], alpha: f64, mperr: f64, delta: f64) -> MpInterval {
    let n = values.len() as u64;
    let mean = values.iter().sum::<f64>() / n as f64;
    let h = hoeffding_half_width(n, alpha);
    MpInterval {
        lo: (mean - h - mperr - delta).max(0.0),
        hi: (mean + h + mperr + delta).min(1.0),
        sample_mean: mean,
        statistical_half_width: h,
        mperr,
        delta,
    }
}

/// Estimates the mean payoff of `chain` under its rewards with confidence
/// `1 - alpha`.
pub fn estimate_mp(
    chain: &MarkovChain,
    alpha: f64,
    mperr: f64,
    delta: f64,
    pmin: f64,
    count: SampleCount,
    cfg: &RunConfig,
) -> Result<VerificationReport, SmcError> {
    for (name, v) in [("alpha", alpha), ("delta", delta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(SmcError::InvalidParameter(format!("{name} = {v} outside (0, 1)")));
        }
    }
    if !(mperr > 0.0 && mperr.is_finite()) {
        return Err(SmcError::InvalidParameter(format!("mperr = {mperr} must be positive")));
    }
    check_pmin(chain, pmin)?;
    let n = count.resolve(alpha, mperr, delta)?;
    let mut sampler = MpSampler::new(chain, pmin, mperr, delta);
    sampler.max_steps = cfg.max_steps;
    let samples = run_fixed(
        cfg.threads,
        n,
        || sampler.tracker(cfg.check_bound),
        |tracker, i| sampler.sample(tracker, cfg.master_seed, i),
    )?;
    let mut lengths = LengthStats::default();
    for s in &samples {
        lengths.push(s.path_length);
    }
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();
    let interval = widened_interval(&values, alpha, mperr, delta);
    let params = Parameters {
        alpha,
        delta: Some(delta),
        pmin: Some(pmin),
        mperr: Some(mperr),
        check_bound: Some(cfg.check_bound),
        max_steps: Some(cfg.max_steps),
        ..Parameters::default()
    };
    let mut report = VerificationReport::new(Property::MeanPayoff, &lengths, cfg.master_seed, params);
    report.estimate = Some(interval.sample_mean);
    report.interval = Some(interval);
    Ok(report)
}
