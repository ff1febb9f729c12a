//! Machine-readable verification results.

use serde::{Deserialize, Serialize};

use crate::runner::LengthStats;
use crate::stats::Decision;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Reach,
    Ltl,
    MeanPayoff,
    Baseline,
}

/// Interval for the mean payoff together with how it was assembled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpInterval {
    pub lo: f64,
    pub hi: f64,
    pub sample_mean: f64,
    pub statistical_half_width: f64,
    /// Half-width added for the per-path precision `mperr`.
    pub mperr: f64,
    /// Half-width added for the per-path error probability `delta`.
    pub delta: f64,
}

impl MpInterval {
    pub fn size(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Echo of the inputs that produced a report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pmin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mperr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_term: Option<f64>,
    /// `(p0, p1)` actually tested by the SPRT.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<(f64, f64)>,
    /// A-priori SPRT sample bound, reported as a diagnostic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_bound: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub property: Property,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decision: Option<Decision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<MpInterval>,
    pub n_samples: u64,
    pub mean_path_length: f64,
    pub max_path_length: u64,
    pub seed: u64,
    pub parameters: Parameters,
}

impl VerificationReport {
    pub fn new(property: Property, lengths: &LengthStats, seed: u64, parameters: Parameters) -> Self {
        VerificationReport {
            schema_version: SCHEMA_VERSION,
            property,
            decision: None,
            estimate: None,
            interval: None,
            n_samples: lengths.n,
            mean_path_length: lengths.mean(),
            max_path_length: lengths.max,
            seed,
            parameters,
        }
    }
}
