//! Simulation report: empirical values for every reliability, secrecy and
//! uniformity condition the protocols promise.

use serde::{Deserialize, Serialize};

/// How leakage terms were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Exact conditional mutual information for the trial's codebook,
    /// obtained by posterior enumeration, averaged over trials.
    Exact,
    /// Empirical plug-in estimate from realized trial samples; biased at
    /// these sample sizes.
    PlugIn,
}

/// Leakage measurement policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakageMode {
    /// Exact where the enumeration fits the cap, plug-in otherwise.
    Auto,
    /// Force the plug-in estimate.
    PlugIn,
    /// Measure no leakage (error-rate-only runs).
    Skip,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeakageMetric {
    pub name: String,
    pub bits_per_use: f64,
    pub estimator: Estimator,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeyEntropyReport {
    pub key: String,
    /// Entropy of the empirical key histogram across trials, bits.
    pub empirical_bits: f64,
    pub per_use: f64,
    /// log2(label count)/n actually realized by the codebook.
    pub realized_rate: f64,
    /// Rate requested in the run configuration.
    pub nominal_rate: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ErrorRates {
    /// Common-key disagreement rate (either receiver), no-feedback only.
    pub k0: Option<f64>,
    pub k1: f64,
    pub k2: f64,
    /// Fraction of trials with any key error.
    pub total: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FailureCounts {
    pub covering: u64,
    pub packing_rx1: u64,
    pub packing_rx2: u64,
    pub receiver_rx1: u64,
    pub receiver_rx2: u64,
    pub recover: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub failed: bool,
    pub keys: Vec<u32>,
    pub estimates: Vec<Option<u32>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub protocol: String,
    pub trials: u64,
    pub n: usize,
    pub eps: f64,
    pub master_seed: u64,
    /// Realized label-space rates, log2(count)/n, in protocol order
    /// (no-feedback: rt0, rt1, rt2, r0, r1, r2; feedback: rp1, rp2, r1, r2).
    pub realized_rates: Vec<(String, f64)>,
    pub errors: ErrorRates,
    pub failures: FailureCounts,
    pub leakage: Vec<LeakageMetric>,
    pub leakage_skipped: bool,
    /// True when any leakage metric had to fall back to the plug-in
    /// estimator.
    pub bias_warning: bool,
    pub key_entropy: Vec<KeyEntropyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial_log: Option<Vec<TrialRecord>>,
}

/// Entropy in bits of a histogram of counts.
pub fn histogram_entropy(hist: &[u64]) -> f64 {
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let tf = total as f64;
    let mut h = 0.0;
    for &c in hist {
        if c > 0 {
            let p = c as f64 / tf;
            h -= p * p.log2();
        }
    }
    h
}

/// Options shared by both simulators.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SimOptions {
    pub leakage: LeakageMode,
    pub trial_log: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { leakage: LeakageMode::Auto, trial_log: false }
    }
}
