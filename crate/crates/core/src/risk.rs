//! Empirical CVaR estimation and the decreasing per-episode sampling
//! schedule used by the risk-averse market experiment.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RiskError {
    #[error("CVaR of an empty sample set is undefined")]
    EmptySamples,
    #[error("risk level must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("sampling schedule needs n0 >= 1 and exponent >= 0")]
    InvalidSchedule,
}

/// Empirical conditional value at risk at level `alpha`.
///
/// Costs are "worst = largest": the estimate is the mean of the top
/// `ceil(alpha * n)` samples. `alpha = 1` is the sample mean. The boundary
/// sample is included fully rather than fractionally, which biases small-`n`
/// estimates slightly upward.
pub fn cvar_empirical(samples: &[f64], alpha: f64) -> Result<f64, RiskError> {
    if samples.is_empty() {
        return Err(RiskError::EmptySamples);
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(RiskError::InvalidAlpha(alpha));
    }
    let n = samples.len();
    let k = ((alpha * n as f64).ceil() as usize).clamp(1, n);
    if k == n {
        return Ok(samples.iter().sum::<f64>() / n as f64);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(sorted[..k].iter().sum::<f64>() / k as f64)
}

/// CVaR estimator with a fixed risk level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvarEstimator {
    alpha: f64,
}

impl CvarEstimator {
    pub fn new(alpha: f64) -> Result<Self, RiskError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(RiskError::InvalidAlpha(alpha));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn estimate(&self, samples: &[f64]) -> Result<f64, RiskError> {
        cvar_empirical(samples, self.alpha)
    }
}

/// Sample count at episode `t`: `max(1, ceil(n0 * t^{-exponent}))`,
/// non-increasing in `t`.
pub fn sampling_schedule(n0: u64, t: u64, exponent: f64) -> u64 {
    let raw = n0 as f64 * (t as f64).powf(-exponent);
    (raw.ceil() as u64).max(1)
}

/// Power-law sampling schedule `n_t = max(1, ceil(n0 * t^{-exponent}))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSchedule {
    pub n0: u64,
    pub exponent: f64,
}

impl SamplingSchedule {
    pub fn new(n0: u64, exponent: f64) -> Result<Self, RiskError> {
        if n0 < 1 || exponent < 0.0 || !exponent.is_finite() {
            return Err(RiskError::InvalidSchedule);
        }
        Ok(Self { n0, exponent })
    }

    pub fn samples_at(&self, t: u64) -> u64 {
        sampling_schedule(self.n0, t, self.exponent)
    }
}

impl Default for SamplingSchedule {
    fn default() -> Self {
        Self { n0: 200, exponent: 0.5 }
    }
}
