//! Small statistics helpers: means, standard errors, batched means.

use thiserror::Error;

/// Smallest number of batches for a batched-means error bar.
pub const MIN_BATCHES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {min} batches, got {got}")]
    InsufficientSamples { got: usize, min: usize },
}

/// A point estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(mean: f64) -> Self {
        Estimate { mean, stderr: 0.0 }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Mean and standard error of independent samples.
pub fn mean_stderr(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    Estimate {
        mean: mean(xs),
        stderr: (variance(xs) / n).sqrt(),
    }
}

/// Batched-means estimate of a correlated time series. Trailing samples
/// that do not fill a batch are dropped.
pub fn batched_means(xs: &[f64], batches: usize) -> Result<Estimate, StatsError> {
    if batches < MIN_BATCHES || xs.len() < batches {
        return Err(StatsError::InsufficientSamples {
            got: batches.min(xs.len()),
            min: MIN_BATCHES,
        });
    }
    let b = xs.len() / batches;
    let means: Vec<f64> = xs.chunks_exact(b).take(batches).map(mean).collect();
    Ok(mean_stderr(&means))
}

/// Integrated autocorrelation time from batched means,
/// `τ ≈ b·Var(batch means) / (2·Var(x))`, floored at 1/2.
pub fn autocorr_time(xs: &[f64], batches: usize) -> f64 {
    let var = variance(xs);
    if var == 0.0 || xs.len() < 2 * batches {
        return 0.5;
    }
    let b = xs.len() / batches;
    let means: Vec<f64> = xs.chunks_exact(b).take(batches).map(mean).collect();
    (b as f64 * variance(&means) / (2.0 * var)).max(0.5)
}

/// Median of a sample (mean of the two central values for even sizes).
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
