//! Monte-Carlo summaries: sample means with standard errors, Wilson intervals.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Where the replicas of an estimate came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub master: u64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(replicas)`.
    pub stderr: f64,
    pub replicas: usize,
    pub ci_low: f64,
    pub ci_high: f64,
    pub provenance: Option<Provenance>,
}

impl Estimate {
    /// Mean of independent samples with a normal 95% interval.
    ///
    /// A single sample yields stderr 0.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        assert!(n > 0, "estimate needs at least one sample");
        // Equal samples are reported exactly rather than through a rounded sum.
        let mean = if samples.iter().all(|&x| x == samples[0]) {
            samples[0]
        } else {
            samples.iter().sum::<f64>() / n as f64
        };
        let stderr = if n > 1 {
            let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            stderr,
            replicas: n,
            ci_low: mean - Z95 * stderr,
            ci_high: mean + Z95 * stderr,
            provenance: None,
        }
    }

    /// Proportion of successes with a Wilson 95% interval. The stderr is
    /// the sample standard deviation of the 0/1 outcomes over `sqrt(n)`.
    pub fn proportion(successes: usize, trials: usize) -> Self {
        assert!(trials > 0 && successes <= trials);
        let n = trials as f64;
        let p = successes as f64 / n;
        let stderr = if trials > 1 {
            (p * (1.0 - p) / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let (lo, hi) = wilson(successes, trials, Z95);
        Self {
            mean: p,
            stderr,
            replicas: trials,
            ci_low: lo,
            ci_high: hi,
            provenance: None,
        }
    }

    /// Deterministic value with zero uncertainty.
    pub fn exact(value: f64, replicas: usize) -> Self {
        Self {
            mean: value,
            stderr: 0.0,
            replicas,
            ci_low: value,
            ci_high: value,
            provenance: None,
        }
    }

    pub fn with_provenance(mut self, master: u64, label: impl Into<String>) -> Self {
        self.provenance = Some(Provenance {
            master,
            label: label.into(),
        });
        self
    }

    pub fn ci_contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }

    /// `|self - other| / sqrt(se1^2 + se2^2)`; infinite when both are exact and differ.
    pub fn z_distance(&self, other: &Estimate) -> f64 {
        let d = (self.mean - other.mean).abs();
        let s = (self.stderr.powi(2) + other.stderr.powi(2)).sqrt();
        if s == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / s
        }
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}
