//! Stationary centered Gaussian fields sampled at grid nodes.

mod bargmann_fock;
mod covariance;
mod kernel;
mod spectral;

pub use bargmann_fock::{
    bf_tail_variance, required_truncation, sample_bargmann_fock, BargmannFock,
    DEFAULT_TAIL_TOLERANCE,
};
pub use covariance::empirical_covariance;
pub use kernel::KernelSpec;
pub use spectral::{
    embedding_spectrum, sample_stationary_spectral, SpectralSampler, CLIP_TOLERANCE,
};

/// `ln(k!)`: exact summation for small `k`, Stirling series above.
pub(crate) fn ln_factorial(k: usize) -> f64 {
    if k < 32 {
        (2..=k).map(|i| (i as f64).ln()).sum()
    } else {
        let n = k as f64 + 1.0;
        // ln Gamma(n) with the 1/(12n) - 1/(360n^3) + 1/(1260 n^5) corrections
        (n - 0.5) * n.ln() - n + 0.5 * std::f64::consts::TAU.ln() + 1.0 / (12.0 * n)
            - 1.0 / (360.0 * n.powi(3))
            + 1.0 / (1260.0 * n.powi(5))
    }
}

#[cfg(test)]
mod tests {
    use super::ln_factorial;

    #[test]
    fn ln_factorial_matches_direct_sum() {
        for k in [0usize, 1, 5, 31, 32, 33, 100, 1000] {
            let direct: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
            assert!((ln_factorial(k) - direct).abs() < 1e-10 * direct.max(1.0), "k={k}");
        }
    }
}
