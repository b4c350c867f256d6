use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Covariance kernel `κ` of a stationary field, normalized so that `κ(0) = 1`.
///
/// All kinds are radial, hence symmetric under `x -> -x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelSpec {
    /// `exp(-|x|^2 / (2 l^2))`; `length = 1` is the Bargmann-Fock covariance.
    Gaussian { length: f64 },
    /// 1 at lag zero, 0 at every nonzero lag: white noise on the grid.
    Delta,
    /// Radial profile sampled every `step`, linearly interpolated, zero past the end.
    Tabulated { step: f64, values: Vec<f64> },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Gaussian { length } => {
                if !(*length > 0.0 && length.is_finite()) {
                    return Err(Error::param("kernel.length", "must be > 0"));
                }
            }
            KernelSpec::Delta => {}
            KernelSpec::Tabulated { step, values } => {
                if !(*step > 0.0 && step.is_finite()) {
                    return Err(Error::param("kernel.step", "must be > 0"));
                }
                match values.first() {
                    Some(v0) if *v0 > 0.0 => {}
                    _ => return Err(Error::param("kernel.values", "first value must be > 0")),
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::param("kernel.values", "must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Kernel value at Euclidean distance `r`.
    pub fn at_distance(&self, r: f64) -> f64 {
        match self {
            KernelSpec::Gaussian { length } => (-0.5 * (r / length).powi(2)).exp(),
            KernelSpec::Delta => {
                if r == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            KernelSpec::Tabulated { step, values } => {
                let s = r / step;
                let k = s.floor() as usize;
                if k + 1 >= values.len() {
                    return if k + 1 == values.len() && s == k as f64 {
                        values[k] / values[0]
                    } else {
                        0.0
                    };
                }
                let t = s - k as f64;
                ((1.0 - t) * values[k] + t * values[k + 1]) / values[0]
            }
        }
    }

    /// Distance beyond which the kernel is below f64 resolution (or zero).
    pub fn support_radius(&self) -> f64 {
        match self {
            KernelSpec::Gaussian { length } => 8.5 * length,
            KernelSpec::Delta => 0.0,
            KernelSpec::Tabulated { step, values } => step * values.len() as f64,
        }
    }

    pub fn at(&self, x: &[f64]) -> f64 {
        self.at_distance(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_and_symmetric() {
        let kernels = [
            KernelSpec::Gaussian { length: 1.5 },
            KernelSpec::Delta,
            KernelSpec::Tabulated {
                step: 0.5,
                values: vec![2.0, 1.0, 0.5],
            },
        ];
        for k in &kernels {
            k.validate().unwrap();
            assert_eq!(k.at(&[0.0, 0.0]), 1.0);
            for x in [[0.3, -0.7], [1.2, 0.1], [-0.25, 0.0]] {
                assert_eq!(k.at(&x), k.at(&[-x[0], -x[1]]));
            }
        }
    }

    #[test]
    fn tabulated_interpolates() {
        let k = KernelSpec::Tabulated {
            step: 1.0,
            values: vec![4.0, 2.0, 1.0],
        };
        assert_eq!(k.at_distance(0.5), 0.75);
        assert_eq!(k.at_distance(2.0), 0.25);
        assert_eq!(k.at_distance(2.5), 0.0);
    }

    #[test]
    fn invalid_kernels_rejected() {
        assert!(KernelSpec::Gaussian { length: 0.0 }.validate().is_err());
        assert!(KernelSpec::Tabulated {
            step: 1.0,
            values: vec![0.0]
        }
        .validate()
        .is_err());
    }
}
