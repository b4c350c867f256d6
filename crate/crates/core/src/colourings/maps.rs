use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed vocabulary of monotone maps used as ψ (Gaussian ψ-densities) and
/// φ (conformal factors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MonotoneMap {
    /// `1` on `(0, ∞)`, `0` elsewhere.
    Indicator,
    /// `max(x, 0)`.
    PositivePart,
    Exp,
    /// `clamp(offset + slope * x, min, max)`.
    AffineClamped {
        offset: f64,
        slope: f64,
        min: f64,
        max: f64,
    },
    Constant {
        value: f64,
    },
}

/// Probe abscissae, increasing.
fn probes() -> Vec<f64> {
    let mut xs: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.25).collect();
    xs.extend([-1e-9, 1e-9, -1e-3, 1e-3, -50.0, 50.0]);
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    xs
}

impl MonotoneMap {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            MonotoneMap::Indicator => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            MonotoneMap::PositivePart => x.max(0.0),
            MonotoneMap::Exp => x.exp(),
            MonotoneMap::AffineClamped {
                offset,
                slope,
                min,
                max,
            } => (offset + slope * x).clamp(min, max),
            MonotoneMap::Constant { value } => value,
        }
    }

    fn name(&self) -> String {
        format!("{self:?}")
    }

    fn check_shape(&self) -> Result<()> {
        if let MonotoneMap::AffineClamped { min, max, .. } = *self {
            if !(min <= max) {
                return Err(Error::param("map.min", "min must not exceed max"));
            }
        }
        let xs = probes();
        let mut prev = f64::NEG_INFINITY;
        for &x in &xs {
            let y = self.eval(x);
            if y.is_nan() || y < 0.0 {
                return Err(Error::MapCondition {
                    map: self.name(),
                    condition: "nonnegativity",
                    at: x,
                });
            }
            if y < prev {
                return Err(Error::MapCondition {
                    map: self.name(),
                    condition: "monotonicity",
                    at: x,
                });
            }
            prev = y;
        }
        Ok(())
    }

    /// ψ conditions: nondecreasing and `ψ(x) > 0 ⟺ x > 0` on the probe set.
    pub fn validate_psi(&self) -> Result<()> {
        self.check_shape()?;
        for x in probes() {
            if (self.eval(x) > 0.0) != (x > 0.0) {
                return Err(Error::MapCondition {
                    map: self.name(),
                    condition: "flat negative sea (psi > 0 iff x > 0)",
                    at: x,
                });
            }
        }
        Ok(())
    }

    /// φ conditions: continuous, strictly positive, nondecreasing on the probe set.
    pub fn validate_phi(&self) -> Result<()> {
        self.check_shape()?;
        if let MonotoneMap::Indicator = self {
            return Err(Error::MapCondition {
                map: self.name(),
                condition: "continuity",
                at: 0.0,
            });
        }
        for x in probes() {
            let y = self.eval(x);
            if !(y > 0.0 && y.is_finite()) {
                return Err(Error::MapCondition {
                    map: self.name(),
                    condition: "strict positivity",
                    at: x,
                });
            }
        }
        Ok(())
    }
}
