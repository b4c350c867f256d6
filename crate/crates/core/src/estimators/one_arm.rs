use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{ModelSpec, Sampling};
use crate::error::{Error, Result};
use crate::metric::{annulus_zero_crossing, AnnulusSpec};
use crate::stats::{Estimate, Z95};

/// Inner radius of the one-arm annuli `A_R = A(1, R)`.
pub const ONE_ARM_INNER: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneArmCurve {
    /// `(R, P[zero-time crossing of A(1, R)])`.
    pub points: Vec<(f64, Estimate)>,
    /// Decay exponent fitted over the requested window, when the fit is possible.
    pub exponent: Option<Estimate>,
    /// Why the fit was refused, if it was.
    pub fit_note: Option<String>,
}

/// One-arm probabilities `P[Cross₀(A(1, R))]`, independently per radius,
/// with the decay exponent fitted over `window` (indices into `radii`).
pub fn estimate_one_arm(
    model: &ModelSpec,
    radii: &[f64],
    window: Option<Range<usize>>,
    run: &Sampling,
) -> Result<OneArmCurve> {
    model.validate()?;
    run.require(1)?;
    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) || radii[0] <= ONE_ARM_INNER {
        return Err(Error::param("radii", "radii must exceed 1 and be strictly increasing"));
    }
    let dim = model.dim();
    let mut points = Vec::with_capacity(radii.len());
    for &r in radii {
        let annulus = AnnulusSpec::centered(dim, ONE_ARM_INNER, r)?;
        let label = format!("one-arm/R{r}");
        let hits = run.run(&label, |seed| {
            let medium = model.realize(r, seed)?;
            annulus_zero_crossing(&medium, &annulus)
        })?;
        let k = hits.iter().filter(|&&b| b).count();
        let est = Estimate::proportion(k, hits.len()).with_provenance(run.seed.master, run.seed.child(&label).label);
        points.push((r, est));
    }
    let window = window.unwrap_or(0..points.len());
    let (exponent, fit_note) = match fit_exponent(&points, window) {
        Ok(e) => (Some(e), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(OneArmCurve { points, exponent, fit_note })
}

/// Slope of `-log P` against `log x` over `window`.
///
/// Weighted least squares with delta-method variances `(se/P)²`; when some
/// point has zero stderr (exact data) it falls back to ordinary least
/// squares with the residual-based slope error.
pub fn fit_exponent(curve: &[(f64, Estimate)], window: Range<usize>) -> Result<Estimate> {
    if window.end > curve.len() || window.len() < 3 {
        return Err(Error::param("window", "fit window needs at least 3 points of the curve"));
    }
    let pts = &curve[window];
    for (x, e) in pts {
        if !(e.mean > 0.0 && e.mean < 1.0) {
            return Err(Error::param("window", format!("probability {} at x = {x} is 0 or 1; no log-log fit", e.mean)));
        }
        if !(*x > 0.0) {
            return Err(Error::param("window", "abscissae must be > 0"));
        }
    }
    let xs: Vec<f64> = pts.iter().map(|(x, _)| x.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, e)| -e.mean.ln()).collect();
    let exact = pts.iter().any(|(_, e)| e.stderr == 0.0);
    let ws: Vec<f64> = if exact {
        vec![1.0; pts.len()]
    } else {
        pts.iter().map(|(_, e)| (e.mean / e.stderr).powi(2)).collect()
    };
    let sw: f64 = ws.iter().sum();
    let xm = ws.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ym = ws.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * (x - xm).powi(2)).sum();
    let sxy: f64 = ws.iter().zip(xs.iter().zip(&ys)).map(|(w, (x, y))| w * (x - xm) * (y - ym)).sum();
    if sxx <= 0.0 {
        return Err(Error::param("window", "abscissae must not all coincide"));
    }
    let slope = sxy / sxx;
    let stderr = if exact {
        let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - ym - slope * (x - xm)).powi(2)).sum();
        (rss / (pts.len() - 2) as f64 / sxx).sqrt()
    } else {
        (1.0 / sxx).sqrt()
    };
    let replicas = pts.iter().map(|(_, e)| e.replicas).min().unwrap_or(0);
    Ok(Estimate {
        mean: slope,
        stderr,
        replicas,
        ci_low: slope - Z95 * stderr,
        ci_high: slope + Z95 * stderr,
        provenance: None,
    })
}
