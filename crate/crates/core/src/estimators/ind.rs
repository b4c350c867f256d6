use serde::{Deserialize, Serialize};

use super::{ModelSpec, Sampling};
use crate::error::{Error, Result};
use crate::metric::{annulus_time, AnnulusSpec};
use crate::stats::{Estimate, Z95};

/// Two annuli carrying the decreasing events `{T(A) < threshold}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventPair {
    pub a: AnnulusSpec,
    pub b: AnnulusSpec,
    pub threshold: f64,
}

impl EventPair {
    /// Two copies of `A(inner, outer)` on the first axis, `gap` apart.
    pub fn separated(dim: usize, inner: f64, outer: f64, gap: f64, threshold: f64) -> Result<Self> {
        if !(gap > 0.0) {
            return Err(Error::param("Q", "separation must be > 0"));
        }
        let c = outer + gap / 2.0;
        let mut ca = vec![0.0; dim];
        let mut cb = vec![0.0; dim];
        ca[0] = -c;
        cb[0] = c;
        Ok(Self {
            a: AnnulusSpec::new(ca, inner, outer)?,
            b: AnnulusSpec::new(cb, inner, outer)?,
            threshold,
        })
    }

    fn half_width(&self) -> f64 {
        [&self.a, &self.b]
            .iter()
            .flat_map(|a| a.center.iter().map(move |c| c.abs() + a.outer))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceDefect {
    /// `|P(E_A ∩ E_B) − P(E_A) P(E_B)|`, stderr from the influence function
    /// of the sample covariance.
    pub defect: Estimate,
    /// Signed sample covariance.
    pub covariance: f64,
    pub p_a: Estimate,
    pub p_b: Estimate,
}

/// Covariance defect of the two annulus events, both read off one realization.
pub fn event_covariance(model: &ModelSpec, pair: &EventPair, label: &str, run: &Sampling) -> Result<CovarianceDefect> {
    model.validate()?;
    run.require(2)?;
    let half = pair.half_width();
    let hits = run.run(label, |seed| {
        let m = model.realize(half, seed)?;
        let a = annulus_time(&m, &pair.a)? < pair.threshold;
        let b = if pair.b == pair.a { a } else { annulus_time(&m, &pair.b)? < pair.threshold };
        Ok((a, b))
    })?;
    let n = hits.len() as f64;
    let xa: Vec<f64> = hits.iter().map(|h| h.0 as u8 as f64).collect();
    let xb: Vec<f64> = hits.iter().map(|h| h.1 as u8 as f64).collect();
    let ma = xa.iter().sum::<f64>() / n;
    let mb = xb.iter().sum::<f64>() / n;
    let cov = xa.iter().zip(&xb).map(|(a, b)| (a - ma) * (b - mb)).sum::<f64>() / n;
    let infl: Vec<f64> = xa.iter().zip(&xb).map(|(a, b)| (a - ma) * (b - mb) - cov).collect();
    let se = (infl.iter().map(|x| x * x).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt();
    let d = cov.abs();
    let prov = (run.seed.master, run.seed.child(label).label);
    let defect = Estimate {
        mean: d,
        stderr: se,
        replicas: hits.len(),
        ci_low: (d - Z95 * se).max(0.0),
        ci_high: d + Z95 * se,
        provenance: None,
    }
    .with_provenance(prov.0, prov.1.clone());
    let count = |x: &[f64]| Estimate::proportion(x.iter().filter(|&&v| v == 1.0).count(), hits.len());
    Ok(CovarianceDefect {
        defect,
        covariance: cov,
        p_a: count(&xa).with_provenance(prov.0, prov.1.clone()),
        p_b: count(&xb).with_provenance(prov.0, prov.1),
    })
}

/// Quasi-independence defect at separation `Q` for sets of diameter `S`:
/// two annuli `A(S/4, S/2)` whose outer balls are `Q` apart, with the
/// decreasing events `{T(A) < delta}`.
pub fn estimate_ind(model: &ModelSpec, q: f64, s: f64, delta: f64, run: &Sampling) -> Result<Estimate> {
    if !(s > 0.0 && q > 0.0) {
        return Err(Error::param("S", "Q and S must be > 0"));
    }
    let pair = EventPair::separated(model.dim(), s / 4.0, s / 2.0, q, delta)?;
    Ok(event_covariance(model, &pair, &format!("ind/Q{q}/S{s}"), run)?.defect)
}
