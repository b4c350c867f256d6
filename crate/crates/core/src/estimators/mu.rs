use serde::{Deserialize, Serialize};

use super::{Sampling, ModelSpec};
use crate::error::{Error, Result};
use crate::metric::{times_to_targets, CostGraph};
use crate::stats::Estimate;

/// Relative slack for the per-replica triangle audit: sums of the same edge
/// times in a different order may round differently.
pub const TRIANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuPoint {
    /// Number of grid steps: the two endpoints are `n·h·v` apart.
    pub n: usize,
    /// Estimate of `T(0, n h v) / (n h)`.
    pub estimate: Estimate,
    /// Per-replica values of `T(0, n h v) / (n h)`.
    pub samples: Vec<f64>,
    /// Replicas where `T(-x, x) <= T(-x, 0) + T(0, x)` failed beyond the slack.
    pub triangle_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityCheck {
    pub n: usize,
    pub m: usize,
    /// `mean(n+m) - (n mean(n) + m mean(m)) / (n+m)`; should be <= slack.
    pub excess: f64,
    pub slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuCurve {
    pub direction: Vec<f64>,
    pub points: Vec<MuPoint>,
    pub subadditivity: Vec<SubadditivityCheck>,
}

impl MuCurve {
    pub fn point(&self, n: usize) -> Option<&MuPoint> {
        self.points.iter().find(|p| p.n == n)
    }
}

/// Estimates the time constant in direction `v` from `T(0, n h v) / (n h)`.
///
/// Each replica samples its own medium and places the three points `-x`, `0`,
/// `x` (`x = n h v`, snapped to nodes): the reported ratio uses the pair
/// `(-x, 0)` (a translate of `(0, x)`), and the pair `(0, x)` feeds the
/// triangle audit `T(-x, x) <= T(-x, 0) + T(0, x)`. Every `(n, replica)`
/// pair draws from its own stream.
pub fn estimate_mu(model: &ModelSpec, v: &[f64], n_list: &[usize], run: &Sampling) -> Result<MuCurve> {
    model.validate()?;
    run.require(2)?;
    let dim = model.dim();
    if v.len() != dim {
        return Err(Error::Dimension { expected: if dim == 2 { "2" } else { "3" }, found: v.len() });
    }
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !((norm - 1.0).abs() < 1e-9) {
        return Err(Error::param("v", "direction must be a unit vector"));
    }
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("n", "n values must be positive and strictly increasing"));
    }
    let h = model.spacing();
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let x: Vec<f64> = v.iter().map(|c| c * n as f64 * h).collect();
        let half = x.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let label = format!("mu/n{n}");
        let per = run.run(&label, |seed| {
            let medium = model.realize(half, seed)?;
            let grid = medium.grid();
            let snap = |p: &[f64]| {
                grid.nearest_node(p)
                    .ok_or_else(|| Error::Geometry(format!("target {p:?} outside the grid")))
            };
            let neg: Vec<f64> = x.iter().map(|c| -c).collect();
            let (a, o, b) = (snap(&neg)?, snap(&vec![0.0; dim])?, snap(&x)?);
            let from_a = times_to_targets(&medium, &[a], &[o, b])?;
            let from_o = times_to_targets(&medium, &[o], &[b])?;
            let (t_ao, t_ab, t_ob) = (from_a[0], from_a[1], from_o[0]);
            let violated = t_ab > (t_ao + t_ob) * (1.0 + TRIANGLE_SLACK);
            let length = n as f64 * h;
            Ok((t_ao / length, violated))
        })?;
        let samples: Vec<f64> = per.iter().map(|p| p.0).collect();
        if let Some(bad) = samples.iter().find(|s| !s.is_finite()) {
            return Err(Error::Geometry(format!("endpoints disconnected (ratio {bad})")));
        }
        let estimate = Estimate::from_samples(&samples).with_provenance(run.seed.master, run.seed.child(&label).label);
        points.push(MuPoint {
            n,
            estimate,
            samples,
            triangle_violations: per.iter().filter(|p| p.1).count(),
        });
    }
    let subadditivity = subadditivity_checks(&points);
    Ok(MuCurve { direction: v.to_vec(), points, subadditivity })
}

/// `mean(n+m) <= (n mean(n) + m mean(m)) / (n+m) + 3 × combined stderr`
/// for every pair with `n + m` also on the curve.
fn subadditivity_checks(points: &[MuPoint]) -> Vec<SubadditivityCheck> {
    let mut out = Vec::new();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i..] {
            let Some(c) = points.iter().find(|p| p.n == a.n + b.n) else { continue };
            let (wn, wm) = (a.n as f64 / c.n as f64, b.n as f64 / c.n as f64);
            let bound = wn * a.estimate.mean + wm * b.estimate.mean;
            let se = if a.n == b.n {
                // Same point used twice: the two terms are fully correlated.
                (c.estimate.stderr.powi(2) + a.estimate.stderr.powi(2)).sqrt()
            } else {
                (c.estimate.stderr.powi(2) + (wn * a.estimate.stderr).powi(2) + (wm * b.estimate.stderr).powi(2)).sqrt()
            };
            let excess = c.estimate.mean - bound;
            out.push(SubadditivityCheck { n: a.n, m: b.n, excess, slack: 3.0 * se, holds: excess <= 3.0 * se });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RngSeed;

    #[test]
    fn lattice_graph_distance_at_p_zero() {
        let curve = estimate_mu(&ModelSpec::bernoulli(0.0), &[1.0, 0.0], &[4, 8, 16], &Sampling::new(5, RngSeed::new(1, 0, "t"))).unwrap();
        for p in &curve.points {
            assert_eq!(p.estimate.mean, 1.0);
            assert_eq!(p.estimate.stderr, 0.0);
            assert_eq!(p.triangle_violations, 0);
        }
        assert_eq!(curve.subadditivity.len(), 2);
        assert!(curve.subadditivity.iter().all(|c| c.holds));
    }

    #[test]
    fn constant_density_is_exact() {
        let curve = estimate_mu(&ModelSpec::constant(0.7), &[1.0, 0.0], &[4, 8], &Sampling::new(3, RngSeed::new(1, 0, "c"))).unwrap();
        for p in &curve.points {
            assert!((p.estimate.mean - 0.7).abs() < 1e-14, "{}", p.estimate.mean);
            assert_eq!(p.estimate.stderr, 0.0);
        }
        let diag = estimate_mu(&ModelSpec::constant(1.0), &[0.6, 0.8], &[8], &Sampling::new(2, RngSeed::new(1, 0, "c"))).unwrap();
        assert!(diag.points[0].estimate.mean >= 1.0 - 0.25);
    }

    #[test]
    fn self_consistent_across_seeds() {
        // Two disjoint seed families must agree within 3 combined stderr.
        let spec = ModelSpec::bernoulli(0.25);
        let est = |m| estimate_mu(&spec, &[1.0, 0.0], &[32], &Sampling::new(300, RngSeed::new(m, 0, "mu"))).unwrap().points[0].estimate.clone();
        let (a, b) = (est(11), est(12));
        assert!(a.mean > 0.0 && b.mean > 0.0);
        assert!(a.z_distance(&b) < 3.0, "{a:?} {b:?}");
    }

    #[test]
    fn rejects_bad_input() {
        let run = Sampling::new(2, RngSeed::new(0, 0, "e"));
        let spec = ModelSpec::constant(1.0);
        assert!(estimate_mu(&spec, &[1.0, 1.0], &[2], &run).is_err());
        assert!(estimate_mu(&spec, &[1.0, 0.0], &[4, 2], &run).is_err());
        assert!(estimate_mu(&spec, &[1.0, 0.0], &[2], &Sampling::new(1, RngSeed::new(0, 0, "e"))).is_err());
        let mut small = spec.clone();
        small.grid.extents = Some(vec![9, 9]);
        assert!(matches!(estimate_mu(&small, &[1.0, 0.0], &[16], &run), Err(Error::Geometry(_))));
    }
}
