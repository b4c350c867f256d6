use serde::{Deserialize, Serialize};

use super::ind::{event_covariance, EventPair};
use super::{ModelSpec, Sampling};
use crate::error::{Error, Result};
use crate::metric::{annulus_time, AnnulusSpec};
use crate::stats::Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Upper end of the left side's interval below the lower end of the right side's.
    Holds,
    /// Lower end of the left side above the upper end of the right side.
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenormReport {
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub delta: f64,
    /// Number of width-`2R` shells fitting in `A_S`: `⌊(S−1)/(2R+Q)⌋`.
    pub big_n: usize,
    /// Shells that must be crossed fast: `⌊N Q / (2R+2Q)⌋`.
    pub n: usize,
    /// Largest number of unit balls, centred on a middle sphere, needed to cover it.
    pub k_max: usize,
    /// `c_d = 4 k_max / S^{d−1}`.
    pub c_d: f64,
    pub vacuous: bool,
    /// `P[T(A_S)/S < δ/(1+Q/R)]`.
    pub lhs: Estimate,
    /// `P[T(A_R)/R < δ]`.
    pub p_small: Estimate,
    /// Covariance defect of two `A_R` events at distance `Q`.
    pub ind: Estimate,
    pub rhs: f64,
    pub rhs_low: f64,
    pub rhs_high: f64,
    pub verdict: Verdict,
    /// What a violation would implicate, most likely first.
    pub caveats: Vec<String>,
}

/// `N = ⌊(S−1)/(2R+Q)⌋` and `n = ⌊N Q/(2R+2Q)⌋`.
pub fn shell_counts(q: f64, r: f64, s: f64) -> (usize, usize) {
    let big_n = ((s - 1.0) / (2.0 * r + q)).floor().max(0.0) as usize;
    let n = (big_n as f64 * q / (2.0 * r + 2.0 * q)).floor() as usize;
    (big_n, n)
}

/// Greedy count of closed unit balls centred on the sphere of radius `rho`
/// (in dimension `dim`) whose union covers it.
pub fn sphere_cover_count(dim: usize, rho: f64) -> usize {
    if rho <= 0.5 {
        return 1;
    }
    if dim == 2 {
        // A unit disc centred on the circle covers an arc of half-angle
        // 2 asin(1/(2ρ)); walking around the circle is optimal.
        let arc = 4.0 * (1.0 / (2.0 * rho)).asin();
        return (2.0 * std::f64::consts::PI / arc - 1e-9).ceil() as usize;
    }
    // 3D: greedy over a Fibonacci point set with mean spacing ≈ 0.1, covering
    // within 0.9 so that the gaps between sample points stay covered.
    let reach = 0.9f64;
    let m = ((4.0 * std::f64::consts::PI * rho * rho) / 0.01).ceil() as usize;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let pts: Vec<[f64; 3]> = (0..m)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
            let rxy = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            [rho * rxy * a.cos(), rho * rxy * a.sin(), rho * z]
        })
        .collect();
    let cell = |p: &[f64; 3]| [0, 1, 2].map(|a| (p[a] / reach).floor() as i64);
    let mut centers: std::collections::HashMap<[i64; 3], Vec<[f64; 3]>> = Default::default();
    let mut count = 0;
    for p in &pts {
        let c = cell(p);
        let mut covered = false;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(v) = centers.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        if v.iter().any(|q| (0..3).map(|a| (p[a] - q[a]).powi(2)).sum::<f64>() <= reach * reach) {
                            covered = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        if !covered {
            centers.entry(c).or_default().push(*p);
            count += 1;
        }
    }
    count
}

/// Monte-Carlo check of the multiscale comparison inequality
/// `P[T(A_S)/S < δ/(1+Q/R)] ≤ (c_d S^{d−1} R/Q)^n (P[T(A_R)/R < δ]^n + n Ind(Q,S))`.
///
/// `c_d` is constructive: `k_max` counts the unit balls covering the widest
/// middle sphere, and the factor 4 absorbs the binomial bound
/// `C(N,n) ≤ (4R/Q)^n` used to reach this form.
pub fn check_renormalization(model: &ModelSpec, q: f64, r: f64, s: f64, delta: f64, run: &Sampling) -> Result<RenormReport> {
    model.validate()?;
    if !(1.0 <= q && q < r && r < s) {
        return Err(Error::param("Q", "scales must satisfy 1 <= Q < R < S"));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", "must be > 0"));
    }
    let dim = model.dim();
    let (big_n, n) = shell_counts(q, r, s);
    let k_max = (1..=big_n.max(1))
        .map(|j| sphere_cover_count(dim, 1.0 + (j - 1) as f64 * (2.0 * r + q) + r))
        .max()
        .unwrap_or(1);
    let c_d = 4.0 * k_max as f64 / s.powi(dim as i32 - 1);
    let vacuous = n == 0;

    let big = AnnulusSpec::centered(dim, 1.0, s)?;
    let lhs_threshold = s * delta / (1.0 + q / r);
    let hits = run.run(&format!("renorm/lhs/S{s}"), |seed| Ok(annulus_time(&model.realize(s, seed)?, &big)? < lhs_threshold))?;
    let lhs = Estimate::proportion(hits.iter().filter(|&&b| b).count(), hits.len());

    let small = AnnulusSpec::centered(dim, 1.0, r)?;
    let hits = run.run(&format!("renorm/small/R{r}"), |seed| Ok(annulus_time(&model.realize(r, seed)?, &small)? < r * delta))?;
    let p_small = Estimate::proportion(hits.iter().filter(|&&b| b).count(), hits.len());

    let pair = EventPair::separated(dim, 1.0, r, q, r * delta)?;
    let ind = event_covariance(model, &pair, &format!("renorm/ind/Q{q}/R{r}"), run)?.defect;

    let factor = (c_d * s.powi(dim as i32 - 1) * r / q).powi(n as i32);
    let rhs_at = |p: f64, i: f64| factor * (p.powi(n as i32) + n as f64 * i);
    let rhs = rhs_at(p_small.mean, ind.mean);
    let rhs_low = rhs_at(p_small.ci_low.max(0.0), ind.ci_low.max(0.0));
    let rhs_high = rhs_at(p_small.ci_high, ind.ci_high);
    let verdict = if vacuous || lhs.ci_high <= rhs_low {
        Verdict::Holds
    } else if lhs.ci_low > rhs_high {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    let caveats = vec![
        "constructive covering count k_max (c_d) may undercount the copies of A_R a crossing must meet".into(),
        "grid discretization: times are computed on the 8/26-neighbour grid, not the continuum".into(),
        "Monte-Carlo error: intervals are 95% Wilson / influence-function intervals".into(),
    ];
    Ok(RenormReport { q, r, s, delta, big_n, n, k_max, c_d, vacuous, lhs, p_small, ind, rhs, rhs_low, rhs_high, verdict, caveats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RngSeed;

    #[test]
    fn shell_count_examples() {
        assert_eq!(shell_counts(1.0, 2.0, 31.0), (6, 1));
        assert_eq!(shell_counts(4.0, 8.0, 401.0), (20, 3));
        assert_eq!(shell_counts(2.0, 4.0, 41.0), (4, 0));
        assert_eq!(shell_counts(2.0, 4.0, 101.0), (10, 1));
    }

    #[test]
    fn circle_cover_counts() {
        // k evenly spaced unit discs cover the circle iff the midpoint between
        // neighbouring centres, at chord 2ρ sin(π/2k), is within distance 1.
        let covers = |rho: f64, k: usize| 2.0 * rho * (std::f64::consts::PI / (2.0 * k as f64)).sin() <= 1.0 + 1e-12;
        assert_eq!(sphere_cover_count(2, 1.0), 3);
        for rho in [1.0, 3.0, 5.0, 7.5, 95.0] {
            let k = sphere_cover_count(2, rho);
            assert!(covers(rho, k));
            assert!(!covers(rho, k - 1));
        }
    }

    #[test]
    fn sphere_cover_grows_quadratically() {
        let (a, b) = (sphere_cover_count(3, 3.0), sphere_cover_count(3, 6.0));
        let ratio = b as f64 / a as f64;
        assert!(ratio > 3.0 && ratio < 5.0, "{a} {b}");
    }

    #[test]
    fn vacuous_case_never_violates() {
        let rep = check_renormalization(&ModelSpec::bernoulli(0.25), 2.0, 4.0, 41.0, 0.1, &Sampling::new(50, RngSeed::new(1, 0, "r"))).unwrap();
        assert!(rep.vacuous);
        assert_eq!(rep.verdict, Verdict::Holds);
        assert_eq!(rep.rhs, 1.0);
    }

    #[test]
    fn rejects_bad_scales() {
        let run = Sampling::new(2, RngSeed::new(1, 0, "r"));
        assert!(check_renormalization(&ModelSpec::bernoulli(0.25), 4.0, 2.0, 41.0, 0.1, &run).is_err());
        assert!(check_renormalization(&ModelSpec::bernoulli(0.25), 0.5, 2.0, 41.0, 0.1, &run).is_err());
    }
}
