use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ModelSpec, Sampling};
use crate::error::{Error, Result};
use crate::metric::{shortest_time, times_to_targets, CostGraph};
use crate::stats::Estimate;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallParams {
    /// Angular bins (directions `2πk/bins`).
    pub bins: usize,
    /// Half-width of the ball domain; default `1.5 t_max / min μ̂_pilot`.
    pub half_width: Option<f64>,
    /// Replicas of the pilot run that picks the regime and the domain size.
    pub pilot_replicas: usize,
    /// Pilot reading distance as a multiple of `t_max`. Time constants are
    /// approached from above, so reading far out keeps the domain from
    /// being undersized.
    pub pilot_factor: f64,
}

impl Default for BallParams {
    fn default() -> Self {
        Self { bins: 64, half_width: None, pilot_replicas: 8, pilot_factor: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallRegime {
    /// Positive time constant: balls grow linearly towards a convex shape.
    Convex,
    /// Every directional time constant is indistinguishable from 0.
    VanishingMu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallAtScale {
    pub t: f64,
    /// Mean over replicas of `ρ(θ_k) / t`, where `ρ` is the ball's radial extent.
    pub mean_radius: Vec<f64>,
    /// Hausdorff distance from the mean rescaled ball to the fitted shape.
    pub hausdorff: Option<f64>,
    /// Smallest mean rescaled radial extent over directions; in the
    /// vanishing regime it is capped by the domain.
    pub growth: f64,
    /// Whether some ball reached the domain boundary.
    pub touches_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormBallFit {
    pub angles: Vec<f64>,
    /// Pilot estimates of `T(0, D u_k) / D`, `D = pilot_factor · t_max` (independent stream).
    pub pilot_mu: Vec<Estimate>,
    /// `T(0, L u_k) / L` at the domain half-width `L`, from the ball replicas.
    pub directional_mu: Vec<Estimate>,
    pub mu_distance: f64,
    pub regime: BallRegime,
    /// Convex, centrally symmetric polygon `K`, counter-clockwise (empty when vanishing).
    pub shape: Vec<Point>,
    pub scales: Vec<BallAtScale>,
}

fn directional(samples: &[Vec<f64>], bins: usize) -> Vec<Estimate> {
    (0..bins)
        .map(|k| Estimate::from_samples(&samples.iter().map(|r| r[k]).collect::<Vec<_>>()))
        .collect()
}

/// Limit shape of the rescaled balls `B_t / t` (planar models).
///
/// A pilot run reads `T(0, D u_k)/D` far out to tell the vanishing regime
/// apart and to size the domain. Each ball replica then computes one
/// travel-time field from the origin, shared by every `t`: the radial
/// extent of `B_t` is found by marching along each bin direction in steps
/// of `h/2`, and the directional time constants `T(0, L u_k)/L` are read at
/// the domain half-width `L`. `K` is the convex hull of `±u_k / μ̂(u_k)`.
pub fn ball_shape(model: &ModelSpec, t_list: &[f64], params: &BallParams, run: &Sampling) -> Result<NormBallFit> {
    model.validate()?;
    run.require(2)?;
    if model.dim() != 2 {
        return Err(Error::Dimension { expected: "2", found: model.dim() });
    }
    if t_list.is_empty() || t_list[0] <= 0.0 || t_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("t", "t values must be positive and strictly increasing"));
    }
    if params.bins < 16 {
        return Err(Error::param("bins", "at least 16 angular bins required"));
    }
    if !(params.pilot_factor >= 1.0) {
        return Err(Error::param("pilot_factor", "must be >= 1"));
    }
    if params.pilot_replicas < 2 {
        return Err(Error::param("pilot_replicas", "at least 2 pilot replicas required"));
    }
    let h = model.spacing();
    let t_max = *t_list.last().unwrap();
    let angles: Vec<f64> = (0..params.bins).map(|k| 2.0 * PI * k as f64 / params.bins as f64).collect();
    let dirs: Vec<Point> = angles.iter().map(|a| [a.cos(), a.sin()]).collect();

    let read_mu = |m: &crate::metric::Medium, tf: Option<&[f64]>, dist: f64| -> Result<Vec<f64>> {
        let g = m.grid();
        let o = g.nearest_node(&[0.0, 0.0]).expect("origin inside centered grid");
        let targets: Vec<usize> = dirs
            .iter()
            .map(|u| g.nearest_node(&[dist * u[0], dist * u[1]]).expect("target inside"))
            .collect();
        let times = match tf {
            Some(all) => targets.iter().map(|&v| all[v]).collect(),
            None => times_to_targets(m, &[o], &targets)?,
        };
        Ok(times.into_iter().map(|t| t / dist).collect())
    };

    let pilot_run = Sampling { replicas: params.pilot_replicas, ..run.clone() };
    let pilot_distance = params.pilot_factor * t_max;
    let pilot = pilot_run.run("ball/pilot", |seed| read_mu(&model.realize(pilot_distance, seed)?, None, pilot_distance))?;
    let pilot_mu = directional(&pilot, params.bins);
    // Vanishing when every direction is within the resolution floor; the
    // pilot distance is at least t_max, so this is the stricter reading.
    let floor = 2.0 * h / t_max;
    let vanishing = pilot_mu.iter().all(|e| e.ci_contains(0.0) && e.mean < floor);
    let regime = if vanishing { BallRegime::VanishingMu } else { BallRegime::Convex };

    let half = match (params.half_width, regime) {
        (Some(w), _) => w,
        (None, BallRegime::VanishingMu) => t_max,
        (None, BallRegime::Convex) => {
            let mu_min = pilot_mu.iter().map(|e| e.mean).fold(f64::INFINITY, f64::min);
            if !(mu_min > 0.0) {
                return Err(Error::param("model", "time constant vanishes in some directions only; set half_width"));
            }
            1.5 * t_max / mu_min
        }
    };
    let per = run.run("ball/extent", |seed| {
        let m = model.realize(half, seed)?;
        let g = m.grid();
        let o = g.nearest_node(&[0.0, 0.0]).expect("origin inside centered grid");
        let tf = shortest_time(&m, &[o])?;
        let reach = g.inner_radius_about(&[0.0, 0.0]);
        let steps = (reach / (h / 2.0)).floor() as usize;
        let mut out = vec![vec![0.0; dirs.len()]; t_list.len()];
        let mut touched = vec![false; t_list.len()];
        for (k, u) in dirs.iter().enumerate() {
            for i in 0..=steps {
                let s = i as f64 * h / 2.0;
                let v = g.nearest_node(&[s * u[0], s * u[1]]).expect("ray inside grid");
                let time = tf.times()[v];
                for (j, &t) in t_list.iter().enumerate() {
                    if time <= t {
                        out[j][k] = s;
                        if i == steps {
                            touched[j] = true;
                        }
                    }
                }
            }
        }
        Ok((out, touched, read_mu(&m, Some(tf.times()), half)?))
    })?;
    let directional_mu = directional(&per.iter().map(|r| r.2.clone()).collect::<Vec<_>>(), params.bins);

    let shape = match regime {
        BallRegime::VanishingMu => Vec::new(),
        BallRegime::Convex => {
            if let Some(k) = directional_mu.iter().position(|e| !(e.mean > 0.0)) {
                return Err(Error::param("model", format!("time constant estimate vanishes at angle {}", angles[k])));
            }
            let pts: Vec<Point> = dirs
                .iter()
                .zip(&directional_mu)
                .flat_map(|(u, e)| [[u[0] / e.mean, u[1] / e.mean], [-u[0] / e.mean, -u[1] / e.mean]])
                .collect();
            convex_hull(&pts)
        }
    };

    let mut scales = Vec::with_capacity(t_list.len());
    for (j, &t) in t_list.iter().enumerate() {
        let touches_boundary = per.iter().any(|r| r.1[j]);
        if touches_boundary && regime == BallRegime::Convex {
            return Err(Error::Geometry(format!(
                "ball at t = {t} reaches the domain boundary (half-width {half}); raise the half-width"
            )));
        }
        let mean_radius: Vec<f64> = (0..dirs.len())
            .map(|k| per.iter().map(|r| r.0[j][k]).sum::<f64>() / per.len() as f64 / t)
            .collect();
        let growth = mean_radius.iter().cloned().fold(f64::INFINITY, f64::min);
        let hausdorff = (regime == BallRegime::Convex).then(|| {
            let poly: Vec<Point> = dirs.iter().zip(&mean_radius).map(|(u, r)| [u[0] * r, u[1] * r]).collect();
            hausdorff(&poly, &shape)
        });
        scales.push(BallAtScale { t, mean_radius, hausdorff, growth, touches_boundary });
    }
    Ok(NormBallFit { angles, pilot_mu, directional_mu, mu_distance: half, regime, shape, scales })
}

/// Unit ball of the 8-neighbour chamfer norm with unit density: the regular
/// octagon with vertices at distance 1 in the axis and diagonal directions.
pub fn chamfer_unit_ball() -> Vec<Point> {
    (0..8).map(|k| {
        let a = PI / 4.0 * k as f64;
        [a.cos(), a.sin()]
    }).collect()
}

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: Point, a: Point, b: Point| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let s = if len2 == 0.0 { 0.0 } else { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0) };
    (p[0] - a[0] - s * dx).hypot(p[1] - a[1] - s * dy)
}

fn boundary_distance(p: Point, poly: &[Point]) -> f64 {
    (0..poly.len())
        .map(|i| segment_distance(p, poly[i], poly[(i + 1) % poly.len()]))
        .fold(f64::INFINITY, f64::min)
}

fn directed(a: &[Point], b: &[Point]) -> f64 {
    const SUB: usize = 32;
    let mut worst = 0.0f64;
    for i in 0..a.len() {
        let (p, q) = (a[i], a[(i + 1) % a.len()]);
        for s in 0..SUB {
            let f = s as f64 / SUB as f64;
            worst = worst.max(boundary_distance([p[0] + f * (q[0] - p[0]), p[1] + f * (q[1] - p[1])], b));
        }
    }
    worst
}

/// Hausdorff distance between the boundaries of two closed polygons, with
/// each edge sampled at 32 points. For convex bodies this equals the
/// Hausdorff distance between the bodies.
pub fn hausdorff(a: &[Point], b: &[Point]) -> f64 {
    directed(a, b).max(directed(b, a))
}
