use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::rng::{point_uniform, RngSeed};

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || !(2..=3).contains(&lo.len()) {
            return Err(Error::param("region", "corners must share dimension 2 or 3"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::param("region", "box must have nonempty interior"));
        }
        Ok(Self { lo, hi })
    }

    /// Node bounding box of a grid.
    pub fn of_grid(grid: &GridSpec) -> Self {
        let (lo, hi) = grid.bounds();
        Self { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn expanded(&self, margin: f64) -> Self {
        Self {
            lo: self.lo.iter().map(|l| l - margin).collect(),
            hi: self.hi.iter().map(|h| h + margin).collect(),
        }
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(x)
            .all(|((l, h), v)| l <= v && v <= h)
    }

    pub fn contains_box(&self, other: &BoxRegion) -> bool {
        self.lo.iter().zip(&other.lo).all(|(a, b)| a <= b)
            && self.hi.iter().zip(&other.hi).all(|(a, b)| a >= b)
    }
}

/// Realization of a homogeneous Poisson process on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<[f64; 3]>,
    region: BoxRegion,
    intensity: f64,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>, region: BoxRegion, intensity: f64) -> Result<Self> {
        let dim = region.dim();
        if let Some(p) = points.iter().find(|p| !region.contains_point(&p[..dim])) {
            return Err(Error::Geometry(format!("point {:?} outside the region", &p[..dim])));
        }
        Ok(Self {
            points,
            region,
            intensity,
        })
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn region(&self) -> &BoxRegion {
        &self.region
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    /// Hash-derived uniform attached to point `i` under `key`.
    pub fn uniform(&self, i: usize, key: u64) -> f64 {
        point_uniform(key, &self.points[i][..self.dim()])
    }

    /// Independent thinning keeping each point with probability `keep`.
    /// Marks are hashed from the coordinates, so nested `keep` values give
    /// nested clouds.
    pub fn thinned(&self, keep: f64, key: u64) -> Self {
        let points = (0..self.len())
            .filter(|&i| self.uniform(i, key) < keep)
            .map(|i| self.points[i])
            .collect();
        Self {
            points,
            region: self.region.clone(),
            intensity: self.intensity * keep,
        }
    }

    /// Number of points inside `b`.
    pub fn count_in(&self, b: &BoxRegion) -> usize {
        self.points
            .iter()
            .filter(|p| b.contains_point(&p[..self.dim()]))
            .count()
    }
}

/// Homogeneous Poisson process of intensity `lambda` on `region`.
pub fn sample_poisson(region: &BoxRegion, lambda: f64, seed: &RngSeed) -> Result<PointCloud> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::param("lambda", "intensity must be finite and >= 0"));
    }
    let region = BoxRegion::new(region.lo.clone(), region.hi.clone())?;
    let mean = lambda * region.volume();
    let mut rng = seed.rng();
    let count = if mean > 0.0 {
        let d = Poisson::new(mean).map_err(|e| Error::param("lambda", e.to_string()))?;
        let c: f64 = d.sample(&mut rng);
        c as usize
    } else {
        0
    };
    let dim = region.dim();
    let points = (0..count)
        .map(|_| {
            let mut p = [0.0; 3];
            for a in 0..dim {
                p[a] = rng.gen_range(region.lo[a]..region.hi[a]);
            }
            p
        })
        .collect();
    PointCloud::new(points, region, lambda)
}
