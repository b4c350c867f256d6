use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{shortest_time_until, CostGraph};
use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// `A(center; inner, outer)`, the annulus between two concentric spheres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub center: Vec<f64>,
    pub inner: f64,
    pub outer: f64,
}

/// Discretized boundary spheres of an annulus.
#[derive(Debug, Clone, PartialEq)]
pub struct Shells {
    pub inner: Vec<usize>,
    pub outer: Vec<usize>,
}

impl AnnulusSpec {
    pub fn new(center: Vec<f64>, inner: f64, outer: f64) -> Result<Self> {
        let a = Self { center, inner, outer };
        a.validate()?;
        Ok(a)
    }

    pub fn centered(dim: usize, inner: f64, outer: f64) -> Result<Self> {
        Self::new(vec![0.0; dim], inner, outer)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.inner > 0.0 && self.inner < self.outer && self.outer.is_finite()) {
            return Err(Error::Geometry(format!(
                "annulus radii must satisfy 0 < r < R, got r = {}, R = {}",
                self.inner, self.outer
            )));
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Geometry("annulus center must be finite".into()));
        }
        Ok(())
    }

    /// Nodes within `h√d/2` of each sphere: a band one grid cell thick, so
    /// every continuous crossing of the sphere passes through it.
    pub fn shells(&self, grid: &GridSpec) -> Result<Shells> {
        self.validate()?;
        let dim = grid.dim();
        if self.center.len() != dim {
            return Err(Error::Dimension { expected: if dim == 2 { "2" } else { "3" }, found: self.center.len() });
        }
        let h = grid.spacing();
        let band = h * (dim as f64).sqrt() / 2.0;
        if self.outer > grid.inner_radius_about(&self.center) {
            return Err(Error::Geometry(format!(
                "outer radius {} does not fit in the grid (room for {})",
                self.outer,
                grid.inner_radius_about(&self.center)
            )));
        }
        if self.outer - self.inner <= 2.0 * band {
            return Err(Error::Geometry(format!(
                "annulus too thin for spacing {h}: shells of half-width {band} overlap"
            )));
        }
        let (mut inner, mut outer) = (Vec::new(), Vec::new());
        // Only the bounding box of the outer band needs scanning.
        let reach = self.outer + band;
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for a in 0..dim {
            let o = grid.origin()[a];
            let n = grid.extents()[a];
            let l = ((self.center[a] - reach - o) / h).floor().max(0.0) as usize;
            let u = (((self.center[a] + reach - o) / h).ceil().max(0.0) as usize).min(n - 1);
            lo[a] = l.min(n - 1);
            hi[a] = u;
        }
        let (zlo, zhi) = if dim == 3 { (lo[2], hi[2]) } else { (0, 0) };
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in zlo..=zhi {
                    let m = [i, j, k];
                    let v = grid.index(&m[..dim]);
                    let x = grid.coords(v);
                    let r = (0..dim).map(|a| (x[a] - self.center[a]).powi(2)).sum::<f64>().sqrt();
                    if (r - self.inner).abs() <= band {
                        inner.push(v);
                    } else if (r - self.outer).abs() <= band {
                        outer.push(v);
                    }
                }
            }
        }
        if inner.is_empty() || outer.is_empty() {
            return Err(Error::Geometry("annulus shell contains no grid nodes".into()));
        }
        inner.sort_unstable();
        outer.sort_unstable();
        Ok(Shells { inner, outer })
    }
}

/// Crossing time `T(A)`: the shortest travel time from the inner to the outer sphere.
pub fn annulus_time<G: CostGraph>(g: &G, annulus: &AnnulusSpec) -> Result<f64> {
    let shells = annulus.shells(g.grid())?;
    let mut is_outer = vec![false; g.grid().node_count()];
    for &v in &shells.outer {
        is_outer[v] = true;
    }
    let mut hit = f64::INFINITY;
    shortest_time_until(g, &shells.inner, |u, t| {
        if is_outer[u] {
            hit = t;
            true
        } else {
            false
        }
    })?;
    Ok(hit)
}

/// Whether a zero-cost path joins the two spheres, i.e. `T(A) = 0`.
/// Decided by breadth-first search over zero-weight edges, with no
/// floating-point accumulation involved.
pub fn annulus_zero_crossing<G: CostGraph>(g: &G, annulus: &AnnulusSpec) -> Result<bool> {
    let shells = annulus.shells(g.grid())?;
    let n = g.grid().node_count();
    let mut is_outer = vec![false; n];
    for &v in &shells.outer {
        is_outer[v] = true;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for &s in &shells.inner {
        seen[s] = true;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        if is_outer[u] {
            return Ok(true);
        }
        g.visit_edges(u, |v, w| {
            if w == 0.0 && !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        });
    }
    Ok(false)
}
