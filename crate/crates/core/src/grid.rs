//! Regular grids in dimension 2 or 3 and node-valued scalar fields.
//!
//! Node `k` has multi-index `(i0, i1[, i2])` in row-major order (last axis
//! fastest) and coordinates `origin + spacing * index`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on node count (2^26 nodes, 512 MiB per f64 layer).
pub const DEFAULT_NODE_BUDGET: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    origin: Vec<f64>,
    spacing: f64,
    extents: Vec<usize>,
}

impl GridSpec {
    pub fn new(origin: Vec<f64>, spacing: f64, extents: Vec<usize>) -> Result<Self> {
        Self::with_budget(origin, spacing, extents, DEFAULT_NODE_BUDGET)
    }

    pub fn with_budget(
        origin: Vec<f64>,
        spacing: f64,
        extents: Vec<usize>,
        budget: usize,
    ) -> Result<Self> {
        let dim = extents.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::Dimension {
                expected: "2 or 3",
                found: dim,
            });
        }
        if origin.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "origin has {} coordinates, extents have {}",
                origin.len(),
                dim
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be > 0, got {spacing}")));
        }
        if extents.iter().any(|&n| n == 0) {
            return Err(Error::InvalidGrid("extents must be positive".into()));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        let nodes = extents
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .unwrap_or(usize::MAX);
        if nodes > budget {
            return Err(Error::Budget { nodes, budget });
        }
        Ok(Self {
            dim,
            origin,
            spacing,
            extents,
        })
    }

    /// Grid whose node `floor((n-1)/2)` along each axis sits at the origin of space.
    pub fn centered(spacing: f64, extents: Vec<usize>) -> Result<Self> {
        Self::centered_with_budget(spacing, extents, DEFAULT_NODE_BUDGET)
    }

    pub fn centered_with_budget(spacing: f64, extents: Vec<usize>, budget: usize) -> Result<Self> {
        let origin = extents
            .iter()
            .map(|&n| -(((n.max(1) - 1) / 2) as f64) * spacing)
            .collect();
        Self::with_budget(origin, spacing, extents, budget)
    }

    /// Smallest centered grid containing the box `[-half_width, half_width]^dim`.
    pub fn centered_covering(dim: usize, spacing: f64, half_width: f64, budget: usize) -> Result<Self> {
        let k = (half_width / spacing).ceil().max(1.0) as usize;
        Self::centered_with_budget(spacing, vec![2 * k + 1; dim], budget)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn node_count(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.extents)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn try_index(&self, multi: &[i64]) -> Option<usize> {
        let mut acc = 0usize;
        for (&i, &n) in multi.iter().zip(&self.extents) {
            if i < 0 || i as usize >= n {
                return None;
            }
            acc = acc * n + i as usize;
        }
        Some(acc)
    }

    pub fn multi(&self, mut index: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for axis in (0..self.dim).rev() {
            out[axis] = index % self.extents[axis];
            index /= self.extents[axis];
        }
        out
    }

    /// Coordinates of node `index`; entries beyond `dim` are zero.
    pub fn coords(&self, index: usize) -> [f64; 3] {
        let m = self.multi(index);
        let mut out = [0.0; 3];
        for a in 0..self.dim {
            out[a] = self.origin[a] + self.spacing * m[a] as f64;
        }
        out
    }

    pub fn axis_coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + self.spacing * i as f64
    }

    /// Node nearest to `point`, or `None` if the point rounds outside the grid.
    pub fn nearest_node(&self, point: &[f64]) -> Option<usize> {
        let mut multi = [0i64; 3];
        for a in 0..self.dim {
            multi[a] = ((point[a] - self.origin[a]) / self.spacing).round() as i64;
        }
        self.try_index(&multi[..self.dim])
    }

    /// Lower and upper corners of the node bounding box.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let lo = self.origin.clone();
        let hi = (0..self.dim)
            .map(|a| self.axis_coord(a, self.extents[a] - 1))
            .collect();
        (lo, hi)
    }

    /// Largest `r` such that the ball `B(center, r)` lies inside the node box.
    pub fn inner_radius_about(&self, center: &[f64]) -> f64 {
        let (lo, hi) = self.bounds();
        (0..self.dim)
            .map(|a| (center[a] - lo[a]).min(hi[a] - center[a]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Real values attached to every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidGrid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: GridSpec, value: f64) -> Result<Self> {
        let n = grid.node_count();
        Self::new(grid, vec![value; n])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}
