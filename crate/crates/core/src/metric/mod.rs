//! The random pseudometric on discretized domains.
//!
//! Continuum densities live on the 8-neighbour (2D) / 26-neighbour (3D) grid
//! graph; the edge `a–b` costs `|a - b| * (σ(a) + σ(b)) / 2`. Lattice models
//! use the nearest-neighbour hypercubic graph with their own edge times.
//! Unreachable nodes carry `f64::INFINITY`, never a large finite value.

mod annulus;
mod crossing;
mod dijkstra;
mod graph;

pub use annulus::{annulus_time, annulus_zero_crossing, AnnulusSpec, Shells};
pub use crossing::{rect_crossing, RectSpec};
pub use dijkstra::{
    lattice_shortest_time, point_time, shortest_time, shortest_time_until, times_to_targets,
};
pub use graph::{CostGraph, Medium};

use crate::grid::GridSpec;

/// Multi-source shortest travel times, one per node.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeField {
    grid: GridSpec,
    time: Vec<f64>,
    sources: Vec<usize>,
}

impl TimeField {
    pub(crate) fn new(grid: GridSpec, time: Vec<f64>, sources: Vec<usize>) -> Self {
        Self { grid, time, sources }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    /// Raw times; unreachable (or unsettled, after an early stop) nodes are `+inf`.
    pub fn times(&self) -> &[f64] {
        &self.time
    }

    pub fn get(&self, node: usize) -> Option<f64> {
        let t = self.time[node];
        t.is_finite().then_some(t)
    }
}
