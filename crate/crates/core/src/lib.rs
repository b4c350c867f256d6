//! Simulation laboratory for continuum and lattice first-passage percolation.
//!
//! Random media (Gaussian sign and ψ-densities, conformal metrics, Voronoi
//! and Boolean colourings, i.i.d. lattice edge times) are sampled on regular
//! grids; the random pseudometric is computed by Dijkstra on the 8/26-
//! neighbour grid graph; Monte-Carlo estimators measure time constants,
//! one-arm probabilities, crossing probabilities, quasi-independence, the
//! multiscale comparison inequality and the limit ball shape.

pub mod colourings;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod fields;
pub mod grid;
pub mod io;
pub mod metric;
pub mod par;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use grid::{GridSpec, ScalarField};
pub use rng::RngSeed;
pub use stats::Estimate;
