//! Random densities σ on grids: Gaussian sign and ψ colourings, conformal
//! densities, Voronoi and Boolean colourings, and i.i.d. lattice edge times.

mod boolean;
mod gaussian;
mod lattice;
mod maps;
mod poisson;
mod voronoi;

use serde::{Deserialize, Serialize};

pub use boolean::{boolean_colouring, boolean_margin, boolean_radii, RadiusLaw, BOOLEAN_QUANTILE};
pub use gaussian::{conformal_density, psi_density, sign_colouring};
pub use lattice::{bernoulli_edge_weights, EdgeWeights, WeightLaw};
pub use maps::MonotoneMap;
pub use poisson::{sample_poisson, BoxRegion, PointCloud};
pub use voronoi::{nearest_points, voronoi_colour_key, voronoi_colouring, voronoi_margin};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelTag {
    GaussianSign,
    GaussianPsi,
    Voronoi,
    Boolean,
    Conformal,
    Constant,
}

impl ModelTag {
    /// Models whose densities only take the values 0 and 1.
    pub fn is_colouring(self) -> bool {
        matches!(
            self,
            ModelTag::GaussianSign | ModelTag::Voronoi | ModelTag::Boolean
        )
    }
}

/// Nonnegative density σ at every grid node. White nodes have σ = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Colouring {
    grid: GridSpec,
    density: Vec<f64>,
    model: ModelTag,
}

impl Colouring {
    pub fn new(grid: GridSpec, density: Vec<f64>, model: ModelTag) -> Result<Self> {
        if density.len() != grid.node_count() {
            return Err(Error::InvalidGrid(format!(
                "{} densities for {} nodes",
                density.len(),
                grid.node_count()
            )));
        }
        if let Some((node, &value)) = density
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::Param {
                field: "density",
                reason: format!("node {node} has value {value}, densities must be finite and >= 0"),
            });
        }
        if model.is_colouring() {
            if let Some((node, &value)) = density
                .iter()
                .enumerate()
                .find(|(_, v)| **v != 0.0 && **v != 1.0)
            {
                return Err(Error::NotColouring { node, value });
            }
        }
        Ok(Self {
            grid,
            density,
            model,
        })
    }

    pub fn constant(grid: GridSpec, value: f64) -> Result<Self> {
        let n = grid.node_count();
        Self::new(grid, vec![value; n], ModelTag::Constant)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn model(&self) -> ModelTag {
        self.model
    }

    pub fn is_white(&self, node: usize) -> bool {
        self.density[node] == 0.0
    }

    /// First node whose density is neither 0 nor 1, if any.
    pub fn first_non_binary(&self) -> Option<usize> {
        self.density.iter().position(|&v| v != 0.0 && v != 1.0)
    }

    /// The same colouring with every density multiplied by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::param("scale", "must be finite and >= 0"));
        }
        let model = if self.model.is_colouring() && c != 1.0 {
            ModelTag::Constant
        } else {
            self.model
        };
        Self::new(
            self.grid.clone(),
            self.density.iter().map(|v| v * c).collect(),
            model,
        )
    }

    pub fn white_fraction(&self) -> f64 {
        self.density.iter().filter(|&&v| v == 0.0).count() as f64 / self.density.len() as f64
    }

    pub fn to_field(&self) -> ScalarField {
        ScalarField::new(self.grid.clone(), self.density.clone()).expect("densities are finite")
    }
}
