use serde::{Deserialize, Serialize};

use crate::colourings::{
    boolean_colouring, boolean_margin, boolean_radii, voronoi_colour_key, conformal_density, psi_density, sample_poisson, sign_colouring,
    voronoi_colouring, voronoi_margin, BoxRegion, Colouring, EdgeWeights, ModelTag, MonotoneMap, PointCloud, RadiusLaw,
    WeightLaw,
};
use crate::error::{Error, Result};
use crate::fields::{BargmannFock, KernelSpec, SpectralSampler, DEFAULT_TAIL_TOLERANCE};
use crate::grid::{GridSpec, ScalarField, DEFAULT_NODE_BUDGET};
use crate::metric::Medium;
use crate::par::Execution;
use crate::rng::RngSeed;

/// How the Gaussian field is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaussianSampler {
    /// Truncated Bargmann-Fock series (planar, Bargmann-Fock kernel only).
    #[default]
    Series,
    /// Circulant embedding of the kernel.
    Spectral,
}

fn bargmann_fock_kernel() -> KernelSpec {
    KernelSpec::Gaussian { length: 1.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelKind {
    /// Sign colouring of the Bargmann-Fock field: black where `f + p > 0`.
    BargmannFock {
        p: f64,
        #[serde(default)]
        sampler: GaussianSampler,
    },
    /// Sign colouring of a stationary field with an arbitrary kernel.
    SpectralGaussian { p: f64, kernel: KernelSpec },
    /// Density `ψ(f + p)`.
    GaussianPsi {
        p: f64,
        psi: MonotoneMap,
        #[serde(default = "bargmann_fock_kernel")]
        kernel: KernelSpec,
        #[serde(default)]
        sampler: GaussianSampler,
    },
    /// Conformal metric `φ(f) g₀`, i.e. density `√φ(f)`.
    Conformal {
        phi: MonotoneMap,
        #[serde(default = "bargmann_fock_kernel")]
        kernel: KernelSpec,
        #[serde(default)]
        sampler: GaussianSampler,
    },
    /// Poisson-Voronoi cells of intensity `lambda`, each white with probability `p`.
    Voronoi { p: f64, lambda: f64 },
    /// White inside a union of Poisson balls. A cloud of intensity
    /// `coupling_lambda` is thinned down to `lambda`, so models sharing a seed
    /// and `coupling_lambda` are coupled monotonically in `lambda`.
    Boolean {
        lambda: f64,
        radius: RadiusLaw,
        #[serde(default)]
        coupling_lambda: Option<f64>,
    },
    /// I.i.d. edge times on the hypercubic lattice.
    BernoulliLattice { law: WeightLaw },
    Constant { value: f64 },
}

/// Discretization of the continuum models. Lattice models ignore `spacing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridParams {
    pub dim: usize,
    pub spacing: f64,
    /// Fixed extents; when absent each task sizes its own centered grid.
    pub extents: Option<Vec<usize>>,
    /// Room left around every task's region of interest, in length units.
    pub margin: f64,
    pub node_budget: usize,
    /// Truncation tail tolerance of the series sampler.
    pub tail_tolerance: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            dim: 2,
            spacing: 0.25,
            extents: None,
            margin: 2.0,
            node_budget: DEFAULT_NODE_BUDGET,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model: ModelKind,
    #[serde(default)]
    pub grid: GridParams,
}

fn unit_interval(field: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(field, "p must lie in [0,1]"))
    }
}

fn positive(field: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, "must be > 0"))
    }
}

impl ModelSpec {
    pub fn new(model: ModelKind) -> Self {
        Self { model, grid: GridParams::default() }
    }

    pub fn with_grid(mut self, grid: GridParams) -> Self {
        self.grid = grid;
        self
    }

    pub fn constant(value: f64) -> Self {
        Self::new(ModelKind::Constant { value })
    }

    pub fn bernoulli(p: f64) -> Self {
        Self::new(ModelKind::BernoulliLattice { law: WeightLaw::Bernoulli { p } })
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self.model, ModelKind::BernoulliLattice { .. })
    }

    /// Whether realizations are {0,1}-valued colourings.
    pub fn is_colouring(&self) -> bool {
        match &self.model {
            ModelKind::BargmannFock { .. } | ModelKind::SpectralGaussian { .. } => true,
            ModelKind::Voronoi { .. } | ModelKind::Boolean { .. } => true,
            ModelKind::BernoulliLattice { law } => matches!(law, WeightLaw::Bernoulli { .. }),
            ModelKind::Constant { value } => *value == 0.0 || *value == 1.0,
            ModelKind::GaussianPsi { psi, .. } => *psi == MonotoneMap::Indicator,
            ModelKind::Conformal { .. } => false,
        }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn spacing(&self) -> f64 {
        if self.is_lattice() {
            1.0
        } else {
            self.grid.spacing
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(2..=3).contains(&g.dim) {
            return Err(Error::param("grid.dim", "dimension must be 2 or 3"));
        }
        positive("grid.spacing", g.spacing)?;
        if !(g.margin >= 0.0 && g.margin.is_finite()) {
            return Err(Error::param("grid.margin", "must be >= 0"));
        }
        positive("grid.tail_tolerance", g.tail_tolerance)?;
        if let Some(e) = &g.extents {
            if e.len() != g.dim || e.iter().any(|&n| n == 0) {
                return Err(Error::param("grid.extents", "one positive extent per dimension required"));
            }
        }
        let gaussian = |kernel: &KernelSpec, sampler: GaussianSampler| -> Result<()> {
            kernel.validate()?;
            if sampler == GaussianSampler::Series && (*kernel != bargmann_fock_kernel() || g.dim != 2) {
                return Err(Error::param(
                    "sampler",
                    "the series sampler only draws the planar Bargmann-Fock field",
                ));
            }
            Ok(())
        };
        match &self.model {
            ModelKind::BargmannFock { p, sampler } => {
                finite("p", *p)?;
                gaussian(&bargmann_fock_kernel(), *sampler)
            }
            ModelKind::SpectralGaussian { p, kernel } => {
                finite("p", *p)?;
                kernel.validate()
            }
            ModelKind::GaussianPsi { p, psi, kernel, sampler } => {
                finite("p", *p)?;
                psi.validate_psi()?;
                gaussian(kernel, *sampler)
            }
            ModelKind::Conformal { phi, kernel, sampler } => {
                phi.validate_phi()?;
                gaussian(kernel, *sampler)
            }
            ModelKind::Voronoi { p, lambda } => {
                unit_interval("p", *p)?;
                positive("lambda", *lambda)
            }
            ModelKind::Boolean { lambda, radius, coupling_lambda } => {
                if !(*lambda >= 0.0 && lambda.is_finite()) {
                    return Err(Error::param("lambda", "must be >= 0"));
                }
                radius.validate()?;
                if let Some(c) = coupling_lambda {
                    if !(*c >= *lambda && c.is_finite()) {
                        return Err(Error::param("coupling_lambda", "must be finite and >= lambda"));
                    }
                }
                Ok(())
            }
            ModelKind::BernoulliLattice { law } => law.validate(),
            ModelKind::Constant { value } => {
                if *value >= 0.0 && value.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("value", "density must be finite and >= 0"))
                }
            }
        }
    }

    /// Grid holding the region `[-half_width, half_width]^d` plus the margin.
    pub fn domain(&self, half_width: f64) -> Result<GridSpec> {
        let need = half_width + self.grid.margin;
        let h = self.spacing();
        match &self.grid.extents {
            Some(ext) if !self.is_lattice() => {
                let grid = GridSpec::centered_with_budget(h, ext.clone(), self.grid.node_budget)?;
                let room = grid.inner_radius_about(&vec![0.0; self.dim()]);
                if room + 1e-9 * h < need {
                    return Err(Error::Geometry(format!(
                        "domain too small: task needs half-width {need} (margin included), grid offers {room}"
                    )));
                }
                Ok(grid)
            }
            _ => GridSpec::centered_covering(self.dim(), h, need, self.grid.node_budget),
        }
    }

    /// Draws one realization over `[-half_width, half_width]^d` (plus margin).
    pub fn realize(&self, half_width: f64, seed: &RngSeed) -> Result<Medium> {
        let grid = self.domain(half_width)?;
        self.realize_on(&grid, seed)
    }

    /// The Poisson cloud behind a Voronoi or Boolean realization on `grid`.
    fn cloud(&self, grid: &GridSpec, seed: &RngSeed) -> Result<Option<PointCloud>> {
        Ok(match &self.model {
            ModelKind::Voronoi { lambda, .. } => {
                let region = BoxRegion::of_grid(grid).expanded(voronoi_margin(grid.dim(), *lambda));
                Some(sample_poisson(&region, *lambda, &seed.child("points"))?)
            }
            ModelKind::Boolean { lambda, radius, coupling_lambda } => {
                let base = coupling_lambda.unwrap_or(*lambda);
                let region = BoxRegion::of_grid(grid).expanded(boolean_margin(radius));
                let mut cloud = sample_poisson(&region, base, &seed.child("points"))?;
                if base > *lambda {
                    cloud = cloud.thinned(lambda / base, seed.child("thin").digest());
                }
                Some(cloud)
            }
            _ => None,
        })
    }

    /// Point cloud, radii (Boolean only) and colour key of the realization
    /// drawn by [`realize_on`](Self::realize_on) with the same seed.
    pub fn point_cloud(&self, grid: &GridSpec, seed: &RngSeed) -> Result<Option<(PointCloud, Option<Vec<f64>>, u64)>> {
        self.validate()?;
        let Some(cloud) = self.cloud(grid, seed)? else { return Ok(None) };
        Ok(Some(match &self.model {
            ModelKind::Boolean { radius, .. } => {
                let radii = boolean_radii(&cloud, radius, &seed.child("radii"));
                (cloud, Some(radii), seed.child("radii").child("radius").digest())
            }
            _ => (cloud, None, voronoi_colour_key(&seed.child("cells"))),
        }))
    }

    pub fn realize_on(&self, grid: &GridSpec, seed: &RngSeed) -> Result<Medium> {
        self.validate()?;
        let field = |kernel: &KernelSpec, sampler: GaussianSampler| -> Result<ScalarField> {
            let s = seed.child("field");
            match sampler {
                GaussianSampler::Series => BargmannFock::for_grid(grid, self.grid.tail_tolerance).sample(grid, &s),
                GaussianSampler::Spectral => SpectralSampler::new(kernel.clone()).sample(grid, &s),
            }
        };
        let colouring = match &self.model {
            ModelKind::BargmannFock { p, sampler } => sign_colouring(&field(&bargmann_fock_kernel(), *sampler)?, *p),
            ModelKind::SpectralGaussian { p, kernel } => sign_colouring(&field(kernel, GaussianSampler::Spectral)?, *p),
            ModelKind::GaussianPsi { p, psi, kernel, sampler } => psi_density(&field(kernel, *sampler)?, *p, psi)?,
            ModelKind::Conformal { phi, kernel, sampler } => conformal_density(&field(kernel, *sampler)?, phi)?,
            ModelKind::Voronoi { p, .. } => {
                let cloud = self.cloud(grid, seed)?.expect("voronoi has a cloud");
                voronoi_colouring(&cloud, *p, grid, &seed.child("cells"))?
            }
            ModelKind::Boolean { radius, .. } => {
                let cloud = self.cloud(grid, seed)?.expect("boolean has a cloud");
                boolean_colouring(&cloud, radius, grid, &seed.child("radii"))?
            }
            ModelKind::BernoulliLattice { law } => {
                let ext = grid.extents().to_vec();
                return Ok(Medium::Lattice(EdgeWeights::sample(ext, law, &seed.child("weights"))?));
            }
            ModelKind::Constant { value } => {
                let c = Colouring::constant(grid.clone(), *value)?;
                Colouring::new(grid.clone(), c.density().to_vec(), ModelTag::Constant)?
            }
        };
        Ok(Medium::Continuum(colouring))
    }
}

fn finite(field: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, "must be finite"))
    }
}

/// Replica count, master seed and execution mode shared by all estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampling {
    pub replicas: usize,
    pub seed: RngSeed,
    pub exec: Execution,
}

impl Sampling {
    pub fn new(replicas: usize, seed: RngSeed) -> Self {
        Self { replicas, seed, exec: Execution::default() }
    }

    pub fn sequential(mut self) -> Self {
        self.exec = Execution::Sequential;
        self
    }

    pub(crate) fn require(&self, min: usize) -> Result<()> {
        if self.replicas < min {
            return Err(Error::param("replicas", format!("at least {min} replicas required")));
        }
        Ok(())
    }

    /// Runs `f` on every replica seed of `label`, in replica order; the first
    /// error (by replica index) wins.
    pub(crate) fn run<T: Send>(
        &self,
        label: &str,
        f: impl Fn(&RngSeed) -> Result<T> + Sync + Send,
    ) -> Result<Vec<T>> {
        let base = self.seed.child(label);
        self.exec.map(self.replicas, |r| f(&base.with_replica(r as u64))).into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_realizes() {
        let kinds = vec![
            ModelKind::BargmannFock { p: 0.0, sampler: GaussianSampler::Series },
            ModelKind::BargmannFock { p: 0.0, sampler: GaussianSampler::Spectral },
            ModelKind::SpectralGaussian { p: 0.1, kernel: KernelSpec::Gaussian { length: 0.5 } },
            ModelKind::GaussianPsi {
                p: 0.0,
                psi: MonotoneMap::PositivePart,
                kernel: bargmann_fock_kernel(),
                sampler: GaussianSampler::Series,
            },
            ModelKind::Conformal { phi: MonotoneMap::Exp, kernel: bargmann_fock_kernel(), sampler: GaussianSampler::Spectral },
            ModelKind::Voronoi { p: 0.5, lambda: 1.0 },
            ModelKind::Boolean { lambda: 0.3, radius: RadiusLaw::Constant { radius: 1.0 }, coupling_lambda: Some(0.6) },
            ModelKind::BernoulliLattice { law: WeightLaw::Bernoulli { p: 0.5 } },
            ModelKind::Constant { value: 1.0 },
        ];
        let seed = RngSeed::new(1, 0, "realize");
        for k in kinds {
            let spec = ModelSpec::new(k.clone());
            let a = spec.realize(3.0, &seed).unwrap();
            let b = spec.realize(3.0, &seed).unwrap();
            assert_eq!(a, b, "{k:?}");
            assert!(!spec.is_colouring() || a.is_two_valued(), "{k:?}");
        }
    }

    #[test]
    fn gaussian_levels_share_the_field() {
        let lo = ModelSpec::new(ModelKind::BargmannFock { p: -0.5, sampler: GaussianSampler::Series });
        let hi = ModelSpec::new(ModelKind::BargmannFock { p: 0.5, sampler: GaussianSampler::Series });
        let seed = RngSeed::new(2, 3, "couple");
        let (Medium::Continuum(a), Medium::Continuum(b)) = (lo.realize(2.0, &seed).unwrap(), hi.realize(2.0, &seed).unwrap()) else {
            panic!()
        };
        assert!(a.density().iter().zip(b.density()).all(|(x, y)| x <= y));
    }

    #[test]
    fn validation_messages() {
        let v = ModelSpec::new(ModelKind::Voronoi { p: 1.3, lambda: 1.0 });
        assert!(v.validate().unwrap_err().to_string().contains("p must lie in [0,1]"));
        let b = ModelSpec::new(ModelKind::Boolean {
            lambda: 1.0,
            radius: RadiusLaw::ExponentialTail { rate: 0.0 },
            coupling_lambda: None,
        });
        assert!(b.validate().unwrap_err().to_string().contains("exponential-tail"));
        let s = ModelSpec::new(ModelKind::SpectralGaussian { p: 0.0, kernel: bargmann_fock_kernel() });
        assert!(s.validate().is_ok());
        let mut three = ModelSpec::new(ModelKind::BargmannFock { p: 0.0, sampler: GaussianSampler::Series });
        three.grid.dim = 3;
        assert!(three.validate().is_err());
    }

    #[test]
    fn fixed_extents_must_hold_the_task() {
        let mut spec = ModelSpec::constant(1.0);
        spec.grid.extents = Some(vec![41, 41]);
        assert!(spec.domain(3.0).is_ok());
        assert!(matches!(spec.domain(3.1), Err(Error::Geometry(_))));
        spec.grid.extents = None;
        spec.grid.node_budget = 100;
        assert!(matches!(spec.domain(5.0), Err(Error::Budget { .. })));
    }
}
