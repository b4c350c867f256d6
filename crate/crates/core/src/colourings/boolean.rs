use serde::{Deserialize, Serialize};

use super::{BoxRegion, Colouring, ModelTag, PointCloud};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::rng::RngSeed;

/// Quantile of the radius law that the cloud margin must reach.
pub const BOOLEAN_QUANTILE: f64 = 1.0 - 1e-9;

/// Law of the ball radii of the Boolean model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadiusLaw {
    Constant { radius: f64 },
    /// `P(r >= t) = exp(-rate * t)`.
    ExponentialTail { rate: f64 },
}

impl RadiusLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RadiusLaw::Constant { radius } if !(radius > 0.0 && radius.is_finite()) => {
                Err(Error::param("radius.radius", "constant radius must be > 0"))
            }
            RadiusLaw::ExponentialTail { rate } if !(rate > 0.0 && rate.is_finite()) => Err(
                Error::param(
                    "radius.rate",
                    "exponential-tail constraint requires P(r >= t) <= exp(-c t) with c > 0",
                ),
            ),
            _ => Ok(()),
        }
    }

    pub fn quantile(&self, q: f64) -> f64 {
        match *self {
            RadiusLaw::Constant { radius } => radius,
            RadiusLaw::ExponentialTail { rate } => -(1.0 - q).ln() / rate,
        }
    }
}

/// Margin needed around a grid so that balls centred outside it are accounted for.
pub fn boolean_margin(law: &RadiusLaw) -> f64 {
    law.quantile(BOOLEAN_QUANTILE)
}

/// Radius of each point of `cloud`, hashed from its coordinates and `seed`.
pub fn boolean_radii(cloud: &PointCloud, law: &RadiusLaw, seed: &RngSeed) -> Vec<f64> {
    let key = seed.child("radius").digest();
    (0..cloud.len()).map(|i| law.quantile(cloud.uniform(i, key))).collect()
}

/// White (0) inside the union of closed balls `B(x_i, r_i)`, black (1) elsewhere.
///
/// Radii are hashed from each point's coordinates and `seed`, so a thinned
/// cloud keeps the radii of its surviving points.
pub fn boolean_colouring(
    cloud: &PointCloud,
    radii: &RadiusLaw,
    grid: &GridSpec,
    seed: &RngSeed,
) -> Result<Colouring> {
    radii.validate()?;
    if cloud.dim() != grid.dim() {
        return Err(Error::param("cloud", "dimension differs from the grid"));
    }
    let margin = boolean_margin(radii);
    let needed = BoxRegion::of_grid(grid).expanded(margin);
    if !cloud.region().contains_box(&needed) {
        return Err(Error::Geometry(format!(
            "cloud region margin below the radius quantile {margin:.4} (q = 1 - 1e-9)"
        )));
    }
    let dim = grid.dim();
    let h = grid.spacing();
    let ext = grid.extents();
    let radius = boolean_radii(cloud, radii, seed);
    let mut density = vec![1.0; grid.node_count()];
    for (p, &r) in cloud.points().iter().zip(&radius) {
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        let mut empty = false;
        for a in 0..dim {
            let l = ((p[a] - r - grid.origin()[a]) / h).ceil().max(0.0);
            let u = ((p[a] + r - grid.origin()[a]) / h).floor().min(ext[a] as f64 - 1.0);
            if u < l {
                empty = true;
                break;
            }
            lo[a] = l as usize;
            hi[a] = u as usize;
        }
        if empty {
            continue;
        }
        let r2 = r * r;
        let (zlo, zhi) = if dim == 3 { (lo[2], hi[2]) } else { (0, 0) };
        for ix in lo[0]..=hi[0] {
            let dx = grid.axis_coord(0, ix) - p[0];
            for iy in lo[1]..=hi[1] {
                let dy = grid.axis_coord(1, iy) - p[1];
                for iz in zlo..=zhi {
                    let dz = if dim == 3 { grid.axis_coord(2, iz) - p[2] } else { 0.0 };
                    if dx * dx + dy * dy + dz * dz <= r2 {
                        let k = if dim == 3 {
                            grid.index(&[ix, iy, iz])
                        } else {
                            grid.index(&[ix, iy])
                        };
                        density[k] = 0.0;
                    }
                }
            }
        }
    }
    Colouring::new(grid.clone(), density, ModelTag::Boolean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colourings::sample_poisson;
    use crate::stats::Estimate;

    #[test]
    fn empty_cloud_is_all_black() {
        let grid = GridSpec::centered(0.5, vec![5, 5]).unwrap();
        let law = RadiusLaw::Constant { radius: 1.0 };
        let region = BoxRegion::of_grid(&grid).expanded(boolean_margin(&law));
        let cloud = PointCloud::new(vec![], region, 0.0).unwrap();
        let c = boolean_colouring(&cloud, &law, &grid, &RngSeed::new(1, 0, "b")).unwrap();
        assert!(c.density().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn one_ball_at_origin() {
        let grid = GridSpec::centered(0.5, vec![9, 9]).unwrap();
        let law = RadiusLaw::Constant { radius: 1.0 };
        let region = BoxRegion::of_grid(&grid).expanded(1.0);
        let cloud = PointCloud::new(vec![[0.0; 3]], region, 1.0).unwrap();
        let c = boolean_colouring(&cloud, &law, &grid, &RngSeed::new(1, 0, "b")).unwrap();
        let inside = grid.nearest_node(&[0.5, 0.0]).unwrap();
        let outside = grid.nearest_node(&[2.0, 0.0]).unwrap();
        assert_eq!(c.density()[inside], 0.0);
        assert_eq!(c.density()[outside], 1.0);
    }

    #[test]
    fn margin_is_enforced() {
        let grid = GridSpec::centered(0.5, vec![9, 9]).unwrap();
        let law = RadiusLaw::ExponentialTail { rate: 1.0 };
        let cloud = PointCloud::new(vec![], BoxRegion::of_grid(&grid).expanded(5.0), 1.0).unwrap();
        assert!(matches!(
            boolean_colouring(&cloud, &law, &grid, &RngSeed::new(1, 0, "b")),
            Err(Error::Geometry(_))
        ));
        assert!(RadiusLaw::ExponentialTail { rate: 0.0 }.validate().is_err());
    }

    #[test]
    fn white_fraction_matches_void_probability() {
        // oracle: a node is black iff no Poisson point lies within r0
        let lambda = 0.4;
        let r0 = 1.0;
        let law = RadiusLaw::Constant { radius: r0 };
        let grid = GridSpec::centered(0.5, vec![11, 11]).unwrap();
        let region = BoxRegion::of_grid(&grid).expanded(boolean_margin(&law));
        let fractions: Vec<f64> = (0..400)
            .map(|r| {
                let seed = RngSeed::new(6, r, "b");
                let cloud = sample_poisson(&region, lambda, &seed).unwrap();
                boolean_colouring(&cloud, &law, &grid, &seed)
                    .unwrap()
                    .white_fraction()
            })
            .collect();
        let e = Estimate::from_samples(&fractions);
        let expect = 1.0 - (-lambda * std::f64::consts::PI * r0 * r0).exp();
        assert!((e.mean - expect).abs() < 3.0 * e.stderr, "{e:?} vs {expect}");
    }

    #[test]
    fn thinning_coupling_is_monotone() {
        let law = RadiusLaw::ExponentialTail { rate: 2.0 };
        let grid = GridSpec::centered(0.25, vec![21, 21]).unwrap();
        let region = BoxRegion::of_grid(&grid).expanded(boolean_margin(&law));
        let seed = RngSeed::new(3, 0, "b");
        let cloud = sample_poisson(&region, 1.0, &seed).unwrap();
        let sparse = cloud.thinned(0.4, 99);
        let dense = cloud.thinned(0.8, 99);
        let a = boolean_colouring(&sparse, &law, &grid, &seed).unwrap();
        let b = boolean_colouring(&dense, &law, &grid, &seed).unwrap();
        assert!(a.density().iter().zip(b.density()).all(|(x, y)| x >= y));
    }
}
