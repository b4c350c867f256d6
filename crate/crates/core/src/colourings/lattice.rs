use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::rng::RngSeed;

/// Law of the i.i.d. passage times of lattice edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightLaw {
    /// Time 0 with probability `p`, 1 otherwise.
    Bernoulli { p: f64 },
    Constant { value: f64 },
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
}

impl WeightLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightLaw::Bernoulli { p } if !(0.0..=1.0).contains(&p) => {
                Err(Error::param("law.p", "p must lie in [0,1]"))
            }
            WeightLaw::Constant { value } if !(value >= 0.0 && value.is_finite()) => {
                Err(Error::param("law.value", "weights must be supported on [0, inf)"))
            }
            WeightLaw::Uniform { low, high } if !(low >= 0.0 && high >= low && high.is_finite()) => {
                Err(Error::param(
                    "law.low",
                    "uniform law needs 0 <= low <= high: weights must be supported on [0, inf)",
                ))
            }
            WeightLaw::Exponential { rate } if !(rate > 0.0 && rate.is_finite()) => {
                Err(Error::param("law.rate", "rate must be > 0"))
            }
            _ => Ok(()),
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            WeightLaw::Bernoulli { p } => {
                if rng.gen::<f64>() < p {
                    0.0
                } else {
                    1.0
                }
            }
            WeightLaw::Constant { value } => value,
            WeightLaw::Uniform { low, high } => {
                if high > low {
                    rng.gen_range(low..high)
                } else {
                    low
                }
            }
            WeightLaw::Exponential { rate } => Exp::new(rate).unwrap().sample(rng),
        }
    }
}

/// Passage times on the edges of the hypercubic lattice with the given
/// extents. Vertices are the nodes of a centered unit-spacing grid; the
/// edge `(v, v + e_axis)` is stored at `v * dim + axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    grid: GridSpec,
    weights: Vec<f64>,
}

impl EdgeWeights {
    pub fn from_fn(extents: Vec<usize>, mut weight: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let grid = GridSpec::centered(1.0, extents)?;
        let dim = grid.dim();
        let mut weights = vec![0.0; grid.node_count() * dim];
        for v in 0..grid.node_count() {
            let m = grid.multi(v);
            for axis in 0..dim {
                if m[axis] + 1 < grid.extents()[axis] {
                    let w = weight(v, axis);
                    if !(w >= 0.0 && w.is_finite()) {
                        return Err(Error::param("weights", "edge weights must be finite and >= 0"));
                    }
                    weights[v * dim + axis] = w;
                }
            }
        }
        Ok(Self { grid, weights })
    }

    pub fn sample(extents: Vec<usize>, law: &WeightLaw, seed: &RngSeed) -> Result<Self> {
        law.validate()?;
        let mut rng = seed.rng();
        Self::from_fn(extents, |_, _| law.draw(&mut rng))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Weight of the edge from `v` in the positive `axis` direction.
    /// Only meaningful when that neighbour exists.
    pub fn weight(&self, v: usize, axis: usize) -> f64 {
        self.weights[v * self.grid.dim() + axis]
    }

    /// All existing edge weights, in storage order.
    pub fn edges(&self) -> impl Iterator<Item = f64> + '_ {
        let dim = self.grid.dim();
        (0..self.grid.node_count()).flat_map(move |v| {
            let m = self.grid.multi(v);
            (0..dim)
                .filter(move |&a| m[a] + 1 < self.grid.extents()[a])
                .map(move |a| self.weights[v * dim + a])
        })
    }
}

pub fn bernoulli_edge_weights(extents: Vec<usize>, law: &WeightLaw, seed: &RngSeed) -> Result<EdgeWeights> {
    EdgeWeights::sample(extents, law, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Estimate;

    #[test]
    fn bernoulli_endpoints() {
        let s = RngSeed::new(1, 0, "w");
        let all_zero = bernoulli_edge_weights(vec![6, 6], &WeightLaw::Bernoulli { p: 1.0 }, &s).unwrap();
        assert!(all_zero.edges().all(|w| w == 0.0));
        let all_one = bernoulli_edge_weights(vec![6, 6], &WeightLaw::Bernoulli { p: 0.0 }, &s).unwrap();
        assert!(all_one.edges().all(|w| w == 1.0));
        assert_eq!(all_one.edges().count(), 2 * 6 * 5);
    }

    #[test]
    fn bernoulli_mean() {
        let w = bernoulli_edge_weights(vec![60, 60], &WeightLaw::Bernoulli { p: 0.3 }, &RngSeed::new(2, 0, "w"))
            .unwrap();
        let xs: Vec<f64> = w.edges().collect();
        let e = Estimate::from_samples(&xs);
        assert!((e.mean - 0.7).abs() < 3.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn negative_support_rejected() {
        let s = RngSeed::new(1, 0, "w");
        assert!(bernoulli_edge_weights(vec![3, 3], &WeightLaw::Constant { value: -1.0 }, &s).is_err());
        assert!(bernoulli_edge_weights(vec![3, 3], &WeightLaw::Uniform { low: -1.0, high: 1.0 }, &s).is_err());
        assert!(bernoulli_edge_weights(vec![3, 3], &WeightLaw::Bernoulli { p: 1.5 }, &s).is_err());
    }
}
