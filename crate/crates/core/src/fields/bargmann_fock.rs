//! Truncated series sampler for the planar Bargmann-Fock field
//!
//! ```text
//! f(x) = exp(-|x|^2 / 2) * sum_{i+j <= N} a_ij x1^i x2^j / sqrt(i! j!)
//! ```
//!
//! with `a_ij` i.i.d. standard normal. The truncated field has variance
//! `1 - tail(|x|^2, N)` at `x`, where `tail(λ, N) = P[Poisson(λ) > N]`, so
//! the worst node of the grid decides the admissible `N`.
//!
//! On a tensor grid the sum factorizes: with
//! `u_i(t) = exp(-t^2/2) t^i / sqrt(i!)`, `f = Σ_i u_i(x1) Σ_j a_ij u_j(x2)`.
//! For a fixed coordinate `t` the weights `u_i(t)^2` are Poisson(`t^2`)
//! probabilities, so only a window of indices around `t^2` contributes.

use rand_chacha::ChaCha12Rng;

use super::ln_factorial;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::rng::{unit_from_bits, RngSeed};

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-6;

/// Basis factors below this magnitude are dropped. Since `Σ_i u_i(t)^2 = 1`,
/// the dropped variance is at most `(N + 1) * 1e-24`.
const BASIS_CUTOFF: f64 = 1e-12;

/// Upper summation limit beyond which Poisson(λ) terms are below f64 resolution.
fn poisson_horizon(lambda: f64) -> usize {
    (lambda + 40.0 * lambda.sqrt() + 60.0).ceil() as usize
}

fn poisson_ln_pmf(lambda: f64, k: usize) -> f64 {
    -lambda + k as f64 * lambda.ln() - ln_factorial(k)
}

/// Variance missing from the `N`-truncated series at distance `radius` from
/// the origin: `exp(-r^2) Σ_{k > N} r^{2k} / k!`.
pub fn bf_tail_variance(radius: f64, truncation: usize) -> f64 {
    let lambda = radius * radius;
    if lambda == 0.0 {
        return 0.0;
    }
    let top = poisson_horizon(lambda);
    if truncation >= top {
        return 0.0;
    }
    (truncation + 1..=top)
        .rev()
        .map(|k| poisson_ln_pmf(lambda, k).exp())
        .sum()
}

/// Smallest `N` whose tail variance at `radius` is at most `tolerance`.
pub fn required_truncation(radius: f64, tolerance: f64) -> usize {
    let lambda = radius * radius;
    if lambda == 0.0 {
        return 0;
    }
    let top = poisson_horizon(lambda);
    // suffix sums from the top keep small tails accurate
    let mut tail = 0.0;
    let mut n = top;
    for k in (1..=top).rev() {
        tail += poisson_ln_pmf(lambda, k).exp();
        if tail > tolerance {
            return k;
        }
        n = k - 1;
    }
    n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BargmannFock {
    pub truncation: usize,
    pub tolerance: f64,
}

impl BargmannFock {
    pub fn new(truncation: usize) -> Self {
        Self {
            truncation,
            tolerance: DEFAULT_TAIL_TOLERANCE,
        }
    }

    /// Truncation chosen as the smallest admissible one for `grid`.
    pub fn for_grid(grid: &GridSpec, tolerance: f64) -> Self {
        Self {
            truncation: required_truncation(worst_radius(grid), tolerance),
            tolerance,
        }
    }

    /// Checks the truncation against the tail bound at the farthest node.
    pub fn check(&self, grid: &GridSpec) -> Result<()> {
        if grid.dim() != 2 {
            return Err(Error::Dimension {
                expected: "2",
                found: grid.dim(),
            });
        }
        let radius = worst_radius(grid);
        let tail = bf_tail_variance(radius, self.truncation);
        if tail > self.tolerance {
            return Err(Error::Truncation {
                requested: self.truncation,
                required: required_truncation(radius, self.tolerance),
                radius,
                tail,
                tolerance: self.tolerance,
            });
        }
        Ok(())
    }

    pub fn sample(&self, grid: &GridSpec, seed: &RngSeed) -> Result<ScalarField> {
        self.check(grid)?;
        let n = self.truncation;
        let ext = grid.extents();
        let xs = AxisBasis::new((0..ext[0]).map(|i| grid.axis_coord(0, i)), n);
        let ys = AxisBasis::new((0..ext[1]).map(|i| grid.axis_coord(1, i)), n);

        let (i_lo, i_hi) = xs.span();
        let (j_lo, j_hi) = ys.span();
        let mut rng = seed.rng();
        let mut row = Vec::new();
        // w[i - i_lo][b] = Σ_j a_ij u_j(y_b)
        let mut w = vec![0.0; (i_hi + 1 - i_lo) * ext[1]];
        for i in i_lo..=i_hi {
            let j_top = j_hi.min(n - i.min(n));
            if i > n || j_lo > j_top {
                continue;
            }
            normals_from(&mut rng, coefficient_index(n, i, j_lo), j_top + 1 - j_lo, &mut row);
            let w_row = &mut w[(i - i_lo) * ext[1]..(i - i_lo + 1) * ext[1]];
            for (b, basis) in ys.entries.iter().enumerate() {
                let lo = basis.lo.max(j_lo);
                let hi = basis.hi().min(j_top);
                if lo > hi {
                    continue;
                }
                let coeffs = &row[lo - j_lo..=hi - j_lo];
                let vals = &basis.values[lo - basis.lo..=hi - basis.lo];
                w_row[b] = coeffs.iter().zip(vals).map(|(a, v)| a * v).sum();
            }
        }

        let mut values = vec![0.0; grid.node_count()];
        for (a, basis) in xs.entries.iter().enumerate() {
            let out = &mut values[a * ext[1]..(a + 1) * ext[1]];
            for (k, u) in basis.values.iter().enumerate() {
                let i = basis.lo + k;
                let w_row = &w[(i - i_lo) * ext[1]..(i - i_lo + 1) * ext[1]];
                for (o, wv) in out.iter_mut().zip(w_row) {
                    *o += u * wv;
                }
            }
        }
        ScalarField::new(grid.clone(), values)
    }
}

/// Samples with the default tail tolerance.
pub fn sample_bargmann_fock(grid: &GridSpec, truncation: usize, seed: &RngSeed) -> Result<ScalarField> {
    BargmannFock::new(truncation).sample(grid, seed)
}

fn worst_radius(grid: &GridSpec) -> f64 {
    let (lo, hi) = grid.bounds();
    lo.iter()
        .zip(&hi)
        .map(|(l, h)| l.abs().max(h.abs()).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Position of `a_ij` in the row-major triangular layout `i + j <= n`.
fn coefficient_index(n: usize, i: usize, j: usize) -> u64 {
    let i = i as u64;
    let n = n as u64;
    i * (n + 1) - i * i.saturating_sub(1) / 2 + j as u64
}

/// `count` standard normals starting at keystream slot `start`. Each normal
/// uses four 32-bit words, so slot `k` always yields the same value.
fn normals_from(rng: &mut ChaCha12Rng, start: u64, count: usize, out: &mut Vec<f64>) {
    use rand::RngCore;
    rng.set_word_pos(start as u128 * 4);
    out.clear();
    out.extend((0..count).map(|_| {
        let u1 = 1.0 - unit_from_bits(rng.next_u64());
        let u2 = unit_from_bits(rng.next_u64());
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }));
}

struct BasisWindow {
    lo: usize,
    values: Vec<f64>,
}

impl BasisWindow {
    fn hi(&self) -> usize {
        self.lo + self.values.len() - 1
    }
}

struct AxisBasis {
    entries: Vec<BasisWindow>,
}

impl AxisBasis {
    fn new(coords: impl Iterator<Item = f64>, n: usize) -> Self {
        Self {
            entries: coords.map(|t| basis_window(t, n)).collect(),
        }
    }

    fn span(&self) -> (usize, usize) {
        let lo = self.entries.iter().map(|e| e.lo).min().unwrap_or(0);
        let hi = self.entries.iter().map(|e| e.hi()).max().unwrap_or(0);
        (lo, hi)
    }
}

/// `u_i(t)` for the indices where `|u_i(t)| >= BASIS_CUTOFF`, computed in log space.
fn basis_window(t: f64, n: usize) -> BasisWindow {
    if t == 0.0 {
        return BasisWindow {
            lo: 0,
            values: vec![1.0],
        };
    }
    let ln_abs = t.abs().ln();
    let ln_cut = BASIS_CUTOFF.ln();
    let mut lo = None;
    let mut values = Vec::new();
    let mut ln_u = -0.5 * t * t;
    for i in 0..=n {
        if i > 0 {
            ln_u += ln_abs - 0.5 * (i as f64).ln();
        }
        if ln_u >= ln_cut {
            let sign = if t < 0.0 && i % 2 == 1 { -1.0 } else { 1.0 };
            if lo.is_none() {
                lo = Some(i);
            }
            values.push(sign * ln_u.exp());
        } else if lo.is_some() && (i as f64) > t * t {
            break;
        }
    }
    match lo {
        Some(lo) => BasisWindow { lo, values },
        // every factor is negligible; keep a single zero entry
        None => BasisWindow {
            lo: 0,
            values: vec![0.0],
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: double sum over (i, j) with i + j > N of
    /// x1^{2i} x2^{2j} / (i! j!), scaled by exp(-|x|^2).
    fn tail_by_double_sum(x1: f64, x2: f64, n: usize) -> f64 {
        let top = 400;
        let mut total = 0.0;
        for i in 0..top {
            for j in 0..top {
                if i + j <= n {
                    continue;
                }
                let ln = -(x1 * x1 + x2 * x2)
                    + if i > 0 { 2.0 * i as f64 * x1.abs().ln() } else { 0.0 }
                    + if j > 0 { 2.0 * j as f64 * x2.abs().ln() } else { 0.0 }
                    - ln_factorial(i)
                    - ln_factorial(j);
                total += ln.exp();
            }
        }
        total
    }

    #[test]
    fn tail_matches_double_sum_oracle() {
        for &(x1, x2) in &[(1.0, 2.0), (3.0f64.sqrt(), 6.0f64.sqrt()), (2.5, -0.5)] {
            let r = (x1 * x1 + x2 * x2 as f64).sqrt();
            for n in [0usize, 3, 9, 20, 30] {
                let a = bf_tail_variance(r, n);
                let b = tail_by_double_sum(x1, x2, n);
                assert!((a - b).abs() <= 1e-12 + 1e-9 * b, "r={r} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn radius_three_tolerance_1e6() {
        // oracle: scan N upward with the double sum at the corner (3/√2, 3/√2)
        let c = 3.0 / 2f64.sqrt();
        let oracle = (0..100).find(|&n| tail_by_double_sum(c, c, n) <= 1e-6).unwrap();
        assert_eq!(oracle, 26);
        assert_eq!(required_truncation(3.0, 1e-6), oracle);
    }

    #[test]
    fn single_origin_node_is_a00() {
        let g = GridSpec::new(vec![0.0, 0.0], 1.0, vec![1, 1]).unwrap();
        let seed = RngSeed::new(11, 0, "bf");
        let f = sample_bargmann_fock(&g, 0, &seed).unwrap();
        let mut rng = seed.rng();
        let mut a = Vec::new();
        normals_from(&mut rng, 0, 1, &mut a);
        assert_eq!(f.values()[0], a[0]);
    }

    #[test]
    fn under_truncation_reports_required_n() {
        let g = GridSpec::centered(1.0, vec![7, 7]).unwrap();
        let err = sample_bargmann_fock(&g, 5, &RngSeed::new(1, 0, "bf")).unwrap_err();
        let radius = 18f64.sqrt();
        match err {
            Error::Truncation { required, .. } => {
                assert_eq!(required, required_truncation(radius, DEFAULT_TAIL_TOLERANCE))
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn rejects_three_dimensions() {
        let g = GridSpec::centered(1.0, vec![3, 3, 3]).unwrap();
        assert!(matches!(
            sample_bargmann_fock(&g, 50, &RngSeed::new(1, 0, "bf")),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn factorized_sum_matches_direct_series() {
        let g = GridSpec::new(vec![-1.5, -0.5], 0.5, vec![5, 4]).unwrap();
        let bf = BargmannFock::for_grid(&g, 1e-10);
        let seed = RngSeed::new(3, 2, "bf");
        let f = bf.sample(&g, &seed).unwrap();
        let n = bf.truncation;
        let mut rng = seed.rng();
        let mut a = Vec::new();
        for k in 0..g.node_count() {
            let x = g.coords(k);
            let mut direct = 0.0;
            for i in 0..=n {
                normals_from(&mut rng, coefficient_index(n, i, 0), n + 1 - i, &mut a);
                for j in 0..=n - i {
                    let ln_den = 0.5 * (ln_factorial(i) + ln_factorial(j));
                    direct += a[j] * x[0].powi(i as i32) * x[1].powi(j as i32) / ln_den.exp();
                }
            }
            direct *= (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp();
            assert!((direct - f.values()[k]).abs() < 1e-9, "node {k}");
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let g = GridSpec::centered(0.5, vec![9, 9]).unwrap();
        let bf = BargmannFock::for_grid(&g, 1e-6);
        let s = RngSeed::new(5, 1, "bf");
        let a = bf.sample(&g, &s).unwrap();
        let b = bf.sample(&g, &s).unwrap();
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = bf.sample(&g, &s.with_replica(2)).unwrap();
        assert_ne!(a.values(), c.values());
    }
}
