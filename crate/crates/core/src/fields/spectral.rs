//! Circulant-embedding sampler for stationary Gaussian fields.
//!
//! The kernel is laid out on a periodic torus at least `padding` times the
//! grid along each axis. The torus covariance is circulant, so its
//! eigenvalues are the DFT of the embedded kernel; a field with exactly the
//! target covariance at every in-grid lag is `Re F(sqrt(λ / M) Z)` for a
//! complex white noise `Z`.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use super::KernelSpec;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField};
use crate::rng::RngSeed;

/// Negative eigenvalues smaller than this in magnitude are clipped to zero;
/// anything more negative is an error.
pub const CLIP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSampler {
    pub kernel: KernelSpec,
    /// Minimum ratio of torus size to grid size per axis (at least 2).
    pub padding: usize,
}

impl SpectralSampler {
    pub fn new(kernel: KernelSpec) -> Self {
        Self { kernel, padding: 2 }
    }

    /// Square roots of the scaled embedding eigenvalues, ready for sampling.
    fn amplitudes(&self, grid: &GridSpec) -> Result<(Vec<usize>, Vec<f64>)> {
        let (dims, spectrum) = embedding_spectrum(grid, &self.kernel, self.padding)?;
        let worst = spectrum.iter().cloned().fold(f64::INFINITY, f64::min);
        if worst < -CLIP_TOLERANCE {
            return Err(Error::Embedding {
                worst,
                suggested_padding: 2 * self.padding.max(2),
            });
        }
        let m = spectrum.len() as f64;
        let amps = spectrum.iter().map(|&l| (l.max(0.0) / m).sqrt()).collect();
        Ok((dims, amps))
    }

    pub fn sample(&self, grid: &GridSpec, seed: &RngSeed) -> Result<ScalarField> {
        self.kernel.validate()?;
        let (dims, amps) = self.amplitudes(grid)?;
        let mut rng = seed.rng();
        let mut data: Vec<Complex64> = amps
            .iter()
            .map(|&a| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(a * re, a * im)
            })
            .collect();
        fft_nd(&mut data, &dims);

        let ext = grid.extents();
        let mut values = Vec::with_capacity(grid.node_count());
        for k in 0..grid.node_count() {
            let m = grid.multi(k);
            let mut flat = 0;
            for a in 0..grid.dim() {
                flat = flat * dims[a] + m[a];
            }
            debug_assert!(m[..grid.dim()].iter().zip(ext).all(|(i, n)| i < n));
            values.push(data[flat].re);
        }
        ScalarField::new(grid.clone(), values)
    }
}

pub fn sample_stationary_spectral(
    grid: &GridSpec,
    kernel: &KernelSpec,
    seed: &RngSeed,
) -> Result<ScalarField> {
    SpectralSampler::new(kernel.clone()).sample(grid, seed)
}

/// Smallest 2,3,5-smooth integer `>= n`.
fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Torus extents and the (real) eigenvalues of the circulant embedding.
pub fn embedding_spectrum(
    grid: &GridSpec,
    kernel: &KernelSpec,
    padding: usize,
) -> Result<(Vec<usize>, Vec<f64>)> {
    if padding < 2 {
        return Err(Error::param("padding", "must be at least 2"));
    }
    let h = grid.spacing();
    // the torus half-period must also clear the kernel support, otherwise the
    // wrap-around kink makes the embedding indefinite
    let support_nodes = 2 * (kernel.support_radius() / h).ceil() as usize + 2;
    let dims: Vec<usize> = grid
        .extents()
        .iter()
        .map(|&n| smooth_size((padding * n).max(support_nodes)))
        .collect();
    let total: usize = dims.iter().product();
    let mut data = Vec::with_capacity(total);
    let mut idx = vec![0usize; dims.len()];
    for _ in 0..total {
        let lag: Vec<f64> = idx
            .iter()
            .zip(&dims)
            .map(|(&i, &m)| i.min(m - i) as f64 * h)
            .collect();
        data.push(Complex64::new(kernel.at(&lag), 0.0));
        for a in (0..dims.len()).rev() {
            idx[a] += 1;
            if idx[a] < dims[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    fft_nd(&mut data, &dims);
    Ok((dims, data.into_iter().map(|c| c.re).collect()))
}

/// In-place unnormalized forward DFT over a row-major array.
fn fft_nd(data: &mut [Complex64], dims: &[usize]) {
    let mut planner = FftPlanner::new();
    let total = data.len();
    let mut line = Vec::new();
    for axis in 0..dims.len() {
        let n = dims[axis];
        let stride: usize = dims[axis + 1..].iter().product();
        let fft = planner.plan_fft_forward(n);
        let outer = total / (n * stride);
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                line.clear();
                line.extend((0..n).map(|k| data[base + k * stride]));
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }
}
