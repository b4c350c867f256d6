use super::{Colouring, ModelTag, MonotoneMap};
use crate::error::Result;
use crate::grid::ScalarField;

/// Sign colouring at level `p`: black (1) where `f + p > 0`, white (0) where
/// `f + p <= 0`, so the zero set of `f + p` is white.
pub fn sign_colouring(f: &ScalarField, level: f64) -> Colouring {
    let density = f
        .values()
        .iter()
        .map(|&v| if v + level > 0.0 { 1.0 } else { 0.0 })
        .collect();
    Colouring::new(f.grid().clone(), density, ModelTag::GaussianSign)
        .expect("sign colouring is binary")
}

/// `σ = ψ(f + p)` for a ψ satisfying the flat-negative-sea probes.
pub fn psi_density(f: &ScalarField, level: f64, psi: &MonotoneMap) -> Result<Colouring> {
    psi.validate_psi()?;
    let density = f.values().iter().map(|&v| psi.eval(v + level)).collect();
    Colouring::new(f.grid().clone(), density, ModelTag::GaussianPsi)
}

/// `σ = sqrt(φ(f))`: path times equal Riemannian lengths for `g = φ(f) g0`.
pub fn conformal_density(f: &ScalarField, phi: &MonotoneMap) -> Result<Colouring> {
    phi.validate_phi()?;
    let density = f.values().iter().map(|&v| phi.eval(v).sqrt()).collect();
    Colouring::new(f.grid().clone(), density, ModelTag::Conformal)
}
