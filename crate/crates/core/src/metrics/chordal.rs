use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::CMatrix;

/// `|a − b| / √((1 + |a|²)(1 + |b|²))`, with infinite gains mapped to the
/// pole of the Riemann sphere.
pub fn chordal_distance_siso(a: Complex64, b: Complex64) -> f64 {
    let inf_a = !a.is_finite();
    let inf_b = !b.is_finite();
    match (inf_a, inf_b) {
        (true, true) => 0.0,
        (true, false) => 1.0 / (1.0 + b.norm_sqr()).sqrt(),
        (false, true) => 1.0 / (1.0 + a.norm_sqr()).sqrt(),
        _ => ((a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()).min(1.0),
    }
}

/// `M^{-1/2}` for Hermitian positive definite `M`.
fn inv_sqrt_hermitian(m: CMatrix) -> CMatrix {
    let eig = m.symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(1.0 / l.sqrt(), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Pointwise chordal distance
/// `σ̄((I + P₂P₂*)^{-½} (P₂ − P₁) (I + P₁*P₁)^{-½})`.
pub fn chordal_distance(p1: &CMatrix, p2: &CMatrix) -> Result<f64> {
    if p1.shape() != p2.shape() {
        return Err(Error::Dimension(format!("responses of shape {:?} and {:?}", p1.shape(), p2.shape())));
    }
    if p1.shape() == (1, 1) {
        return Ok(chordal_distance_siso(p1[(0, 0)], p2[(0, 0)]));
    }
    if p1.iter().chain(p2.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("frequency response".into()));
    }
    let (l, m) = p1.shape();
    let left = inv_sqrt_hermitian(CMatrix::identity(l, l) + p2 * p2.adjoint());
    let right = inv_sqrt_hermitian(CMatrix::identity(m, m) + p1.adjoint() * p1);
    let core = left * (p2 - p1) * right;
    let s = core.singular_values();
    Ok(s.iter().copied().fold(0.0, f64::max).min(1.0))
}
