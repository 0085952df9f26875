//! Dense least squares by Householder QR.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest condition number accepted before a regression is declared
/// insufficiently excited.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct LsSolution {
    pub theta: DVector<f64>,
    pub residual_norm: f64,
    pub condition_number: f64,
}

/// `argmin ‖y - A θ‖₂` via `A = QR`, never forming `AᵀA`.
pub fn lstsq(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<LsSolution> {
    let (rows, cols) = a.shape();
    if y.len() != rows {
        return Err(Error::Dimension(format!("{rows} regression rows but {} targets", y.len())));
    }
    if cols == 0 || rows < cols {
        return Err(Error::Dimension(format!("need rows >= columns > 0, got {rows}x{cols}")));
    }
    if a.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regression data".into()));
    }
    let qr = a.clone().qr();
    let r = qr.r();
    let sv = r.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION) {
        return Err(Error::InsufficientExcitation(cond));
    }
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let head = qty.rows(0, cols).into_owned();
    let theta = r
        .solve_upper_triangular(&head)
        .ok_or(Error::InsufficientExcitation(f64::INFINITY))?;
    let residual_norm = qty.rows(cols, rows - cols).norm();
    Ok(LsSolution { theta, residual_norm, condition_number: cond })
}
