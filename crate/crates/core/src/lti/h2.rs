use nalgebra::{DMatrix, DVector};

use super::statespace::{DiscreteStateSpace, StateSpace};
use crate::error::{Error, Result};

fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

fn solve_kron(op: DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = q.nrows();
    let rhs = -vec_of(q);
    let x = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::H2Undefined("singular Lyapunov operator".into()))?;
    let x = DMatrix::from_column_slice(n, n, x.as_slice());
    Ok((&x + x.transpose()) * 0.5)
}

/// Solves `A X + X Aᵀ + Q = 0` through the Kronecker form
/// `(I⊗A + A⊗I) vec X = -vec Q`.
pub fn lyap_ct(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    solve_kron(eye.kronecker(a) + a.kronecker(&eye), q)
}

/// Solves `A X Aᵀ - X + Q = 0`.
pub fn lyap_dt(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    solve_kron(a.kronecker(a) - DMatrix::<f64>::identity(n * n, n * n), q)
}

/// `‖G‖₂` for a Hurwitz, strictly proper continuous system.
pub fn h2_norm_ct(ss: &StateSpace) -> Result<f64> {
    if ss.d.iter().any(|&v| v != 0.0) {
        return Err(Error::H2Undefined("nonzero feedthrough".into()));
    }
    if let Some(p) = ss.poles().into_iter().find(|p| p.re >= 0.0) {
        return Err(Error::H2Undefined(format!("unstable pole at {:.6}{:+.6}j", p.re, p.im)));
    }
    if ss.states() == 0 {
        return Ok(0.0);
    }
    let x = lyap_ct(&ss.a, &(&ss.b * ss.b.transpose()))?;
    Ok((&ss.c * x * ss.c.transpose()).trace().max(0.0).sqrt())
}

/// `‖G_h‖₂` for a Schur-stable sampled system, including the feedthrough tap.
pub fn h2_norm_dt(dss: &DiscreteStateSpace) -> Result<f64> {
    let rho = dss.spectral_radius();
    if rho >= 1.0 {
        return Err(Error::H2Undefined(format!("spectral radius {rho:.6} >= 1")));
    }
    let direct = (&dss.dd * dss.dd.transpose()).trace();
    if dss.states() == 0 {
        return Ok(direct.sqrt());
    }
    let x = lyap_dt(&dss.ad, &(&dss.bd * dss.bd.transpose()))?;
    Ok(((&dss.cd * x * dss.cd.transpose()).trace() + direct).max(0.0).sqrt())
}
