//! Minimal realization and pole placement used to build MIMO regulators.

use nalgebra::DMatrix;

use super::statespace::StateSpace;
use crate::error::{Error, Result};
use crate::poly::Polynomial;

const RANK_TOL: f64 = 1e-9;

fn krylov(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let m = b.ncols();
    let mut k = DMatrix::zeros(n, n * m);
    let mut blk = b.clone();
    for i in 0..n {
        k.view_mut((0, i * m), (n, m)).copy_from(&blk);
        blk = a * blk;
    }
    k
}

fn rank_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let r = svd.singular_values.iter().filter(|&&s| s > RANK_TOL * smax).count();
    u.columns(0, r).into_owned()
}

/// Removes uncontrollable, then unobservable, modes by orthogonal projection.
pub fn minreal(ss: &StateSpace) -> StateSpace {
    if ss.states() == 0 {
        return ss.clone();
    }
    let u = rank_basis(&krylov(&ss.a, &ss.b));
    let (a1, b1, c1) = (u.transpose() * &ss.a * &u, u.transpose() * &ss.b, &ss.c * &u);
    if a1.nrows() == 0 {
        return StateSpace::static_gain(ss.d.clone());
    }
    let v = rank_basis(&krylov(&a1.transpose(), &c1.transpose()));
    StateSpace {
        a: v.transpose() * &a1 * &v,
        b: v.transpose() * b1,
        c: c1 * &v,
        d: ss.d.clone(),
    }
}

/// Polynomial `φ(A)` for a square matrix.
fn poly_of_matrix(p: &Polynomial, a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut acc = DMatrix::zeros(n, n);
    for &c in p.coeffs().iter().rev() {
        acc = &acc * a + DMatrix::identity(n, n) * c;
    }
    acc
}

/// Ackermann's formula: the row `k` with `eig(A - b k)` equal to the roots of
/// the monic `desired`.
pub fn place_siso(a: &DMatrix<f64>, b: &DMatrix<f64>, desired: &Polynomial) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if b.ncols() != 1 || b.nrows() != n || desired.degree() != n {
        return Err(Error::Dimension("single-input placement needs deg(desired) = states".into()));
    }
    let ctrb = krylov(a, b);
    let inv = ctrb
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidModel("pair (A, b) is not controllable".into()))?;
    let monic = desired.scale(1.0 / desired.leading());
    let k = inv.row(n - 1) * poly_of_matrix(&monic, a);
    Ok(DMatrix::from_row_slice(1, n, k.as_slice()))
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / min
    }
}

/// State feedback `F` (inputs × states) with `eig(A - B F)` at the roots of
/// `desired`. The input direction `q` is chosen among a few fixed candidates
/// to give the best-conditioned single-input pair `(A, Bq)`; `F = q k`.
pub fn place(a: &DMatrix<f64>, b: &DMatrix<f64>, desired: &Polynomial) -> Result<DMatrix<f64>> {
    let m = b.ncols();
    let mut candidates: Vec<DMatrix<f64>> = (0..m)
        .map(|i| {
            let mut q = DMatrix::zeros(m, 1);
            q[i] = 1.0;
            q
        })
        .collect();
    candidates.push(DMatrix::from_element(m, 1, 1.0));
    candidates.push(DMatrix::from_fn(m, 1, |i, _| 1.0 + i as f64));
    candidates.push(DMatrix::from_fn(m, 1, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 }));
    let best = candidates
        .into_iter()
        .map(|q| {
            let c = condition(&krylov(a, &(b * &q)));
            (c, q)
        })
        .filter(|(c, _)| c.is_finite())
        .min_by(|x, y| x.0.total_cmp(&y.0));
    let (cond, q) = best.ok_or_else(|| Error::InvalidModel("pair (A, B) is not controllable".into()))?;
    if cond > 1e12 {
        return Err(Error::InvalidModel(format!(
            "pair (A, B) is numerically uncontrollable (condition {cond:.2e})"
        )));
    }
    let k = place_siso(a, &(b * &q), desired)?;
    Ok(q * k)
}

/// Observer gain `L` with `eig(A - L C)` at the roots of `desired`.
pub fn place_observer(a: &DMatrix<f64>, c: &DMatrix<f64>, desired: &Polynomial) -> Result<DMatrix<f64>> {
    Ok(place(&a.transpose(), &c.transpose(), desired)?.transpose())
}

/// Observer-based output-feedback regulator acting on `e = r - y`:
/// `A_K = A - BF - LC`, `B_K = L`, `C_K = F`, `D_K = 0`.
pub fn observer_regulator(
    plant: &StateSpace,
    feedback: &Polynomial,
    observer: &Polynomial,
) -> Result<StateSpace> {
    let f = place(&plant.a, &plant.b, feedback)?;
    let l = place_observer(&plant.a, &plant.c, observer)?;
    let ak = &plant.a - &plant.b * &f - &l * &plant.c;
    StateSpace::new(ak, l, f, DMatrix::zeros(plant.inputs(), plant.outputs()))
}
