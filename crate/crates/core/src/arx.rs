//! Discrete-time ARX least squares, one multi-input equation per output.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsq::lstsq;
use crate::lti::{CMatrix, LinearModel, BOUNDARY_TOL};
use crate::poly::Polynomial;
use crate::sim::SampledRecord;

/// `A_i(q⁻¹) y_i(k) = Σ_j B_ij(q⁻¹) u_j(k) + e_i(k)` with
/// `A_i = 1 + a_1 q⁻¹ + … + a_na q⁻ⁿᵃ` and
/// `B_ij = q⁻ⁿᵏ (b_1 + b_2 q⁻¹ + … + b_nb q⁻⁽ⁿᵇ⁻¹⁾)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArxModel {
    /// Per output, `[1, a_1, …, a_na]`.
    pub a: Vec<Vec<f64>>,
    /// Per output and input, `[b_1, …, b_nb]`.
    pub b: Vec<Vec<Vec<f64>>>,
    pub na: usize,
    pub nb: usize,
    pub nk: usize,
    pub h: f64,
    pub residual_norm: f64,
    pub condition_number: f64,
}

/// Default orders: `na = nb = 10`, `nk = 1`.
pub const DEFAULT_ORDER: usize = 10;

fn regressor_row(
    y: &[f64],
    inputs: &[Vec<f64>],
    k: usize,
    na: usize,
    nb: usize,
    nk: usize,
    row: &mut [f64],
) {
    for l in 1..=na {
        row[l - 1] = -y[k - l];
    }
    for (j, u) in inputs.iter().enumerate() {
        for b in 0..nb {
            row[na + j * nb + b] = u[k - nk - b];
        }
    }
}

/// Least-squares fit of every output equation over all rows with full lags.
pub fn fit_arx(samples: &SampledRecord, na: usize, nb: usize, nk: usize) -> Result<ArxModel> {
    if na == 0 || nb == 0 || nk == 0 {
        return Err(Error::InvalidArgument("ARX orders na, nb and delay nk must be >= 1".into()));
    }
    let n = samples.len();
    let m = samples.inputs();
    if n <= na + nb + nk {
        return Err(Error::InvalidArgument(format!("record of {n} samples is too short for the ARX orders")));
    }
    let k0 = na.max(nk + nb - 1);
    let rows = n - k0;
    let cols = na + m * nb;
    if rows < cols {
        return Err(Error::InvalidArgument(format!("{rows} rows for {cols} ARX parameters")));
    }
    let mut a_out = Vec::with_capacity(samples.outputs());
    let mut b_out = Vec::with_capacity(samples.outputs());
    let mut res2 = 0.0;
    let mut cond: f64 = 0.0;
    let mut row = vec![0.0; cols];
    for y in &samples.y {
        let mut phi = DMatrix::zeros(rows, cols);
        let mut target = DVector::zeros(rows);
        for r in 0..rows {
            let k = k0 + r;
            regressor_row(y, &samples.u, k, na, nb, nk, &mut row);
            for (c, v) in row.iter().enumerate() {
                phi[(r, c)] = *v;
            }
            target[r] = y[k];
        }
        // identically zero regressors carry no information; their minimum-norm
        // coefficient is zero
        let live: Vec<usize> = (0..cols).filter(|&c| phi.column(c).iter().any(|&v| v != 0.0)).collect();
        let mut theta = vec![0.0; cols];
        if live.is_empty() {
            res2 += target.norm_squared();
        } else {
            let sub = phi.select_columns(&live);
            let sol = lstsq(&sub, &target)?;
            for (i, &c) in live.iter().enumerate() {
                theta[c] = sol.theta[i];
            }
            res2 += sol.residual_norm.powi(2);
            cond = cond.max(sol.condition_number);
        }
        let mut a = vec![1.0];
        a.extend_from_slice(&theta[..na]);
        a_out.push(a);
        b_out.push((0..m).map(|j| theta[na + j * nb..na + (j + 1) * nb].to_vec()).collect());
    }
    Ok(ArxModel { a: a_out, b: b_out, na, nb, nk, h: samples.h, residual_norm: res2.sqrt(), condition_number: cond })
}

impl ArxModel {
    pub fn outputs(&self) -> usize {
        self.a.len()
    }

    pub fn inputs(&self) -> usize {
        self.b.first().map_or(0, Vec::len)
    }

    /// Sum of squared equation errors on a record, over the rows used by the fit.
    pub fn equation_error_sse(&self, samples: &SampledRecord) -> f64 {
        let (na, nb, nk) = (self.na, self.nb, self.nk);
        let k0 = na.max(nk + nb - 1);
        let mut sse = 0.0;
        for (i, y) in samples.y.iter().enumerate() {
            for k in k0..samples.len() {
                let mut e = y[k];
                for l in 1..=na {
                    e += self.a[i][l] * y[k - l];
                }
                for (j, u) in samples.u.iter().enumerate() {
                    for b in 0..nb {
                        e -= self.b[i][j][b] * u[k - nk - b];
                    }
                }
                sse += e * e;
            }
        }
        sse
    }

    /// Poles per output equation: roots of `z^na A_i(z⁻¹)`.
    pub fn poles(&self) -> Vec<Complex64> {
        self.a
            .iter()
            .flat_map(|a| Polynomial::new(a.iter().rev().copied().collect::<Vec<_>>()).roots())
            .collect()
    }
}

/// `B_ij(z⁻¹) / A_i(z⁻¹)` at `z = exp(jωh)`, strictly below the Nyquist rate.
pub fn arx_freq_response(model: &ArxModel, omega: f64) -> Result<CMatrix> {
    let limit = std::f64::consts::PI / model.h;
    if !(omega.abs() < limit) {
        return Err(Error::AboveNyquist { omega, limit });
    }
    let zinv = Complex64::from_polar(1.0, -omega * model.h);
    let horner = |c: &[f64]| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &v| acc * zinv + v);
    let delay = zinv.powu(model.nk as u32);
    let mut g = CMatrix::zeros(model.outputs(), model.inputs());
    for i in 0..model.outputs() {
        let a = horner(&model.a[i]);
        let scale: f64 = model.a[i].iter().map(|v| v.abs()).sum();
        if a.norm() <= 1e-13 * scale {
            return Err(Error::AtPole { re: zinv.re, im: -zinv.im });
        }
        for j in 0..model.inputs() {
            g[(i, j)] = delay * horner(&model.b[i][j]) / a;
        }
    }
    Ok(g)
}

impl LinearModel for ArxModel {
    fn shape(&self) -> (usize, usize) {
        (self.outputs(), self.inputs())
    }

    fn frequency_response(&self, omega: f64) -> Result<CMatrix> {
        arx_freq_response(self, omega)
    }

    fn unstable_pole_count(&self) -> Result<usize> {
        let mut count = 0;
        for p in self.poles() {
            let r = p.norm();
            if (r - 1.0).abs() <= BOUNDARY_TOL {
                return Err(Error::BoundaryPole { re: p.re, im: p.im });
            }
            count += usize::from(r > 1.0);
        }
        Ok(count)
    }

    fn nyquist_limit(&self) -> Option<f64> {
        Some(std::f64::consts::PI / self.h)
    }
}
