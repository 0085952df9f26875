use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::filter::DerivativeMatrix;
use crate::error::{Error, Result};

/// Model structure: order `n`, `m` inputs, `l` outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub n: usize,
    pub m: usize,
    pub l: usize,
}

impl Structure {
    pub fn siso(n: usize) -> Self {
        Self { n, m: 1, l: 1 }
    }

    pub fn parameter_count(&self) -> usize {
        self.n + self.n * self.m * self.l
    }

    /// Parameter names in θ order.
    pub fn labels(&self) -> Vec<String> {
        let n = self.n;
        let mut out: Vec<String> = (0..n).rev().map(|k| format!("d{k}")).collect();
        if self.m == 1 && self.l == 1 {
            out.extend((0..n).rev().map(|k| format!("n{k}")));
        } else {
            for i in 1..=self.l {
                for j in 1..=self.m {
                    out.extend((0..n).rev().map(|k| format!("n{i}{j}_{k}")));
                }
            }
        }
        out
    }
}

/// The stacked regression `Y_A = D_F θ + E`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionData {
    pub y_a: DVector<f64>,
    pub d_f: DMatrix<f64>,
    pub labels: Vec<String>,
}

impl RegressionData {
    pub fn residual(&self, theta: &[f64]) -> DVector<f64> {
        &self.y_a - &self.d_f * DVector::from_column_slice(theta)
    }
}

fn check_rows(mats: &[&DerivativeMatrix], n: usize, first: usize) -> Result<usize> {
    let rows = mats[0].rows;
    for d in mats {
        if d.rows != rows {
            return Err(Error::Dimension(format!("derivative matrices have {} and {} rows", rows, d.rows)));
        }
        if d.cols != n + 1 {
            return Err(Error::Dimension(format!("expected {} derivative columns, got {}", n + 1, d.cols)));
        }
    }
    if first > rows {
        return Err(Error::Dimension(format!("first row {first} beyond {rows} rows")));
    }
    Ok(rows)
}

/// `Y_A` = column `n` of `yd`; `D_F = [-yd cols n-1..0, ud cols n-1..0]`.
pub fn assemble_regression_siso(yd: &DerivativeMatrix, ud: &DerivativeMatrix, n: usize) -> Result<RegressionData> {
    assemble_regression_rows(&[yd], &[ud], Structure::siso(n), 0)
}

/// Block regression for an `(n, m, l)` matrix fraction: block row `i` is
/// `[-Y_i, 0, …, U, …, 0]` with `U = [U_1 … U_m]` in block column `i`.
pub fn assemble_regression_mimo(
    yds: &[DerivativeMatrix],
    uds: &[DerivativeMatrix],
    s: Structure,
) -> Result<RegressionData> {
    let yr: Vec<&DerivativeMatrix> = yds.iter().collect();
    let ur: Vec<&DerivativeMatrix> = uds.iter().collect();
    assemble_regression_rows(&yr, &ur, s, 0)
}

/// As [`assemble_regression_mimo`], keeping sample rows `first..` only.
pub fn assemble_regression_rows(
    yds: &[&DerivativeMatrix],
    uds: &[&DerivativeMatrix],
    s: Structure,
    first: usize,
) -> Result<RegressionData> {
    let Structure { n, m, l } = s;
    if n == 0 || yds.len() != l || uds.len() != m || l == 0 || m == 0 {
        return Err(Error::Dimension(format!(
            "structure (n={n}, m={m}, l={l}) with {} output and {} input channels",
            yds.len(),
            uds.len()
        )));
    }
    let all: Vec<&DerivativeMatrix> = yds.iter().chain(uds).copied().collect();
    let total = check_rows(&all, n, first)?;
    let rows = total - first;
    let cols = s.parameter_count();
    let mut d_f = DMatrix::zeros(rows * l, cols);
    let mut y_a = DVector::zeros(rows * l);
    for (i, yd) in yds.iter().enumerate() {
        let r0 = i * rows;
        let base = n + i * n * m;
        for r in 0..rows {
            let src = first + r;
            y_a[r0 + r] = yd.get(src, n);
            for c in 0..n {
                d_f[(r0 + r, c)] = -yd.get(src, n - 1 - c);
            }
            for (j, ud) in uds.iter().enumerate() {
                for c in 0..n {
                    d_f[(r0 + r, base + j * n + c)] = ud.get(src, n - 1 - c);
                }
            }
        }
    }
    Ok(RegressionData { y_a, d_f, labels: s.labels() })
}
