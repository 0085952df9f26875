use nalgebra::DMatrix;
use num_complex::Complex64;

use super::model::{
    count_outside_unit_circle, count_rhp, CMatrix, LinearModel, MatrixFraction, Model,
    RationalTransfer,
};
use crate::error::{Error, Result};

fn dims_ok(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n
        || b.nrows() != n
        || c.ncols() != n
        || d.nrows() != c.nrows()
        || d.ncols() != b.ncols()
    {
        return Err(Error::Dimension(format!(
            "A {}x{}, B {}x{}, C {}x{}, D {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            c.nrows(),
            c.ncols(),
            d.nrows(),
            d.ncols()
        )));
    }
    Ok(())
}

fn all_finite(ms: &[&DMatrix<f64>]) -> bool {
    ms.iter().all(|m| m.iter().all(|v| v.is_finite()))
}

pub(crate) fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    a.complex_eigenvalues().iter().copied().collect()
}

fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// `C (zI - A)^{-1} B + D` at an arbitrary complex point.
fn resolvent_gain(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
    z: Complex64,
) -> Result<CMatrix> {
    let n = a.nrows();
    if n == 0 {
        return Ok(to_complex(d));
    }
    let m = CMatrix::from_diagonal_element(n, n, z) - to_complex(a);
    let lu = m.lu();
    let x = lu
        .solve(&to_complex(b))
        .filter(|x| x.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
    let x = match x {
        Some(x) => x,
        None => {
            let pole = eigenvalues(a)
                .into_iter()
                .min_by(|p, q| (p - z).norm().total_cmp(&(q - z).norm()))
                .unwrap_or(z);
            return Err(Error::AtPole { re: pole.re, im: pole.im });
        }
    };
    Ok(to_complex(c) * x + to_complex(d))
}

/// Continuous-time `ẋ = Ax + Bu`, `y = Cx + Du`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        dims_ok(&a, &b, &c, &d)?;
        if !all_finite(&[&a, &b, &c, &d]) {
            return Err(Error::NonFinite("state-space matrices".into()));
        }
        Ok(Self { a, b, c, d })
    }

    /// Pure feedthrough with no states.
    pub fn static_gain(d: DMatrix<f64>) -> Self {
        let (l, m) = d.shape();
        Self { a: DMatrix::zeros(0, 0), b: DMatrix::zeros(0, m), c: DMatrix::zeros(l, 0), d }
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        eigenvalues(&self.a)
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.re < 0.0)
    }

    pub fn eval(&self, s: Complex64) -> Result<CMatrix> {
        resolvent_gain(&self.a, &self.b, &self.c, &self.d, s)
    }
}

impl LinearModel for StateSpace {
    fn shape(&self) -> (usize, usize) {
        (self.outputs(), self.inputs())
    }

    fn frequency_response(&self, omega: f64) -> Result<CMatrix> {
        self.eval(Complex64::new(0.0, omega))
    }

    fn unstable_pole_count(&self) -> Result<usize> {
        count_rhp(&self.poles())
    }
}

/// Sampled `x[k+1] = Ad x[k] + Bd u[k]`, `y[k] = Cd x[k] + Dd u[k]` with interval `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteStateSpace {
    pub ad: DMatrix<f64>,
    pub bd: DMatrix<f64>,
    pub cd: DMatrix<f64>,
    pub dd: DMatrix<f64>,
    pub h: f64,
}

impl DiscreteStateSpace {
    pub fn new(
        ad: DMatrix<f64>,
        bd: DMatrix<f64>,
        cd: DMatrix<f64>,
        dd: DMatrix<f64>,
        h: f64,
    ) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("sampling interval must be positive, got {h}")));
        }
        dims_ok(&ad, &bd, &cd, &dd)?;
        if !all_finite(&[&ad, &bd, &cd, &dd]) {
            return Err(Error::NonFinite("discrete state-space matrices".into()));
        }
        Ok(Self { ad, bd, cd, dd, h })
    }

    pub fn states(&self) -> usize {
        self.ad.nrows()
    }

    pub fn poles(&self) -> Vec<Complex64> {
        eigenvalues(&self.ad)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.poles().iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

impl LinearModel for DiscreteStateSpace {
    fn shape(&self) -> (usize, usize) {
        (self.cd.nrows(), self.bd.ncols())
    }

    fn frequency_response(&self, omega: f64) -> Result<CMatrix> {
        let z = Complex64::from_polar(1.0, omega * self.h);
        resolvent_gain(&self.ad, &self.bd, &self.cd, &self.dd, z)
    }

    fn unstable_pole_count(&self) -> Result<usize> {
        count_outside_unit_circle(&self.poles())
    }

    fn nyquist_limit(&self) -> Option<f64> {
        Some(std::f64::consts::PI / self.h)
    }
}

/// Controllable canonical form of a proper scalar transfer function.
pub fn realize_siso(tf: &RationalTransfer) -> StateSpace {
    let den = tf.den();
    let n = den.degree();
    let dgain = tf.num().coeff(n);
    // strictly proper remainder num - D·den, degree < n
    let rem: Vec<f64> = (0..n).map(|i| tf.num().coeff(i) - dgain * den.coeff(i)).collect();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        a[(i, i + 1)] = 1.0;
    }
    if n > 0 {
        for j in 0..n {
            a[(n - 1, j)] = -den.coeff(j);
        }
    }
    let mut b = DMatrix::zeros(n, 1);
    if n > 0 {
        b[(n - 1, 0)] = 1.0;
    }
    let c = DMatrix::from_row_slice(1, n, &rem);
    StateSpace { a, b, c, d: DMatrix::from_element(1, 1, dgain) }
}

/// One observer-form block of size `n = deg d` per output row, all sharing
/// `d`. Row `i` has `A = companion(d)ᵀ`, `C = e_nᵀ`, and column `j` of its
/// `B` holds the coefficients of `N_ij`.
pub fn realize_mfd(mfd: &MatrixFraction) -> StateSpace {
    let n = mfd.order();
    let (l, m) = (mfd.outputs(), mfd.inputs());
    let mut a = DMatrix::zeros(n * l, n * l);
    let mut b = DMatrix::zeros(n * l, m);
    let mut c = DMatrix::zeros(l, n * l);
    for i in 0..l {
        let o = i * n;
        for k in 1..n {
            a[(o + k, o + k - 1)] = 1.0;
        }
        for k in 0..n {
            a[(o + k, o + n - 1)] = -mfd.den().coeff(k);
            for j in 0..m {
                b[(o + k, j)] = mfd.num(i, j).coeff(k);
            }
        }
        c[(i, o + n - 1)] = 1.0;
    }
    StateSpace { a, b, c, d: DMatrix::zeros(l, m) }
}

pub fn realize(model: &Model) -> StateSpace {
    match model {
        Model::Siso(tf) => realize_siso(tf),
        Model::Mfd(m) => realize_mfd(m),
    }
}

/// Zero-order-hold discretization from one exponential of
/// `[[A, B], [0, 0]]·h`, whose top blocks are `e^{Ah}` and `Φ(h)B`.
pub fn c2d_zoh(ss: &StateSpace, h: f64) -> Result<DiscreteStateSpace> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("sampling interval must be positive, got {h}")));
    }
    let (n, m) = (ss.states(), ss.inputs());
    let mut aug = DMatrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(&ss.a * h));
    aug.view_mut((0, n), (n, m)).copy_from(&(&ss.b * h));
    let e = aug.exp();
    let ad = e.view((0, 0), (n, n)).into_owned();
    let bd = e.view((0, n), (n, m)).into_owned();
    if !all_finite(&[&ad, &bd]) {
        return Err(Error::NonFinite(format!("discretization at h = {h}")));
    }
    Ok(DiscreteStateSpace { ad, bd, cd: ss.c.clone(), dd: ss.d.clone(), h })
}
