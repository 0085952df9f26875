use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Polynomial;

pub type CMatrix = DMatrix<Complex64>;

/// Tolerance on |Re λ| (or ||z| - 1| for discrete models) below which a pole
/// is treated as lying on the stability boundary.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Anything with a frequency response and a count of unstable poles.
pub trait LinearModel {
    /// `(outputs, inputs)`.
    fn shape(&self) -> (usize, usize);

    /// Gain matrix at `s = jω` (continuous) or `z = exp(jωh)` (discrete).
    fn frequency_response(&self, omega: f64) -> Result<CMatrix>;

    /// Poles in the open right half-plane (continuous) or outside the unit
    /// circle (discrete). Boundary poles are rejected.
    fn unstable_pole_count(&self) -> Result<usize>;

    /// Highest meaningful frequency, `Some(π/h)` for sampled models.
    fn nyquist_limit(&self) -> Option<f64> {
        None
    }
}

pub(crate) fn count_rhp(poles: &[Complex64]) -> Result<usize> {
    let mut count = 0;
    for p in poles {
        if p.re.abs() <= BOUNDARY_TOL {
            return Err(Error::BoundaryPole { re: p.re, im: p.im });
        }
        if p.re > 0.0 {
            count += 1;
        }
    }
    Ok(count)
}

pub(crate) fn count_outside_unit_circle(poles: &[Complex64]) -> Result<usize> {
    let mut count = 0;
    for p in poles {
        let r = p.norm();
        if (r - 1.0).abs() <= BOUNDARY_TOL {
            return Err(Error::BoundaryPole { re: p.re, im: p.im });
        }
        if r > 1.0 {
            count += 1;
        }
    }
    Ok(count)
}

fn check_finite(p: &Polynomial, what: &str) -> Result<()> {
    if p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{what} has non-finite coefficients")))
    }
}

/// `num(s) / den(s)` with a monic denominator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTransfer", into = "RawTransfer")]
pub struct RationalTransfer {
    num: Polynomial,
    den: Polynomial,
}

#[derive(Serialize, Deserialize)]
struct RawTransfer {
    num: Polynomial,
    den: Polynomial,
}

impl TryFrom<RawTransfer> for RationalTransfer {
    type Error = Error;
    fn try_from(raw: RawTransfer) -> Result<Self> {
        RationalTransfer::new(raw.num, raw.den)
    }
}

impl From<RationalTransfer> for RawTransfer {
    fn from(tf: RationalTransfer) -> Self {
        RawTransfer { num: tf.num, den: tf.den }
    }
}

impl RationalTransfer {
    /// Normalizes the denominator to monic, folding its leading coefficient
    /// into the numerator.
    pub fn new(num: impl Into<Polynomial>, den: impl Into<Polynomial>) -> Result<Self> {
        let (num, den) = (num.into(), den.into());
        check_finite(&num, "numerator")?;
        check_finite(&den, "denominator")?;
        if den.is_zero() {
            return Err(Error::InvalidModel("zero denominator".into()));
        }
        if !num.is_zero() && num.degree() > den.degree() {
            return Err(Error::Improper { num: num.degree(), den: den.degree() });
        }
        let lead = den.leading();
        Ok(Self { num: num.scale(1.0 / lead), den: den.scale(1.0 / lead) })
    }

    pub fn gain(k: f64) -> Self {
        Self { num: Polynomial::constant(k), den: Polynomial::one() }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn order(&self) -> usize {
        self.den.degree()
    }

    /// `deg den - deg num`; a zero numerator counts as infinitely strictly proper.
    pub fn relative_degree(&self) -> usize {
        if self.num.is_zero() {
            usize::MAX
        } else {
            self.den.degree() - self.num.degree()
        }
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.den.roots()
    }

    pub fn is_stable(&self) -> bool {
        self.poles().iter().all(|p| p.re < 0.0)
    }

    /// Evaluate at a complex frequency, rejecting points on a pole.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let d = self.den.eval_complex(s);
        if d.norm() <= 1e-13 * self.den.magnitude_bound(s) {
            return Err(Error::AtPole { re: s.re, im: s.im });
        }
        Ok(self.num.eval_complex(s) / d)
    }

    /// `p^k` times this transfer function.
    pub fn times_power(&self, k: usize) -> Result<Self> {
        Self::new(&self.num * &Polynomial::monomial(k), self.den.clone())
    }
}

impl LinearModel for RationalTransfer {
    fn shape(&self) -> (usize, usize) {
        (1, 1)
    }

    fn frequency_response(&self, omega: f64) -> Result<CMatrix> {
        let g = self.eval(Complex64::new(0.0, omega))?;
        Ok(CMatrix::from_element(1, 1, g))
    }

    fn unstable_pole_count(&self) -> Result<usize> {
        count_rhp(&self.poles())
    }
}

/// `N(s) / d(s)`: an ℓ×m grid of numerators over one monic common
/// denominator, every numerator of degree below `deg d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFraction", into = "RawFraction")]
pub struct MatrixFraction {
    den: Polynomial,
    num: Vec<Vec<Polynomial>>,
}

#[derive(Serialize, Deserialize)]
struct RawFraction {
    den: Polynomial,
    num: Vec<Vec<Polynomial>>,
}

impl TryFrom<RawFraction> for MatrixFraction {
    type Error = Error;
    fn try_from(raw: RawFraction) -> Result<Self> {
        MatrixFraction::new(raw.den, raw.num)
    }
}

impl From<MatrixFraction> for RawFraction {
    fn from(m: MatrixFraction) -> Self {
        RawFraction { den: m.den, num: m.num }
    }
}

impl MatrixFraction {
    pub fn new(den: impl Into<Polynomial>, num: Vec<Vec<Polynomial>>) -> Result<Self> {
        let den = den.into();
        check_finite(&den, "denominator")?;
        if den.is_zero() {
            return Err(Error::InvalidModel("zero denominator".into()));
        }
        let n = den.degree();
        if n == 0 {
            return Err(Error::InvalidModel("matrix fraction needs a denominator of degree >= 1".into()));
        }
        let rows = num.len();
        let cols = num.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || num.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("numerator grid must be a non-empty rectangle".into()));
        }
        let lead = den.leading();
        let mut scaled = Vec::with_capacity(rows);
        for row in &num {
            let mut out = Vec::with_capacity(cols);
            for p in row {
                check_finite(p, "numerator")?;
                if !p.is_zero() && p.degree() >= n {
                    return Err(Error::Improper { num: p.degree(), den: n });
                }
                out.push(p.scale(1.0 / lead));
            }
            scaled.push(out);
        }
        Ok(Self { den: den.scale(1.0 / lead), num: scaled })
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn num(&self, i: usize, j: usize) -> &Polynomial {
        &self.num[i][j]
    }

    pub fn numerators(&self) -> &[Vec<Polynomial>] {
        &self.num
    }

    pub fn order(&self) -> usize {
        self.den.degree()
    }

    pub fn outputs(&self) -> usize {
        self.num.len()
    }

    pub fn inputs(&self) -> usize {
        self.num[0].len()
    }

    pub fn eval(&self, s: Complex64) -> Result<CMatrix> {
        let d = self.den.eval_complex(s);
        if d.norm() <= 1e-13 * self.den.magnitude_bound(s) {
            return Err(Error::AtPole { re: s.re, im: s.im });
        }
        Ok(CMatrix::from_fn(self.outputs(), self.inputs(), |i, j| {
            self.num[i][j].eval_complex(s) / d
        }))
    }

    /// Entry `(i, j)` as a scalar transfer function.
    pub fn entry(&self, i: usize, j: usize) -> RationalTransfer {
        RationalTransfer { num: self.num[i][j].clone(), den: self.den.clone() }
    }
}

impl LinearModel for MatrixFraction {
    fn shape(&self) -> (usize, usize) {
        (self.outputs(), self.inputs())
    }

    fn frequency_response(&self, omega: f64) -> Result<CMatrix> {
        self.eval(Complex64::new(0.0, omega))
    }

    /// Counted on the stacked per-row realization, so every unstable root of
    /// `d` contributes once per output row.
    fn unstable_pole_count(&self) -> Result<usize> {
        Ok(count_rhp(&self.den.roots())? * self.outputs())
    }
}

/// A continuous-time polynomial model literal: scalar `{num, den}` or
/// matrix fraction `{den, num: [[..]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Model {
    Siso(RationalTransfer),
    Mfd(MatrixFraction),
}

impl Model {
    pub fn order(&self) -> usize {
        match self {
            Model::Siso(tf) => tf.order(),
            Model::Mfd(m) => m.order(),
        }
    }

    pub fn eval(&self, s: Complex64) -> Result<CMatrix> {
        match self {
            Model::Siso(tf) => Ok(CMatrix::from_element(1, 1, tf.eval(s)?)),
            Model::Mfd(m) => m.eval(s),
        }
    }
}

impl From<RationalTransfer> for Model {
    fn from(tf: RationalTransfer) -> Self {
        Model::Siso(tf)
    }
}

impl From<MatrixFraction> for Model {
    fn from(m: MatrixFraction) -> Self {
        Model::Mfd(m)
    }
}

impl LinearModel for Model {
    fn shape(&self) -> (usize, usize) {
        match self {
            Model::Siso(tf) => tf.shape(),
            Model::Mfd(m) => m.shape(),
        }
    }

    fn frequency_response(&self, omega: f64) -> Result<CMatrix> {
        match self {
            Model::Siso(tf) => tf.frequency_response(omega),
            Model::Mfd(m) => m.frequency_response(omega),
        }
    }

    fn unstable_pole_count(&self) -> Result<usize> {
        match self {
            Model::Siso(tf) => tf.unstable_pole_count(),
            Model::Mfd(m) => m.unstable_pole_count(),
        }
    }
}

impl<T: LinearModel + ?Sized> LinearModel for &T {
    fn shape(&self) -> (usize, usize) {
        (**self).shape()
    }
    fn frequency_response(&self, omega: f64) -> Result<CMatrix> {
        (**self).frequency_response(omega)
    }
    fn unstable_pole_count(&self) -> Result<usize> {
        (**self).unstable_pole_count()
    }
    fn nyquist_limit(&self) -> Option<f64> {
        (**self).nyquist_limit()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec())
    }

    #[test]
    fn monic_normalization_folds_scale() {
        let k = RationalTransfer::new(p(&[7.0, 3.0]), p(&[-2.0, 0.2])).unwrap();
        assert_eq!(k.den().leading(), 1.0);
        assert_abs_diff_eq!(k.den().coeff(0), -10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.num().coeff(1), 15.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.num().coeff(0), 35.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_zero_denominator_and_improper() {
        assert!(matches!(
            RationalTransfer::new(p(&[1.0]), p(&[0.0])),
            Err(Error::InvalidModel(_))
        ));
        assert!(matches!(
            RationalTransfer::new(p(&[0.0, 0.0, 1.0]), p(&[1.0, 1.0])),
            Err(Error::Improper { num: 2, den: 1 })
        ));
    }

    #[test]
    fn unstable_first_order_response() {
        let g = RationalTransfer::new(p(&[1.0]), p(&[-1.0, 1.0])).unwrap();
        assert_abs_diff_eq!(g.frequency_response(0.0).unwrap()[(0, 0)].re, -1.0);
        // 1/(j - 1) = (-1 - j)/2
        let z = g.frequency_response(1.0).unwrap()[(0, 0)];
        assert_abs_diff_eq!(z.re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(z.im, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn evaluation_at_pole_is_rejected() {
        let g = RationalTransfer::new(p(&[1.0]), p(&[1.0, 0.0, 1.0])).unwrap();
        assert!(matches!(g.frequency_response(1.0), Err(Error::AtPole { .. })));
    }

    #[test]
    fn rhp_counts() {
        let p1 = RationalTransfer::new(p(&[1.0]), p(&[-1.0, 1.0])).unwrap();
        let p2 = RationalTransfer::new(p(&[1.0, 1.0]), p(&[1.0, 0.5, 1.0])).unwrap();
        let p3 = RationalTransfer::new(p(&[-1.0, 1.0]), p(&[-4.0, 0.0, 1.0])).unwrap();
        assert_eq!(p1.unstable_pole_count().unwrap(), 1);
        assert_eq!(p2.unstable_pole_count().unwrap(), 0);
        assert_eq!(p3.unstable_pole_count().unwrap(), 1);
        let integrator = RationalTransfer::new(p(&[1.0]), p(&[0.0, 1.0])).unwrap();
        assert!(matches!(integrator.unstable_pole_count(), Err(Error::BoundaryPole { .. })));
    }

    #[test]
    fn model_literals_parse() {
        let siso: Model = serde_json::from_str(r#"{"num":[1],"den":[-1,1]}"#).unwrap();
        assert!(matches!(siso, Model::Siso(_)));
        let mfd: Model =
            serde_json::from_str(r#"{"den":[-1,0,1],"num":[[[1],[0,1]],[[2],[1]]]}"#).unwrap();
        match mfd {
            Model::Mfd(m) => assert_eq!(m.shape(), (2, 2)),
            _ => panic!("expected matrix fraction"),
        }
        let bad: std::result::Result<Model, _> = serde_json::from_str(r#"{"num":[1],"den":[0]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn mfd_rejects_full_degree_numerator() {
        let r = MatrixFraction::new(p(&[1.0, 1.0]), vec![vec![p(&[0.0, 1.0])]]);
        assert!(matches!(r, Err(Error::Improper { .. })));
    }
}
