use serde::{Deserialize, Serialize};

use super::filter::{build_filter_bank, DerivativeMatrix, HoldAlignment, SampledBank, SvfFilter};
use super::regression::{assemble_regression_rows, RegressionData, Structure};
use crate::error::{Error, Result};
use crate::lsq::lstsq;
use crate::lti::{MatrixFraction, Model, RationalTransfer};
use crate::poly::Polynomial;

/// Identified parameters with the model they encode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEstimate", into = "RawEstimate")]
pub struct Estimate {
    pub theta: Vec<f64>,
    pub labels: Vec<String>,
    pub structure: Structure,
    pub model: Model,
    pub residual_norm: f64,
    pub condition_number: f64,
}

#[derive(Serialize, Deserialize)]
struct RawEstimate {
    theta: Vec<f64>,
    labels: Vec<String>,
    structure: Structure,
    residual_norm: f64,
    condition_number: f64,
}

impl TryFrom<RawEstimate> for Estimate {
    type Error = Error;
    fn try_from(raw: RawEstimate) -> Result<Self> {
        let model = model_from_theta(&raw.theta, raw.structure)?;
        Ok(Estimate {
            theta: raw.theta,
            labels: raw.labels,
            structure: raw.structure,
            model,
            residual_norm: raw.residual_norm,
            condition_number: raw.condition_number,
        })
    }
}

impl From<Estimate> for RawEstimate {
    fn from(e: Estimate) -> Self {
        RawEstimate {
            theta: e.theta,
            labels: e.labels,
            structure: e.structure,
            residual_norm: e.residual_norm,
            condition_number: e.condition_number,
        }
    }
}

/// Rebuilds `N(p)/d(p)` from `θ = [d_{n-1}..d_0, N_11, …, N_lm]`, each
/// numerator block in descending powers.
pub fn model_from_theta(theta: &[f64], s: Structure) -> Result<Model> {
    let n = s.n;
    if theta.len() != s.parameter_count() {
        return Err(Error::Dimension(format!(
            "θ has {} entries, structure needs {}",
            theta.len(),
            s.parameter_count()
        )));
    }
    let ascending = |block: &[f64]| -> Vec<f64> { block.iter().rev().copied().collect() };
    let mut den = ascending(&theta[..n]);
    den.push(1.0);
    let den = Polynomial::new(den);
    let block = |i: usize, j: usize| {
        let o = n + (i * s.m + j) * n;
        Polynomial::new(ascending(&theta[o..o + n]))
    };
    if s.m == 1 && s.l == 1 {
        Ok(Model::Siso(RationalTransfer::new(block(0, 0), den)?))
    } else {
        let num = (0..s.l).map(|i| (0..s.m).map(|j| block(i, j)).collect()).collect();
        Ok(Model::Mfd(MatrixFraction::new(den, num)?))
    }
}

/// Inverse of [`model_from_theta`].
pub fn theta_from_model(model: &Model) -> (Vec<f64>, Structure) {
    let descending = |p: &Polynomial, n: usize| -> Vec<f64> { (0..n).rev().map(|k| p.coeff(k)).collect() };
    match model {
        Model::Siso(tf) => {
            let n = tf.order();
            let mut th = descending(tf.den(), n);
            th.extend(descending(tf.num(), n));
            (th, Structure::siso(n))
        }
        Model::Mfd(mfd) => {
            let n = mfd.order();
            let mut th = descending(mfd.den(), n);
            for i in 0..mfd.outputs() {
                for j in 0..mfd.inputs() {
                    th.extend(descending(mfd.num(i, j), n));
                }
            }
            (th, Structure { n, m: mfd.inputs(), l: mfd.outputs() })
        }
    }
}

/// Least-squares estimate from an assembled regression.
pub fn solve_ls(reg: &RegressionData, s: Structure) -> Result<Estimate> {
    let sol = lstsq(&reg.d_f, &reg.y_a)?;
    let theta: Vec<f64> = sol.theta.iter().copied().collect();
    let model = model_from_theta(&theta, s)?;
    Ok(Estimate {
        theta,
        labels: reg.labels.clone(),
        structure: s,
        model,
        residual_norm: sol.residual_norm,
        condition_number: sol.condition_number,
    })
}

/// Knobs for [`identify_svf_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SvfOptions {
    pub hold: HoldAlignment,
}

/// First sample index with `t >= t0 + discard`.
fn first_row(discard: f64, h: f64) -> usize {
    let r = discard / h;
    let k = r.round();
    if (r - k).abs() <= 1e-9 * k.max(1.0) {
        k as usize
    } else {
        r.ceil() as usize
    }
}

/// Filters every channel of the record and assembles the regression, keeping
/// rows at `t >= t0 + discard`.
pub fn svf_regression(
    samples: &crate::sim::SampledRecord,
    s: Structure,
    filter: &SvfFilter,
    discard: f64,
    opts: SvfOptions,
) -> Result<RegressionData> {
    if !(discard >= 0.0) {
        return Err(Error::InvalidArgument(format!("discard must be non-negative, got {discard}")));
    }
    if filter.max_derivative != s.n {
        return Err(Error::InvalidArgument(format!(
            "filter prepared for order {}, structure has order {}",
            filter.max_derivative, s.n
        )));
    }
    if samples.inputs() != s.m || samples.outputs() != s.l {
        return Err(Error::Dimension(format!(
            "record has {} inputs and {} outputs, structure expects {} and {}",
            samples.inputs(),
            samples.outputs(),
            s.m,
            s.l
        )));
    }
    let bank = SampledBank::new(&build_filter_bank(filter)?, samples.h)?;
    let yds: Vec<DerivativeMatrix> = samples.y.iter().map(|c| bank.filter(c, opts.hold)).collect();
    let uds: Vec<DerivativeMatrix> = samples.u.iter().map(|c| bank.filter(c, opts.hold)).collect();
    let first = first_row(discard, samples.h);
    if first + s.parameter_count() > samples.len() {
        return Err(Error::InvalidArgument(format!(
            "discarding {discard} s leaves fewer rows than the {} parameters",
            s.parameter_count()
        )));
    }
    let yr: Vec<&DerivativeMatrix> = yds.iter().collect();
    let ur: Vec<&DerivativeMatrix> = uds.iter().collect();
    assemble_regression_rows(&yr, &ur, s, first)
}

/// End-to-end SVF identification of an `(n, m, l)` model.
pub fn identify_svf(
    samples: &crate::sim::SampledRecord,
    s: Structure,
    filter: &SvfFilter,
    discard: f64,
) -> Result<Estimate> {
    identify_svf_with(samples, s, filter, discard, SvfOptions::default())
}

pub fn identify_svf_with(
    samples: &crate::sim::SampledRecord,
    s: Structure,
    filter: &SvfFilter,
    discard: f64,
    opts: SvfOptions,
) -> Result<Estimate> {
    let reg = svf_regression(samples, s, filter, discard, opts)?;
    solve_ls(&reg, s)
}
