use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{c2d_zoh, h2_norm_ct, h2_norm_dt, realize_siso, RationalTransfer};
use crate::metrics::loglog_slope;
use crate::sim::{channel_rng, mix_seed};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Row {
    pub h: f64,
    pub discrete_norm2: f64,
    pub scaled_norm2: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub rows: Vec<Lemma1Row>,
    pub pass: bool,
}

/// Compares `‖F_h‖₂²` of the zero-order-hold discretization with `h‖F‖₂²`.
/// Passes when the smallest `h` is within 2% and `|ratio − 1|` shrinks
/// monotonically once `h <= 1e-2`.
pub fn cmd_verify_lemma1(filter: &RationalTransfer, hs: &[f64]) -> Result<Lemma1Report> {
    if hs.is_empty() {
        return Err(Error::InvalidArgument("no sampling intervals given".into()));
    }
    let ss = realize_siso(filter);
    let ct = h2_norm_ct(&ss)?.powi(2);
    let mut rows = Vec::with_capacity(hs.len());
    for &h in hs {
        let dt = h2_norm_dt(&c2d_zoh(&ss, h)?)?.powi(2);
        rows.push(Lemma1Row { h, discrete_norm2: dt, scaled_norm2: h * ct, ratio: dt / (h * ct) });
    }
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| b.h.total_cmp(&a.h));
    let dev: Vec<f64> = sorted.iter().filter(|r| r.h <= 1e-2).map(|r| (r.ratio - 1.0).abs()).collect();
    let monotone = dev.windows(2).all(|w| w[1] <= w[0]);
    let last = sorted.last().expect("non-empty");
    Ok(Lemma1Report { pass: (last.ratio - 1.0).abs() < 0.02 && monotone, rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSettings {
    pub sigma: f64,
    pub t_final: f64,
    pub runs: usize,
    pub seed: u64,
}

impl Default for CovarianceSettings {
    fn default() -> Self {
        Self { sigma: 1.0, t_final: 20.0, runs: 200, seed: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceRow {
    pub h: f64,
    pub samples: usize,
    pub trace: f64,
    /// `σ² h tr(R⁻¹)` with `R = ∫₀^T φφᵀ dt`.
    pub predicted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub rows: Vec<CovarianceRow>,
    pub slope: Option<f64>,
    pub pass: bool,
}

fn regressor(t: f64) -> Vector2<f64> {
    Vector2::new(t.sin(), t.cos())
}

/// `∫₀^T [sin t, cos t]ᵀ [sin t, cos t] dt`.
fn gram_integral(t: f64) -> Matrix2<f64> {
    let s2 = (2.0 * t).sin() / 4.0;
    let sc = t.sin().powi(2) / 2.0;
    Matrix2::new(t / 2.0 - s2, sc, sc, t / 2.0 + s2)
}

/// Monte Carlo check of the covariance scaling of least squares with
/// `φ(t) = [sin t, cos t]` sampled at `t = kh`, `k = 1..=T/h`, and i.i.d.
/// `N(0, σ²)` equation noise. The trace of the sample covariance of θ̂ should
/// scale like `h`.
pub fn cmd_verify_covariance(hs: &[f64], set: CovarianceSettings) -> Result<CovarianceReport> {
    if set.runs < 2 {
        return Err(Error::InvalidArgument("covariance needs at least two runs".into()));
    }
    if !(set.sigma >= 0.0 && set.t_final > 0.0) {
        return Err(Error::InvalidArgument("sigma must be >= 0 and t_final > 0".into()));
    }
    let theta = Vector2::new(1.0, -0.5);
    let mut rows = Vec::with_capacity(hs.len());
    for (hi, &h) in hs.iter().enumerate() {
        let n = (set.t_final / h).round() as usize;
        let phis: Vec<Vector2<f64>> = (1..=n).map(|k| regressor(k as f64 * h)).collect();
        let gram: Matrix2<f64> = phis.iter().map(|p| p * p.transpose()).sum();
        let ginv = gram.try_inverse().filter(|g| g.iter().all(|v| v.is_finite())).ok_or_else(|| {
            Error::InsufficientExcitation(f64::INFINITY)
        })?;
        let clean: Vec<f64> = phis.iter().map(|p| p.dot(&theta)).collect();
        let mut estimates = Vec::with_capacity(set.runs);
        for run in 0..set.runs {
            let mut rng = channel_rng(mix_seed(set.seed, run as u64), hi as u64);
            let mut rhs = Vector2::zeros();
            for (p, y0) in phis.iter().zip(&clean) {
                let v: f64 = rng.sample(StandardNormal);
                rhs += p * (y0 + set.sigma * v);
            }
            estimates.push(ginv * rhs);
        }
        // deviations from the first run so identical estimates give exactly 0
        let base = estimates[0];
        let devs: Vec<Vector2<f64>> = estimates.iter().map(|e| e - base).collect();
        let mean: Vector2<f64> = devs.iter().sum::<Vector2<f64>>() / set.runs as f64;
        let trace = devs.iter().map(|d| (d - mean).norm_squared()).sum::<f64>() / (set.runs - 1) as f64;
        let r = gram_integral(set.t_final).try_inverse().ok_or(Error::InsufficientExcitation(f64::INFINITY))?;
        rows.push(CovarianceRow { h, samples: n, trace, predicted: set.sigma.powi(2) * h * r.trace() });
    }
    let hv: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let tv: Vec<f64> = rows.iter().map(|r| r.trace).collect();
    let slope = loglog_slope(&hv, &tv).ok();
    let pass = slope.is_some_and(|s| (0.85..=1.15).contains(&s));
    Ok(CovarianceReport { rows, slope, pass })
}
