use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chordal::chordal_distance;
use crate::error::{Error, Result};
use crate::lti::{CMatrix, LinearModel};

/// Positive, strictly increasing frequencies with at least
/// [`FrequencyGrid::MIN_PER_DECADE`] points per decade everywhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    pub const MIN_PER_DECADE: usize = 50;

    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.len() < 2 {
            return Err(Error::InvalidArgument("frequency grid needs at least two points".into()));
        }
        if omegas.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument("grid frequencies must be positive and finite".into()));
        }
        let max_ratio = 10f64.powf(1.0 / Self::MIN_PER_DECADE as f64) * (1.0 + 1e-9);
        for w in omegas.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument(format!("grid not strictly increasing at {}", w[1])));
            }
            if w[1] / w[0] > max_ratio {
                return Err(Error::InvalidArgument(format!(
                    "grid has fewer than {} points per decade between {} and {}",
                    Self::MIN_PER_DECADE,
                    w[0],
                    w[1]
                )));
            }
        }
        Ok(Self { omegas })
    }

    /// `per_decade` log-spaced points per decade from `lo` to `hi` inclusive.
    pub fn log_spaced(lo: f64, hi: f64, per_decade: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::InvalidArgument(format!("bad grid range [{lo}, {hi}]")));
        }
        let decades = (hi / lo).log10();
        let steps = ((decades * per_decade as f64).ceil() as usize).max(1);
        let (a, b) = (lo.ln(), hi.ln());
        let omegas = (0..=steps).map(|i| (a + (b - a) * i as f64 / steps as f64).exp()).collect();
        Self::new(omegas)
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

impl TryFrom<Vec<f64>> for FrequencyGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FrequencyGrid> for Vec<f64> {
    fn from(g: FrequencyGrid) -> Self {
        g.omegas
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    pub value: f64,
    pub winding_ok: bool,
    pub argmax_omega: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NuGapOptions {
    /// Bisections allowed on an interval whose phase step exceeds π/2; zero
    /// rejects such a grid outright.
    pub max_bisections: usize,
    /// Rounds of local search around the grid maximum.
    pub refine_rounds: usize,
}

impl Default for NuGapOptions {
    fn default() -> Self {
        Self { max_bisections: 0, refine_rounds: 3 }
    }
}

const DET_FLOOR: f64 = 1e-12;
const MAX_PHASE_STEP: f64 = PI / 2.0;

struct Pair<'a> {
    p1: &'a dyn LinearModel,
    p2: &'a dyn LinearModel,
}

impl Pair<'_> {
    /// Chordal distance and `det(I + P₂* P₁)` at `jω`, `ω >= 0`.
    fn at(&self, omega: f64) -> Result<(f64, Complex64)> {
        let g1 = self.p1.frequency_response(omega)?;
        let g2 = self.p2.frequency_response(omega)?;
        let kappa = chordal_distance(&g1, &g2)?;
        let m = g1.ncols();
        let det = det_c(CMatrix::identity(m, m) + g2.adjoint() * &g1);
        if !(det.norm() >= DET_FLOOR) {
            return Err(Error::MetricIllDefined(omega));
        }
        Ok((kappa, det))
    }
}

fn det_c(m: DMatrix<Complex64>) -> Complex64 {
    if m.nrows() == 1 {
        m[(0, 0)]
    } else {
        m.determinant()
    }
}

fn phase_step(from: Complex64, to: Complex64) -> f64 {
    (to / from).arg()
}

/// Winding contribution of `[wa, wb]`, bisecting while the phase step is
/// large. Every new point also feeds the supremum search.
#[allow(clippy::too_many_arguments)]
fn wind(
    pair: &Pair,
    wa: f64,
    ga: Complex64,
    wb: f64,
    gb: Complex64,
    depth: usize,
    opts: &NuGapOptions,
    best: &mut (f64, f64),
) -> Result<f64> {
    let d = phase_step(ga, gb);
    if d.abs() <= MAX_PHASE_STEP {
        return Ok(d);
    }
    if depth >= opts.max_bisections {
        return Err(Error::GridTooCoarse(wb));
    }
    let wm = 0.5 * (wa + wb);
    let (km, gm) = pair.at(wm)?;
    if km > best.0 {
        *best = (km, wm);
    }
    Ok(wind(pair, wa, ga, wm, gm, depth + 1, opts, best)? + wind(pair, wm, gm, wb, gb, depth + 1, opts, best)?)
}

fn nyquist_cap(p1: &dyn LinearModel, p2: &dyn LinearModel) -> Option<f64> {
    match (p1.nyquist_limit(), p2.nyquist_limit()) {
        (Some(a), Some(b)) => Some(0.9 * a.min(b)),
        (Some(a), None) | (None, Some(a)) => Some(0.9 * a),
        (None, None) => None,
    }
}

/// ν-gap on the given grid with no phase bisection.
pub fn nu_gap(p1: &dyn LinearModel, p2: &dyn LinearModel, grid: &FrequencyGrid) -> Result<GapResult> {
    nu_gap_with(p1, p2, grid, NuGapOptions::default())
}

/// ν-gap: the supremum of the chordal distance along the imaginary axis
/// when `wno det(I + P₂~P₁) + η(P₁) − η(P₂) = 0`, otherwise 1. The
/// frequency axis of discrete models is capped at `0.9π/h`.
pub fn nu_gap_with(
    p1: &dyn LinearModel,
    p2: &dyn LinearModel,
    grid: &FrequencyGrid,
    opts: NuGapOptions,
) -> Result<GapResult> {
    if p1.shape() != p2.shape() {
        return Err(Error::Dimension(format!("models of shape {:?} and {:?}", p1.shape(), p2.shape())));
    }
    let eta1 = p1.unstable_pole_count()?;
    let eta2 = p2.unstable_pole_count()?;
    let pair = Pair { p1, p2 };

    let mut omegas = vec![0.0];
    match nyquist_cap(p1, p2) {
        Some(cap) => {
            omegas.extend(grid.omegas().iter().copied().filter(|&w| w < cap));
            omegas.push(cap);
        }
        None => omegas.extend_from_slice(grid.omegas()),
    }

    let mut kappas = Vec::with_capacity(omegas.len());
    let mut dets = Vec::with_capacity(omegas.len());
    for &w in &omegas {
        let (k, g) = pair.at(w)?;
        kappas.push(k);
        dets.push(g);
    }

    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut half = 0.0;
    for i in 1..omegas.len() {
        half += wind(&pair, omegas[i - 1], dets[i - 1], omegas[i], dets[i], 0, &opts, &mut best)?;
    }
    let end = *dets.last().expect("non-empty grid");
    let closing = phase_step(end, end.conj());
    let wno = (-(2.0 * half + closing) / (2.0 * PI)).round() as i64;
    let winding_ok = wno + eta1 as i64 - eta2 as i64 == 0;

    let (mut k_idx, mut kmax) = (0, f64::NEG_INFINITY);
    for (i, &k) in kappas.iter().enumerate() {
        if k > kmax {
            kmax = k;
            k_idx = i;
        }
    }
    let mut arg = omegas[k_idx];
    if best.0 > kmax {
        kmax = best.0;
        arg = best.1;
    }
    // local search between the neighbours of the grid maximum
    let mut lo = omegas[k_idx.saturating_sub(1)];
    let mut hi = omegas[(k_idx + 1).min(omegas.len() - 1)];
    for _ in 0..opts.refine_rounds {
        if !(hi > lo) {
            break;
        }
        let n = 20;
        for j in 0..=n {
            let w = lo + (hi - lo) * j as f64 / n as f64;
            let (k, _) = pair.at(w)?;
            if k > kmax {
                kmax = k;
                arg = w;
            }
        }
        let span = (hi - lo) / n as f64;
        lo = (arg - span).max(lo);
        hi = (arg + span).min(hi);
    }

    Ok(GapResult { value: if winding_ok { kmax.clamp(0.0, 1.0) } else { 1.0 }, winding_ok, argmax_omega: arg })
}

const BASE_PER_DECADE: usize = 60;
const EDGE_TOL: f64 = 1e-4;
const REFINE_TOL: f64 = 1e-3;

fn kappa_at(p1: &dyn LinearModel, p2: &dyn LinearModel, w: f64) -> Result<f64> {
    chordal_distance(&p1.frequency_response(w)?, &p2.frequency_response(w)?)
}

/// ν-gap on a default grid: 60 points per decade over `[1e-3, 1e3]`,
/// widened a decade at a time until the endpoint chordal distance settles
/// to 1e-4, then doubled in density until the value moves less than 1e-3.
pub fn nu_gap_auto(p1: &dyn LinearModel, p2: &dyn LinearModel) -> Result<GapResult> {
    let cap = nyquist_cap(p1, p2);
    let mut lo = 1e-3;
    let mut hi = cap.map_or(1e3, |c| c.min(1e3));
    for _ in 0..6 {
        let next = lo / 10.0;
        if (kappa_at(p1, p2, lo)? - kappa_at(p1, p2, next)?).abs() < EDGE_TOL {
            break;
        }
        lo = next;
    }
    for _ in 0..6 {
        let next = cap.map_or(hi * 10.0, |c| (hi * 10.0).min(c));
        if next <= hi || (kappa_at(p1, p2, hi)? - kappa_at(p1, p2, next)?).abs() < EDGE_TOL {
            break;
        }
        hi = next;
    }
    let opts = NuGapOptions { max_bisections: 40, refine_rounds: 3 };
    let mut per_decade = BASE_PER_DECADE;
    let mut prev = nu_gap_with(p1, p2, &FrequencyGrid::log_spaced(lo, hi, per_decade)?, opts)?;
    for _ in 0..3 {
        per_decade *= 2;
        let next = nu_gap_with(p1, p2, &FrequencyGrid::log_spaced(lo, hi, per_decade)?, opts)?;
        let settled = (next.value - prev.value).abs() < REFINE_TOL;
        prev = next;
        if settled {
            break;
        }
    }
    Ok(prev)
}
