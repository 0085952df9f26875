use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Experiment, Method};
use crate::arx::fit_arx;
use crate::csvfmt::sig9;
use crate::error::Result;
use crate::lti::LinearModel;
use crate::metrics::{loglog_slope, normalized_param_error, nu_gap_auto};
use crate::sim::{LoopSimulator, SampledRecord};
use crate::svf::{identify_svf, Estimate};

/// One scored identification: a method at one interval on one realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub preset: String,
    pub method: Method,
    pub h: f64,
    pub seed: u64,
    pub normalized_param_error: Option<f64>,
    pub nu_gap: Option<f64>,
    pub residual_norm: Option<f64>,
    pub condition_number: Option<f64>,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

pub const CSV_HEADER: &str =
    "preset,method,h,seed,normalized_param_error,nu_gap,residual_norm,condition_number,wall_time_s,error";

impl SweepRow {
    fn failed(exp: &Experiment, method: Method, h: f64, seed: u64, msg: String) -> Self {
        SweepRow {
            preset: exp.preset.name.clone(),
            method,
            h,
            seed,
            normalized_param_error: None,
            nu_gap: None,
            residual_norm: None,
            condition_number: None,
            wall_time_s: 0.0,
            error: Some(msg),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(sig9).unwrap_or_default();
        let err = self.error.as_deref().unwrap_or("").replace([',', '\n', '\r'], ";");
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.preset,
            self.method.as_str(),
            sig9(self.h),
            self.seed,
            opt(self.normalized_param_error),
            opt(self.nu_gap),
            opt(self.residual_norm),
            opt(self.condition_number),
            sig9(self.wall_time_s),
            err
        )
    }
}

pub fn write_rows_csv<W: Write>(rows: &[SweepRow], out: &mut W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

/// SVF estimate on a record that starts at `t_start`.
pub fn identify_record(exp: &Experiment, rec: &SampledRecord) -> Result<Estimate> {
    identify_svf(rec, exp.structure, &exp.filter, exp.preset.discard)
}

fn score(exp: &Experiment, method: Method, rec: &SampledRecord, seed: u64) -> SweepRow {
    let t0 = Instant::now();
    let outcome = (|| -> Result<(Option<f64>, f64, f64, f64)> {
        match method {
            Method::Svf => {
                let est = identify_record(exp, rec)?;
                let npe = normalized_param_error(&est.theta, &exp.truth)?;
                let gap = nu_gap_auto(&est.model, &exp.preset.plant)?;
                Ok((Some(npe), gap.value, est.residual_norm, est.condition_number))
            }
            Method::Arx => {
                let data = rec.retain_from(exp.cfg.t_start + exp.preset.discard)?;
                let o = exp.cfg.arx;
                let fit = fit_arx(&data, o.na, o.nb, o.nk)?;
                let gap = nu_gap_auto(&fit as &dyn LinearModel, &exp.preset.plant)?;
                Ok((None, gap.value, fit.residual_norm, fit.condition_number))
            }
        }
    })();
    let wall = if exp.cfg.record_timing { t0.elapsed().as_secs_f64() } else { 0.0 };
    match outcome {
        Ok((npe, gap, res, cond)) => SweepRow {
            preset: exp.preset.name.clone(),
            method,
            h: rec.h,
            seed,
            normalized_param_error: npe,
            nu_gap: Some(gap),
            residual_norm: Some(res),
            condition_number: Some(cond),
            wall_time_s: wall,
            error: None,
        },
        Err(e) => {
            let mut row = SweepRow::failed(exp, method, rec.h, seed, e.to_string());
            row.wall_time_s = wall;
            row
        }
    }
}

/// Sampled records of realization `r`, one per entry of `h_grid`.
pub fn realization_records(exp: &Experiment, sim: &LoopSimulator, r: usize) -> Result<Vec<SampledRecord>> {
    let cfg = exp.simulation(r);
    sim.simulate_sampled(&cfg, &exp.cfg.h_grid, cfg.t_start)
}

fn run_realization(exp: &Experiment, sim: &Result<LoopSimulator>, r: usize) -> Vec<Vec<SweepRow>> {
    let seed = exp.seed(r);
    let recs = match sim {
        Ok(sim) => realization_records(exp, sim, r),
        Err(e) => Err(crate::Error::InvalidModel(e.to_string())),
    };
    exp.cfg
        .h_grid
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            exp.cfg
                .methods
                .iter()
                .map(|&m| match &recs {
                    Ok(recs) => score(exp, m, &recs[i], seed),
                    Err(e) => SweepRow::failed(exp, m, h, seed, e.to_string()),
                })
                .collect()
        })
        .collect()
}

/// Order statistics of one column.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(Stats {
            median: quantile(&v, 0.5),
            q1: quantile(&v, 0.25),
            q3: quantile(&v, 0.75),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            min: v[0],
            max: v[v.len() - 1],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub method: Method,
    pub h: f64,
    pub rows: usize,
    pub failures: usize,
    pub normalized_param_error: Option<Stats>,
    pub nu_gap: Option<Stats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSlope {
    pub method: Method,
    /// Log-log slope of the mean normalized error against `h`.
    pub slope: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub preset: String,
    pub realizations: usize,
    pub cells: Vec<CellSummary>,
    pub slopes: Vec<MethodSlope>,
}

impl SweepSummary {
    pub fn cell(&self, method: Method, h: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.method == method && c.h == h)
    }
}

pub fn summarize(exp: &Experiment, rows: &[SweepRow]) -> SweepSummary {
    let mut cells = Vec::new();
    let mut slopes = Vec::new();
    for &method in &exp.cfg.methods {
        let mut hs = Vec::new();
        let mut means = Vec::new();
        for &h in &exp.cfg.h_grid {
            let sel: Vec<&SweepRow> = rows.iter().filter(|r| r.method == method && r.h == h).collect();
            let npe: Vec<f64> = sel.iter().filter_map(|r| r.normalized_param_error).collect();
            let gap: Vec<f64> = sel.iter().filter_map(|r| r.nu_gap).collect();
            let npe_stats = Stats::of(&npe);
            if let Some(s) = npe_stats {
                hs.push(h);
                means.push(s.mean);
            }
            cells.push(CellSummary {
                method,
                h,
                rows: sel.len(),
                failures: sel.iter().filter(|r| !r.is_ok()).count(),
                normalized_param_error: npe_stats,
                nu_gap: Stats::of(&gap),
            });
        }
        slopes.push(MethodSlope { method, slope: loglog_slope(&hs, &means).ok() });
    }
    SweepSummary { preset: exp.preset.name.clone(), realizations: exp.cfg.realizations, cells, slopes }
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

/// Runs every realization on a worker pool of `jobs` threads (all cores if
/// `None`) and returns rows in `(h, seed, method)` order.
pub fn cmd_sweep(exp: &Experiment, jobs: Option<usize>) -> Result<SweepOutput> {
    let sim = LoopSimulator::new(&exp.preset.plant_ss, &exp.preset.controller, exp.cfg.fine_step);
    let work = || -> Vec<Vec<Vec<SweepRow>>> {
        (0..exp.cfg.realizations).into_par_iter().map(|r| run_realization(exp, &sim, r)).collect()
    };
    let per_real = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| crate::Error::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    let mut rows = Vec::new();
    for i in 0..exp.cfg.h_grid.len() {
        for real in &per_real {
            rows.extend(real[i].iter().cloned());
        }
    }
    let summary = summarize(exp, &rows);
    Ok(SweepOutput { rows, summary })
}
