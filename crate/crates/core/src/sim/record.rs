use std::io::Write;

use serde::{Deserialize, Serialize};

use super::closed_loop::whole_ratio;
use crate::csvfmt::sig9;
use crate::error::{Error, Result};

/// Fine-grid closed-loop taps, channel-major. Sample `k` sits at `t0 + k·step`.
#[derive(Clone, Debug, PartialEq)]
pub struct FineRecord {
    pub t0: f64,
    pub step: f64,
    pub u: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub u_clean: Option<Vec<Vec<f64>>>,
    pub y_clean: Option<Vec<Vec<f64>>>,
}

/// Sampled I/O `{u(t0 + kh), y(t0 + kh)}`, channel-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledRecord {
    pub h: f64,
    pub t0: f64,
    pub u: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

fn write_channels<W: Write>(
    out: &mut W,
    t0: f64,
    step: f64,
    u: &[Vec<f64>],
    y: &[Vec<f64>],
) -> Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend((1..=u.len()).map(|i| format!("u{i}")));
    header.extend((1..=y.len()).map(|i| format!("y{i}")));
    writeln!(out, "{}", header.join(","))?;
    let n = u.iter().chain(y).map(Vec::len).min().unwrap_or(0);
    let mut line = String::new();
    for k in 0..n {
        line.clear();
        line.push_str(&sig9(t0 + k as f64 * step));
        for ch in u.iter().chain(y) {
            line.push(',');
            line.push_str(&sig9(ch[k]));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

impl FineRecord {
    pub fn len(&self) -> usize {
        self.y.first().or(self.u.first()).map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.step
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        write_channels(out, self.t0, self.step, &self.u, &self.y)
    }
}

impl SampledRecord {
    pub fn len(&self) -> usize {
        self.y.first().or(self.u.first()).map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inputs(&self) -> usize {
        self.u.len()
    }

    pub fn outputs(&self) -> usize {
        self.y.len()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.h
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        write_channels(out, self.t0, self.h, &self.u, &self.y)
    }

    /// Keep only the listed input and output channels.
    pub fn select(&self, inputs: &[usize], outputs: &[usize]) -> SampledRecord {
        SampledRecord {
            h: self.h,
            t0: self.t0,
            u: inputs.iter().map(|&i| self.u[i].clone()).collect(),
            y: outputs.iter().map(|&i| self.y[i].clone()).collect(),
        }
    }

    /// Samples from `t_from` on, keeping the interval.
    pub fn retain_from(&self, t_from: f64) -> Result<SampledRecord> {
        let start = whole_ratio(t_from - self.t0, self.h)
            .filter(|&s| s < self.len())
            .ok_or_else(|| Error::InvalidArgument(format!("{t_from} is not a sample instant of the record")))?;
        Ok(SampledRecord {
            h: self.h,
            t0: self.time(start),
            u: self.u.iter().map(|c| c[start..].to_vec()).collect(),
            y: self.y.iter().map(|c| c[start..].to_vec()).collect(),
        })
    }

    /// Further decimation of an already sampled record.
    pub fn decimate(&self, h: f64) -> Result<SampledRecord> {
        let f = whole_ratio(h, self.h)
            .filter(|&f| f > 0)
            .ok_or(Error::NonCommensurate { h, step: self.h })?;
        Ok(SampledRecord {
            h,
            t0: self.t0,
            u: self.u.iter().map(|c| c.iter().step_by(f).copied().collect()).collect(),
            y: self.y.iter().map(|c| c.iter().step_by(f).copied().collect()).collect(),
        })
    }
}

/// Every `(h / step)`-th fine sample from `retain_from` on, with no
/// anti-alias filtering.
pub fn decimate(rec: &FineRecord, h: f64, retain_from: f64) -> Result<SampledRecord> {
    let f = whole_ratio(h, rec.step)
        .filter(|&f| f > 0)
        .ok_or(Error::NonCommensurate { h, step: rec.step })?;
    let start = whole_ratio(retain_from - rec.t0, rec.step)
        .filter(|&s| s < rec.len())
        .ok_or_else(|| Error::InvalidArgument(format!("retain_from {retain_from} is not on the fine grid")))?;
    let pick = |c: &Vec<f64>| c[start..].iter().step_by(f).copied().collect::<Vec<_>>();
    Ok(SampledRecord {
        h,
        t0: rec.time(start),
        u: rec.u.iter().map(pick).collect(),
        y: rec.y.iter().map(pick).collect(),
    })
}
