use std::f64::consts::PI;
use std::io::Write;

use crate::csvfmt::sig9;
use crate::error::{Error, Result};
use crate::lti::LinearModel;

/// Magnitude in dB and unwrapped phase in degrees of entry `(i, j)`.
pub fn bode_entry(model: &dyn LinearModel, i: usize, j: usize, omegas: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut mag = Vec::with_capacity(omegas.len());
    let mut phase = Vec::with_capacity(omegas.len());
    let mut prev: Option<f64> = None;
    for &w in omegas {
        let g = model.frequency_response(w)?[(i, j)];
        mag.push(20.0 * g.norm().log10());
        let mut ph = g.arg();
        if let Some(p) = prev {
            ph += 2.0 * PI * ((p - ph) / (2.0 * PI)).round();
        }
        prev = Some(ph);
        phase.push(ph.to_degrees());
    }
    Ok((mag, phase))
}

/// Largest magnitude deviation in dB from `truth` over all entries.
pub fn max_magnitude_deviation_db(model: &dyn LinearModel, truth: &dyn LinearModel, omegas: &[f64]) -> Result<f64> {
    let (l, m) = truth.shape();
    let mut worst: f64 = 0.0;
    for i in 0..l {
        for j in 0..m {
            let (a, _) = bode_entry(model, i, j, omegas)?;
            let (b, _) = bode_entry(truth, i, j, omegas)?;
            worst = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(worst, f64::max);
        }
    }
    Ok(worst)
}

/// CSV with `omega`, then magnitude and phase columns of the truth and of
/// each model, entry by entry.
pub fn cmd_bode<W: Write>(
    models: &[&dyn LinearModel],
    truth: &dyn LinearModel,
    omegas: &[f64],
    out: &mut W,
) -> Result<()> {
    let (l, m) = truth.shape();
    if models.iter().any(|mdl| mdl.shape() != (l, m)) {
        return Err(Error::Dimension("models and truth differ in shape".into()));
    }
    let entry = |i: usize, j: usize| if l == 1 && m == 1 { String::new() } else { format!("_{}{}", i + 1, j + 1) };
    let mut header = vec!["omega".to_string()];
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let names = std::iter::once("truth".to_string()).chain((1..=models.len()).map(|k| format!("m{k}")));
    let all = std::iter::once(truth).chain(models.iter().copied());
    for (name, mdl) in names.zip(all) {
        for i in 0..l {
            for j in 0..m {
                let (mag, ph) = bode_entry(mdl, i, j, omegas)?;
                header.push(format!("{name}{}_mag_db", entry(i, j)));
                header.push(format!("{name}{}_phase_deg", entry(i, j)));
                cols.push(mag);
                cols.push(ph);
            }
        }
    }
    writeln!(out, "{}", header.join(","))?;
    for (k, &w) in omegas.iter().enumerate() {
        let mut line = sig9(w);
        for c in &cols {
            line.push(',');
            line.push_str(&sig9(c[k]));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}
