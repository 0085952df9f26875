use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{c2d_zoh, realize_siso, RationalTransfer, StateSpace};
use crate::poly::Polynomial;

/// Prefilter `F` together with the highest derivative `n` applied to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvfFilter {
    pub tf: RationalTransfer,
    pub max_derivative: usize,
}

impl SvfFilter {
    pub fn new(tf: RationalTransfer, max_derivative: usize) -> Result<Self> {
        if tf.relative_degree() < max_derivative {
            return Err(Error::InvalidArgument(format!(
                "filter relative degree {} is below the model order {max_derivative}",
                tf.relative_degree()
            )));
        }
        if !tf.is_stable() {
            return Err(Error::InvalidArgument("filter denominator is not Hurwitz".into()));
        }
        Ok(Self { tf, max_derivative })
    }

    /// `s / ((s + 1)(s² + 1.8s + 1))`: band-pass, so constant offsets decay
    /// out of every filtered channel.
    pub fn band_pass() -> RationalTransfer {
        RationalTransfer::new(Polynomial::new(vec![0.0, 1.0]), Polynomial::new(vec![1.0, 2.8, 2.8, 1.0]))
            .expect("valid filter")
    }

    /// `1 / ((s + 1)² ((s + 0.2)² + 1.99²))`, relative degree four.
    pub fn fourth_order() -> RationalTransfer {
        RationalTransfer::new(
            Polynomial::new(vec![1.0]),
            Polynomial::new(vec![4.0001, 8.4002, 5.8001, 2.4, 1.0]),
        )
        .expect("valid filter")
    }
}

/// One shared realization of `F` with output maps for `p^k F`, `k = 0..=n`.
#[derive(Clone, Debug)]
pub struct FilterBank {
    pub ss: StateSpace,
    pub c_k: Vec<Vec<f64>>,
    pub d_k: Vec<f64>,
}

impl FilterBank {
    pub fn order(&self) -> usize {
        self.c_k.len() - 1
    }

    /// Gain of the `k`-th output at `s`.
    pub fn eval(&self, k: usize, s: Complex64) -> Result<Complex64> {
        let c = DMatrix::from_row_slice(1, self.ss.states(), &self.c_k[k]);
        let out = StateSpace::new(
            self.ss.a.clone(),
            self.ss.b.clone(),
            c,
            DMatrix::from_element(1, 1, self.d_k[k]),
        )?;
        Ok(out.eval(s)?[(0, 0)])
    }
}

/// `C_k = C A^k`; `D_k = C A^{k-1} B` at `k` equal to the relative degree,
/// zero below it (the lower Markov parameters vanish).
pub fn build_filter_bank(filter: &SvfFilter) -> Result<FilterBank> {
    let filter = SvfFilter::new(filter.tf.clone(), filter.max_derivative)?;
    let ss = realize_siso(&filter.tf);
    let r = filter.tf.relative_degree();
    let n = filter.max_derivative;
    let mut c_k: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut d_k = Vec::with_capacity(n + 1);
    let mut cak = ss.c.clone();
    for k in 0..=n {
        c_k.push(cak.iter().copied().collect());
        if k == 0 {
            d_k.push(ss.d[(0, 0)]);
        } else if k == r {
            let prev = DMatrix::from_row_slice(1, ss.states(), &c_k[k - 1]);
            d_k.push((prev * &ss.b)[(0, 0)]);
        } else {
            d_k.push(0.0);
        }
        cak = &cak * &ss.a;
    }
    Ok(FilterBank { ss, c_k, d_k })
}

/// How a sample `u_i` is held between sample instants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HoldAlignment {
    /// `u_i` drives `((i-1)h, ih]`, i.e. `ū(t) = u(⌈t/h⌉h)`.
    #[default]
    Ceil,
    /// `u_i` drives `[ih, (i+1)h)`.
    Floor,
}

/// Filtered derivatives of one channel: row `i` holds `p^k F u` at sample
/// `i` for `k = 0..=n`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DerivativeMatrix {
    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.cols + k]
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, k)).collect()
    }
}

/// Discretized bank for a fixed interval, reused across channels.
pub struct SampledBank {
    ad: Vec<f64>,
    bd: Vec<f64>,
    c_k: Vec<Vec<f64>>,
    d_k: Vec<f64>,
    nx: usize,
}

impl SampledBank {
    pub fn new(bank: &FilterBank, h: f64) -> Result<Self> {
        let d = c2d_zoh(&bank.ss, h)?;
        let nx = bank.ss.states();
        let ad = (0..nx).flat_map(|i| (0..nx).map(move |j| (i, j))).map(|(i, j)| d.ad[(i, j)]).collect();
        Ok(Self { ad, bd: d.bd.iter().copied().collect(), c_k: bank.c_k.clone(), d_k: bank.d_k.clone(), nx })
    }

    /// Runs the bank over `signal` from zero state.
    pub fn filter(&self, signal: &[f64], hold: HoldAlignment) -> DerivativeMatrix {
        let nx = self.nx;
        let cols = self.c_k.len();
        let mut data = vec![0.0; signal.len() * cols];
        let mut x = vec![0.0; nx];
        let mut next = vec![0.0; nx];
        for (i, &ui) in signal.iter().enumerate() {
            if i > 0 {
                let drive = match hold {
                    HoldAlignment::Ceil => ui,
                    HoldAlignment::Floor => signal[i - 1],
                };
                for r in 0..nx {
                    let row = &self.ad[r * nx..(r + 1) * nx];
                    next[r] = row.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + self.bd[r] * drive;
                }
                std::mem::swap(&mut x, &mut next);
            }
            let out = &mut data[i * cols..(i + 1) * cols];
            for k in 0..cols {
                out[k] = self.c_k[k].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + self.d_k[k] * ui;
            }
        }
        DerivativeMatrix { rows: signal.len(), cols, data }
    }
}

/// Filtered derivatives of channel `channel` (inputs first, then outputs) of
/// a sampled record.
pub fn filter_derivatives(
    bank: &FilterBank,
    samples: &crate::sim::SampledRecord,
    channel: usize,
) -> Result<DerivativeMatrix> {
    let m = samples.inputs();
    let signal = if channel < m {
        &samples.u[channel]
    } else {
        samples
            .y
            .get(channel - m)
            .ok_or_else(|| Error::Dimension(format!("record has no channel {channel}")))?
    };
    Ok(SampledBank::new(bank, samples.h)?.filter(signal, HoldAlignment::Ceil))
}
