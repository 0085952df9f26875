use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcitationKind {
    SquareWave,
    Zero,
}

/// Reference signal. A square wave is `+amplitude` on
/// `[phase + k·period, phase + (k + ½)·period)` and `-amplitude` otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcitationSpec {
    pub kind: ExcitationKind,
    #[serde(default = "one")]
    pub period: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

fn one() -> f64 {
    1.0
}

impl ExcitationSpec {
    pub fn square(period: f64, amplitude: f64, phase: f64) -> Self {
        Self { kind: ExcitationKind::SquareWave, period, amplitude, phase }
    }

    pub fn zero() -> Self {
        Self { kind: ExcitationKind::Zero, period: 1.0, amplitude: 0.0, phase: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.is_finite() || !self.phase.is_finite() {
            return Err(Error::InvalidArgument("excitation amplitude and phase must be finite".into()));
        }
        if self.kind == ExcitationKind::SquareWave && !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidArgument(format!("square-wave period must be positive, got {}", self.period)));
        }
        Ok(())
    }

    /// Phase rounded to the nearest multiple of `step`.
    pub fn snapped(&self, step: f64) -> Self {
        Self { phase: (self.phase / step).round() * step, ..self.clone() }
    }
}

pub fn gen_square_wave(spec: &ExcitationSpec, t: f64) -> f64 {
    match spec.kind {
        ExcitationKind::Zero => 0.0,
        ExcitationKind::SquareWave => {
            let x = (t - spec.phase).rem_euclid(spec.period);
            if x < 0.5 * spec.period {
                spec.amplitude
            } else {
                -spec.amplitude
            }
        }
    }
}

/// White Gaussian disturbance `N(offset, std²)`, each draw held for `hold_step`
/// (the fine step when unset).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(default)]
    pub std: f64,
    #[serde(default)]
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hold_step: Option<f64>,
}

impl NoiseSpec {
    pub fn white(std: f64) -> Self {
        Self { std, offset: 0.0, hold_step: None }
    }

    pub fn none() -> Self {
        Self::white(0.0)
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.std >= 0.0 && self.std.is_finite()) || !self.offset.is_finite() {
            return Err(Error::InvalidArgument("noise std must be finite and non-negative".into()));
        }
        if let Some(h) = self.hold_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidArgument(format!("noise hold step must be positive, got {h}")));
            }
        }
        Ok(())
    }

    pub fn is_silent(&self) -> bool {
        self.std == 0.0 && self.offset == 0.0
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.std == 0.0 {
            self.offset
        } else {
            let z: f64 = rng.sample(StandardNormal);
            self.offset + self.std * z
        }
    }
}

pub fn gen_noise<R: Rng + ?Sized>(spec: &NoiseSpec, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| spec.draw(rng)).collect()
}

/// SplitMix64 finalizer, used to derive independent seeds.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one channel of one realization.
pub fn channel_rng(seed: u64, channel: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(channel);
    rng
}
