use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{minreal, observer_regulator, realize, MatrixFraction, Model, RationalTransfer, StateSpace};
use crate::poly::Polynomial;
use crate::sim::{ExcitationSpec, NoiseSpec};
use crate::svf::{theta_from_model, Structure, SvfFilter};

pub const PRESET_NAMES: [&str; 6] = ["P1", "P1o", "P1f", "P2", "P3", "P4"];

/// Prefilter choice: the band-pass `eqF`, the fourth-order `eqF3`, or a
/// user transfer function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FilterChoice {
    #[serde(rename = "eqF")]
    EqF,
    #[serde(rename = "eqF3")]
    EqF3,
    #[serde(rename = "custom")]
    Custom(RationalTransfer),
}

impl FilterChoice {
    pub fn transfer(&self) -> RationalTransfer {
        match self {
            FilterChoice::EqF => SvfFilter::band_pass(),
            FilterChoice::EqF3 => SvfFilter::fourth_order(),
            FilterChoice::Custom(tf) => tf.clone(),
        }
    }

    /// The filter prepared for derivatives up to order `n`.
    pub fn build(&self, n: usize) -> Result<SvfFilter> {
        SvfFilter::new(self.transfer(), n)
    }
}

/// Plant, controller and signal defaults of one benchmark loop.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: String,
    pub plant: Model,
    /// Realization used for simulation (minimal for matrix fractions).
    pub plant_ss: StateSpace,
    pub controller: StateSpace,
    pub filter: FilterChoice,
    pub excitation_u: Vec<ExcitationSpec>,
    pub excitation_y: Vec<ExcitationSpec>,
    pub noise_w: Vec<NoiseSpec>,
    pub noise_eta: Vec<NoiseSpec>,
    pub discard: f64,
}

pub const NOISE_STD: f64 = 0.1;
pub const PERIOD_U: f64 = 5.0;
pub const PERIOD_Y: f64 = 8.0;

fn p(c: &[f64]) -> Polynomial {
    Polynomial::new(c.to_vec())
}

fn tf(num: &[f64], den: &[f64]) -> RationalTransfer {
    RationalTransfer::new(p(num), p(den)).expect("catalog model")
}

/// `(s + α)(s² + 1.8αs + α²)`: the pattern `α·(−1, −0.9 ± j√0.19)`.
pub fn scaled_pole_pattern(alpha: f64) -> Polynomial {
    p(&[alpha.powi(3), 2.8 * alpha * alpha, 2.8 * alpha, 1.0])
}

/// The two-by-two unstable matrix fraction `N(s)/d(s)`.
pub fn p4_plant() -> MatrixFraction {
    let num = vec![vec![p(&[4.4, 1.4, 1.0]), p(&[1.0])], vec![p(&[7.6, -3.8, 3.0]), p(&[-1.0, 1.0, 1.0])]];
    MatrixFraction::new(p(&[-4.0, 3.6, -0.6, 1.0]), num).expect("catalog model")
}

/// Square waves per channel; extra channels lengthen the period by 2 s each.
pub fn default_excitations(count: usize, base_period: f64) -> Vec<ExcitationSpec> {
    (0..count).map(|c| ExcitationSpec::square(base_period + 2.0 * c as f64, 1.0, 0.0)).collect()
}

fn siso_preset(name: &str, plant: RationalTransfer, controller: RationalTransfer) -> Preset {
    let plant_ss = realize(&Model::Siso(plant.clone()));
    let controller = realize(&Model::Siso(controller));
    Preset {
        name: name.to_string(),
        plant: Model::Siso(plant),
        plant_ss,
        controller,
        filter: FilterChoice::EqF,
        excitation_u: default_excitations(1, PERIOD_U),
        excitation_y: default_excitations(1, PERIOD_Y),
        noise_w: vec![NoiseSpec::white(NOISE_STD)],
        noise_eta: vec![NoiseSpec::white(NOISE_STD)],
        discard: 10.0,
    }
}

/// The catalog loop named `name`.
pub fn preset_catalog(name: &str) -> Result<Preset> {
    let p1 = || tf(&[1.0], &[-1.0, 1.0]);
    let k1 = || tf(&[7.0, 3.0], &[-2.0, 0.2]);
    match name {
        "P1" => Ok(siso_preset(name, p1(), k1())),
        "P1o" => {
            let mut pr = siso_preset(name, p1(), k1());
            pr.noise_w = vec![NoiseSpec::white(NOISE_STD).with_offset(10.0)];
            pr.noise_eta = vec![NoiseSpec::white(NOISE_STD).with_offset(1.0)];
            pr.discard = 15.0;
            Ok(pr)
        }
        "P1f" => {
            let mut pr = siso_preset(name, p1(), k1());
            pr.noise_w = vec![NoiseSpec::none()];
            pr.noise_eta = vec![NoiseSpec::none()];
            Ok(pr)
        }
        "P2" => Ok(siso_preset(name, tf(&[1.0, 1.0], &[1.0, 0.5, 1.0]), tf(&[-0.75, 0.5], &[1.0, 1.0]))),
        "P3" => Ok(siso_preset(name, tf(&[-1.0, 1.0], &[-4.0, 0.0, 1.0]), tf(&[11.0, 5.5], &[-2.8, 1.0]))),
        "P4" => {
            let plant = p4_plant();
            let plant_ss = minreal(&realize(&Model::Mfd(plant.clone())));
            let controller = observer_regulator(&plant_ss, &scaled_pole_pattern(0.8), &scaled_pole_pattern(1.1))?;
            Ok(Preset {
                name: name.to_string(),
                plant: Model::Mfd(plant),
                plant_ss,
                controller,
                filter: FilterChoice::EqF3,
                excitation_u: default_excitations(2, PERIOD_U),
                excitation_y: default_excitations(2, PERIOD_Y),
                noise_w: vec![NoiseSpec::white(NOISE_STD); 2],
                noise_eta: vec![NoiseSpec::white(NOISE_STD); 2],
                discard: 10.0,
            })
        }
        other => Err(Error::UnknownPreset {
            name: other.to_string(),
            valid: PRESET_NAMES.join(", "),
        }),
    }
}

impl Preset {
    /// A loop from user models; signals default to the catalog pattern.
    pub fn custom(plant: Model, controller: Model) -> Result<Self> {
        let plant_ss = minreal(&realize(&plant));
        let controller = realize(&controller);
        let (m, l) = (plant_ss.inputs(), plant_ss.outputs());
        Ok(Preset {
            name: "custom".to_string(),
            plant,
            plant_ss,
            controller,
            filter: FilterChoice::EqF,
            excitation_u: default_excitations(m, PERIOD_U),
            excitation_y: default_excitations(l, PERIOD_Y),
            noise_w: vec![NoiseSpec::white(NOISE_STD); m],
            noise_eta: vec![NoiseSpec::white(NOISE_STD); l],
            discard: 10.0,
        })
    }

    /// True parameter vector and model structure.
    pub fn truth(&self) -> (Vec<f64>, Structure) {
        theta_from_model(&self.plant)
    }
}
