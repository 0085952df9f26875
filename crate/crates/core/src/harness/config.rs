use rand::Rng;
use serde::{Deserialize, Serialize};

use super::presets::{preset_catalog, FilterChoice, Preset};
use crate::error::{Error, Result};
use crate::lti::Model;
use crate::sim::{channel_rng, mix_seed, whole_ratio, ExcitationKind, ExcitationSpec, NoiseSpec, SimulationConfig};
use crate::svf::{Structure, SvfFilter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Svf,
    Arx,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Svf => "svf",
            Method::Arx => "arx",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArxOrders {
    pub na: usize,
    pub nb: usize,
    pub nk: usize,
}

impl Default for ArxOrders {
    fn default() -> Self {
        let n = crate::arx::DEFAULT_ORDER;
        Self { na: n, nb: n, nk: 1 }
    }
}

/// Default scale of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// 1e-5 s fine step, h down to 1e-4 s, 20 realizations.
    #[default]
    Desk,
    /// 5e-6 s fine step, h down to 1e-5 s, 50 realizations.
    Paper,
}

/// One sweep: a loop, its signals, the intervals and the methods to score.
///
/// `None` in an optional field means "take the preset's value".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: String,
    #[serde(default)]
    pub plant: Option<Model>,
    #[serde(default)]
    pub controller: Option<Model>,
    #[serde(default)]
    pub filter: Option<FilterChoice>,
    pub h_grid: Vec<f64>,
    pub realizations: usize,
    pub base_seed: u64,
    pub fine_step: f64,
    pub t_start: f64,
    pub t_end: f64,
    #[serde(default)]
    pub discard: Option<f64>,
    #[serde(default)]
    pub excitation_u: Option<Vec<ExcitationSpec>>,
    #[serde(default)]
    pub excitation_y: Option<Vec<ExcitationSpec>>,
    #[serde(default)]
    pub noise_w: Option<Vec<NoiseSpec>>,
    #[serde(default)]
    pub noise_eta: Option<Vec<NoiseSpec>>,
    /// Draw each square-wave phase uniformly on `[0, period)` per realization.
    #[serde(default = "yes")]
    pub randomize_phase: bool,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub arx: ArxOrders,
    /// Measure per-row wall time; off keeps the CSV byte-reproducible.
    #[serde(default)]
    pub record_timing: bool,
}

fn yes() -> bool {
    true
}

impl ExperimentConfig {
    pub fn for_preset(preset: &str, profile: Profile) -> Self {
        let (fine_step, h_grid, realizations) = match profile {
            Profile::Desk => (1e-5, vec![1e-1, 1e-2, 1e-3, 1e-4], 20),
            Profile::Paper => (5e-6, vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5], 50),
        };
        Self {
            preset: preset.to_string(),
            plant: None,
            controller: None,
            filter: None,
            h_grid,
            realizations,
            base_seed: 1,
            fine_step,
            t_start: -10.0,
            t_end: 20.0,
            discard: None,
            excitation_u: None,
            excitation_y: None,
            noise_w: None,
            noise_eta: None,
            randomize_phase: true,
            methods: vec![Method::Svf, Method::Arx],
            arx: ArxOrders::default(),
            record_timing: false,
        }
    }

    /// Parses a JSON document; absent fields take the profile's defaults.
    pub fn from_json(text: &str, profile: Profile) -> Result<Self> {
        let given: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config is not valid JSON: {e}")))?;
        let obj = given.as_object().ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        let preset = obj.get("preset").and_then(|v| v.as_str()).unwrap_or("P1");
        let mut merged = serde_json::to_value(Self::for_preset(preset, profile))?;
        let target = merged.as_object_mut().expect("struct serializes to an object");
        for (k, v) in obj {
            target.insert(k.clone(), v.clone());
        }
        let cfg: Self = serde_json::from_value(merged).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.realizations == 0 {
            return bad("realizations must be at least 1".into());
        }
        if self.h_grid.is_empty() {
            return bad("h_grid is empty".into());
        }
        if self.methods.is_empty() {
            return bad("no identification methods selected".into());
        }
        if !(self.fine_step > 0.0 && self.fine_step.is_finite()) {
            return bad(format!("fine_step must be positive, got {}", self.fine_step));
        }
        if !(self.t_start < self.t_end) {
            return bad("t_start must precede t_end".into());
        }
        for &h in &self.h_grid {
            if !(h > 0.0) || whole_ratio(h, self.fine_step).filter(|&k| k > 0).is_none() {
                return bad(format!("h = {h} is not a whole multiple of fine_step {}", self.fine_step));
            }
        }
        if let Some(d) = self.discard {
            if !(d >= 0.0 && self.t_start + d < self.t_end) {
                return bad(format!("discard {d} leaves no data"));
            }
        }
        if self.preset == "custom" && (self.plant.is_none() || self.controller.is_none()) {
            return bad("custom preset needs plant and controller".into());
        }
        Ok(())
    }

    /// Applies overrides on top of the preset.
    pub fn resolve(&self) -> Result<Experiment> {
        self.validate()?;
        let mut preset = if self.preset == "custom" {
            Preset::custom(self.plant.clone().expect("validated"), self.controller.clone().expect("validated"))?
        } else {
            let mut p = preset_catalog(&self.preset)?;
            if self.plant.is_some() || self.controller.is_some() {
                return Err(Error::Config("plant/controller overrides need preset \"custom\"".into()));
            }
            p.name = self.preset.clone();
            p
        };
        if let Some(f) = &self.filter {
            preset.filter = f.clone();
        }
        if let Some(d) = self.discard {
            preset.discard = d;
        }
        if let Some(v) = &self.excitation_u {
            preset.excitation_u = v.clone();
        }
        if let Some(v) = &self.excitation_y {
            preset.excitation_y = v.clone();
        }
        if let Some(v) = &self.noise_w {
            preset.noise_w = v.clone();
        }
        if let Some(v) = &self.noise_eta {
            preset.noise_eta = v.clone();
        }
        let (truth, structure) = preset.truth();
        let filter = preset.filter.build(structure.n).map_err(|e| Error::Config(e.to_string()))?;
        let exp = Experiment { cfg: self.clone(), preset, filter, truth, structure };
        // surfaces channel-count mismatches before any work is scheduled
        exp.simulation(0).steps()?;
        let (m, l) = (exp.structure.m, exp.structure.l);
        for (name, got, want) in [
            ("excitation_u", exp.preset.excitation_u.len(), m),
            ("excitation_y", exp.preset.excitation_y.len(), l),
            ("noise_w", exp.preset.noise_w.len(), m),
            ("noise_eta", exp.preset.noise_eta.len(), l),
        ] {
            if got != want {
                return Err(Error::Config(format!("{name} has {got} channels, the loop needs {want}")));
            }
        }
        Ok(exp)
    }
}

/// A validated config with its loop, filter and ground truth.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub preset: Preset,
    pub filter: SvfFilter,
    pub truth: Vec<f64>,
    pub structure: Structure,
}

impl Experiment {
    pub fn seed(&self, realization: usize) -> u64 {
        mix_seed(self.cfg.base_seed, realization as u64)
    }

    /// Simulation settings of realization `r`: its seed, and square-wave
    /// phases drawn from stream 0 of that seed.
    pub fn simulation(&self, realization: usize) -> SimulationConfig {
        self.simulation_for_seed(self.seed(realization))
    }

    pub fn simulation_for_seed(&self, seed: u64) -> SimulationConfig {
        let mut rng = channel_rng(seed, 0);
        let mut phase = |e: &ExcitationSpec| {
            let mut e = e.clone();
            if self.cfg.randomize_phase && e.kind == ExcitationKind::SquareWave {
                e.phase = rng.random_range(0.0..e.period);
            }
            e
        };
        let excitation_u = self.preset.excitation_u.iter().map(&mut phase).collect();
        let excitation_y = self.preset.excitation_y.iter().map(&mut phase).collect();
        SimulationConfig {
            fine_step: self.cfg.fine_step,
            t_start: self.cfg.t_start,
            t_end: self.cfg.t_end,
            seed,
            excitation_u,
            excitation_y,
            noise_w: self.preset.noise_w.clone(),
            noise_eta: self.preset.noise_eta.clone(),
            record_clean: false,
        }
    }
}
