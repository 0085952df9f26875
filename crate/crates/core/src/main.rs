use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use fastsvf::harness::{
    cmd_bode, cmd_sweep, cmd_verify_covariance, cmd_verify_lemma1, identify_record, write_rows_csv,
    CovarianceSettings, ExperimentConfig, FilterChoice, Profile,
};
use fastsvf::lti::{LinearModel, Model};
use fastsvf::metrics::{nu_gap_auto, FrequencyGrid};
use fastsvf::sim::LoopSimulator;
use fastsvf::svf::Estimate;
use fastsvf::Error;

#[derive(Parser)]
#[command(name = "fastsvf", version, about = "Continuous-time identification under fast sampling")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON configuration for the subcommand
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Base seed, overriding the configuration
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Profile::Desk)]
    profile: Profile,
}

#[derive(Subcommand)]
enum Command {
    /// Identify every realization at every interval and score the models
    Sweep {
        /// Catalog loop to use when no configuration is given
        #[arg(long)]
        preset: Option<String>,
    },
    /// Tabulate ‖F_h‖² against h‖F‖² for a prefilter
    #[command(name = "verify-lemma1")]
    VerifyLemma1,
    /// Monte Carlo covariance of least squares against the sampling interval
    #[command(name = "verify-covariance")]
    VerifyCovariance,
    /// Bode table of estimates against the true plant
    Bode {
        #[arg(long)]
        preset: Option<String>,
        /// Interval at which to identify models in preset mode
        #[arg(long)]
        h: Option<f64>,
    },
    /// ν-gap between two models given as {"a": …, "b": …}
    Nugap,
    /// Dump one realization, on the fine grid or sampled at --h
    Simulate {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value_t = 0)]
        realization: usize,
    },
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Json(_) | Error::UnknownPreset { .. } | Error::NonCommensurate { .. } => {
                Failure::Config(e.to_string())
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn read_config(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(g: &Global) -> Result<Option<T>, Failure> {
    match &g.config {
        Some(p) => {
            let text = read_config(p)?;
            serde_json::from_str(&text).map(Some).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))
        }
        None => Ok(None),
    }
}

fn experiment(g: &Global, preset: Option<&str>) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &g.config {
        Some(p) => ExperimentConfig::from_json(&read_config(p)?, g.profile)?,
        None => ExperimentConfig::for_preset(preset.unwrap_or("P1"), g.profile),
    };
    if let Some(s) = g.seed {
        cfg.base_seed = s;
    }
    Ok(cfg)
}

fn create(g: &Global, name: &str) -> Result<BufWriter<fs::File>, Failure> {
    fs::create_dir_all(&g.out)?;
    Ok(BufWriter::new(fs::File::create(g.out.join(name))?))
}

fn write_json<T: serde::Serialize>(g: &Global, name: &str, value: &T) -> Result<(), Failure> {
    let mut f = create(g, name)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| Failure::Run(e.to_string()))?;
    writeln!(f)?;
    Ok(())
}

fn sweep(g: &Global, preset: Option<&str>) -> Outcome {
    let exp = experiment(g, preset)?.resolve()?;
    let out = cmd_sweep(&exp, g.jobs)?;
    let mut f = create(g, "sweep.csv")?;
    write_rows_csv(&out.rows, &mut f)?;
    write_json(g, "summary.json", &out.summary)?;
    println!("{:<6} {:>8} {:>6} {:>14} {:>12}", "method", "h", "fails", "median error", "median gap");
    for c in &out.summary.cells {
        let med = |s: Option<fastsvf::harness::Stats>| s.map_or("-".to_string(), |s| format!("{:.3e}", s.median));
        println!(
            "{:<6} {:>8.0e} {:>6} {:>14} {:>12}",
            c.method.as_str(),
            c.h,
            c.failures,
            med(c.normalized_param_error),
            med(c.nu_gap)
        );
    }
    for s in &out.summary.slopes {
        if let Some(v) = s.slope {
            println!("{} slope of mean error: {v:.3}", s.method.as_str());
        }
    }
    Ok(out.rows.iter().all(|r| r.is_ok()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Lemma1Config {
    #[serde(default = "default_filter")]
    filter: FilterChoice,
    #[serde(default = "default_hs")]
    h: Vec<f64>,
}

fn default_filter() -> FilterChoice {
    FilterChoice::EqF
}

fn default_hs() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3, 1e-4]
}

fn verify_lemma1(g: &Global) -> Outcome {
    let cfg: Lemma1Config = parse(g)?.unwrap_or(Lemma1Config { filter: default_filter(), h: default_hs() });
    let rep = cmd_verify_lemma1(&cfg.filter.transfer(), &cfg.h)?;
    println!("{:>8} {:>14} {:>14} {:>10}", "h", "|F_h|^2", "h|F|^2", "ratio");
    for r in &rep.rows {
        println!("{:>8.0e} {:>14.6e} {:>14.6e} {:>10.6}", r.h, r.discrete_norm2, r.scaled_norm2, r.ratio);
    }
    println!("{}", if rep.pass { "PASS" } else { "FAIL" });
    write_json(g, "lemma1.json", &rep)?;
    Ok(rep.pass)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CovarianceConfig {
    #[serde(default = "covariance_hs")]
    h: Vec<f64>,
    #[serde(default)]
    sigma: Option<f64>,
    #[serde(default)]
    t_final: Option<f64>,
    #[serde(default)]
    runs: Option<usize>,
}

fn covariance_hs() -> Vec<f64> {
    vec![1e-2, 1e-3, 1e-4]
}

fn verify_covariance(g: &Global) -> Outcome {
    let cfg: CovarianceConfig =
        parse(g)?.unwrap_or(CovarianceConfig { h: covariance_hs(), sigma: None, t_final: None, runs: None });
    let d = CovarianceSettings::default();
    let set = CovarianceSettings {
        sigma: cfg.sigma.unwrap_or(d.sigma),
        t_final: cfg.t_final.unwrap_or(d.t_final),
        runs: cfg.runs.unwrap_or(d.runs),
        seed: g.seed.unwrap_or(d.seed),
    };
    let rep = cmd_verify_covariance(&cfg.h, set)?;
    println!("{:>8} {:>14} {:>14}", "h", "Tr Cov", "predicted");
    for r in &rep.rows {
        println!("{:>8.0e} {:>14.6e} {:>14.6e}", r.h, r.trace, r.predicted);
    }
    if let Some(s) = rep.slope {
        println!("slope {s:.4}");
    }
    println!("{}", if rep.pass { "PASS" } else { "FAIL" });
    write_json(g, "covariance.json", &rep)?;
    Ok(rep.pass)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BodeConfig {
    truth: Model,
    #[serde(default)]
    models: Vec<Estimate>,
    #[serde(default = "lo")]
    omega_min: f64,
    #[serde(default = "hi")]
    omega_max: f64,
    #[serde(default = "per_decade")]
    per_decade: usize,
}

fn lo() -> f64 {
    1e-2
}
fn hi() -> f64 {
    1e2
}
fn per_decade() -> usize {
    50
}

fn bode(g: &Global, preset: Option<&str>, h: Option<f64>) -> Outcome {
    let (truth, models, grid) = match (preset, parse::<BodeConfig>(g)?) {
        (None, Some(cfg)) => {
            let grid = FrequencyGrid::log_spaced(cfg.omega_min, cfg.omega_max, cfg.per_decade)?;
            (cfg.truth, cfg.models, grid)
        }
        (name, _) => {
            let mut cfg = ExperimentConfig::for_preset(name.unwrap_or("P1"), g.profile);
            if let Some(h) = h {
                cfg.h_grid = vec![h];
            } else {
                cfg.h_grid = vec![*cfg.h_grid.last().expect("profile grid")];
            }
            if let Some(s) = g.seed {
                cfg.base_seed = s;
            }
            let exp = cfg.resolve()?;
            let sim = LoopSimulator::new(&exp.preset.plant_ss, &exp.preset.controller, cfg.fine_step)?;
            let run = || {
                (0..cfg.realizations)
                    .into_par_iter()
                    .map(|r| {
                        let recs = fastsvf::harness::realization_records(&exp, &sim, r)?;
                        identify_record(&exp, &recs[0])
                    })
                    .collect::<Result<Vec<Estimate>, Error>>()
            };
            let models = match g.jobs {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n.max(1))
                    .build()
                    .map_err(|e| Failure::Run(e.to_string()))?
                    .install(run)?,
                None => run()?,
            };
            write_json(g, "estimates.json", &models)?;
            (exp.preset.plant.clone(), models, FrequencyGrid::log_spaced(lo(), hi(), per_decade())?)
        }
    };
    let dyn_models: Vec<&dyn LinearModel> = models.iter().map(|e| &e.model as &dyn LinearModel).collect();
    let mut f = create(g, "bode.csv")?;
    cmd_bode(&dyn_models, &truth, grid.omegas(), &mut f)?;
    println!("wrote {} model(s) over {} frequencies", models.len(), grid.len());
    Ok(true)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NuGapConfig {
    a: Model,
    b: Model,
}

fn nugap(g: &Global) -> Outcome {
    let cfg: NuGapConfig = parse(g)?.ok_or_else(|| Failure::Config("nugap needs --config {\"a\":…,\"b\":…}".into()))?;
    let r = nu_gap_auto(&cfg.a, &cfg.b)?;
    println!("{}", serde_json::to_string(&r).map_err(|e| Failure::Run(e.to_string()))?);
    write_json(g, "nugap.json", &r)?;
    Ok(true)
}

fn simulate(g: &Global, preset: Option<&str>, h: Option<f64>, realization: usize) -> Outcome {
    let exp = experiment(g, preset)?.resolve()?;
    let sim = LoopSimulator::new(&exp.preset.plant_ss, &exp.preset.controller, exp.cfg.fine_step)?;
    let cfg = exp.simulation(realization);
    match h {
        Some(h) => {
            let rec = sim.simulate_sampled(&cfg, &[h], cfg.t_start)?.remove(0);
            rec.write_csv(&mut create(g, "sampled.csv")?)?;
            println!("wrote {} samples at h = {h}", rec.len());
        }
        None => {
            let rec = sim.simulate(&cfg)?;
            rec.write_csv(&mut create(g, "fine.csv")?)?;
            println!("wrote {} fine-grid samples", rec.len());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let outcome = match &cli.command {
        Command::Sweep { preset } => sweep(g, preset.as_deref()),
        Command::VerifyLemma1 => verify_lemma1(g),
        Command::VerifyCovariance => verify_covariance(g),
        Command::Bode { preset, h } => bode(g, preset.as_deref(), *h),
        Command::Nugap => nugap(g),
        Command::Simulate { preset, h, realization } => simulate(g, preset.as_deref(), *h, *realization),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
