mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use common::{gen::poles, tf};
use fastsvf::arx::fit_arx;
use fastsvf::harness::{cmd_verify_covariance, realization_records, CovarianceSettings, ExperimentConfig, Profile};
use fastsvf::lti::{realize_siso, RationalTransfer};
use fastsvf::sim::{
    decimate, simulate_closed_loop, ExcitationSpec, LoopSimulator, NoiseSpec, SampledRecord, SimulationConfig,
};
use fastsvf::svf::{
    assemble_regression_mimo, assemble_regression_siso, build_filter_bank, identify_svf, solve_ls, svf_regression,
    HoldAlignment, SampledBank, Structure, SvfFilter, SvfOptions,
};
use fastsvf::Polynomial;

fn noisy_p1_record(seed: u64, h: f64) -> SampledRecord {
    let p = realize_siso(&tf(&[1.0], &[-1.0, 1.0]));
    let k = realize_siso(&tf(&[7.0, 3.0], &[-2.0, 0.2]));
    let cfg = SimulationConfig {
        fine_step: 1e-3,
        t_start: 0.0,
        t_end: 20.0,
        seed,
        excitation_u: vec![ExcitationSpec::square(5.0, 1.0, 0.7)],
        excitation_y: vec![ExcitationSpec::square(8.0, 1.0, 2.1)],
        noise_w: vec![NoiseSpec::white(0.1)],
        noise_eta: vec![NoiseSpec::white(0.1)],
        record_clean: false,
    };
    decimate(&simulate_closed_loop(&p, &k, &cfg).unwrap(), h, 0.0).unwrap()
}

fn scaled(rec: &SampledRecord, alpha: f64, beta: f64) -> SampledRecord {
    SampledRecord {
        h: rec.h,
        t0: rec.t0,
        u: rec.u.iter().map(|c| c.iter().map(|v| alpha * v).collect()).collect(),
        y: rec.y.iter().map(|c| c.iter().map(|v| beta * v).collect()).collect(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bank_outputs_are_filtered_derivatives(ps in poles(4, false), pick in 0usize..5) {
        let den = Polynomial::from_roots(&ps);
        let f = RationalTransfer::new(Polynomial::new(vec![den.eval(0.0)]), den).unwrap();
        let n = pick % (ps.len() + 1);
        let bank = build_filter_bank(&SvfFilter::new(f.clone(), n).unwrap()).unwrap();
        prop_assert_eq!(bank.order(), n);
        for i in 0..=80 {
            let w = 10f64.powf(-2.0 + i as f64 / 20.0);
            let s = Complex64::new(0.0, w);
            let fs = f.num().eval_complex(s) / f.den().eval_complex(s);
            for k in 0..=n {
                let want = s.powu(k as u32) * fs;
                let got = bank.eval(k, s).unwrap();
                prop_assert!((got - want).norm() <= 1e-12 + 1e-9 * want.norm(), "k={k} ω={w}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn estimate_is_equivariant_to_channel_scaling(
        seed in any::<u64>(),
        alpha in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0],
        beta in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0],
    ) {
        let rec = noisy_p1_record(seed, 1e-2);
        let filter = SvfFilter::new(SvfFilter::band_pass(), 1).unwrap();
        let base = identify_svf(&rec, Structure::siso(1), &filter, 0.0).unwrap();
        let sc = identify_svf(&scaled(&rec, alpha, beta), Structure::siso(1), &filter, 0.0).unwrap();
        let (d0, n0) = (base.theta[0], base.theta[1]);
        prop_assert!((sc.theta[0] - d0).abs() <= 1e-8 * d0.abs().max(1.0));
        prop_assert!((sc.theta[1] - n0 * beta / alpha).abs() <= 1e-8 * (n0 * beta / alpha).abs().max(1.0));
    }

    #[test]
    fn single_channel_block_path_matches_siso(seed in any::<u64>(), n in 1usize..3) {
        let rec = noisy_p1_record(seed, 1e-2);
        let f = if n == 1 { SvfFilter::band_pass() } else { SvfFilter::fourth_order() };
        let bank = SampledBank::new(&build_filter_bank(&SvfFilter::new(f, n).unwrap()).unwrap(), rec.h).unwrap();
        let yd = bank.filter(&rec.y[0], HoldAlignment::Ceil);
        let ud = bank.filter(&rec.u[0], HoldAlignment::Ceil);
        let siso = assemble_regression_siso(&yd, &ud, n).unwrap();
        let mimo = assemble_regression_mimo(&[yd], &[ud], Structure { n, m: 1, l: 1 }).unwrap();
        prop_assert_eq!(&siso, &mimo);
        let a = solve_ls(&siso, Structure::siso(n)).unwrap();
        let b = solve_ls(&mimo, Structure { n, m: 1, l: 1 }).unwrap();
        prop_assert_eq!(a.theta, b.theta);
    }

    #[test]
    fn arx_fit_minimizes_equation_error(seed in any::<u64>(), na in 1usize..4, nb in 1usize..4, nk in 1usize..3, which in 0usize..8, up in any::<bool>()) {
        let rec = noisy_p1_record(seed, 1e-2);
        let fit = fit_arx(&rec, na, nb, nk).unwrap();
        let sse = fit.equation_error_sse(&rec);
        let mut moved = fit.clone();
        let delta = if up { 1e-6 } else { -1e-6 };
        let idx = which % (na + nb);
        if idx < na {
            moved.a[0][1 + idx] += delta;
        } else {
            moved.b[0][0][idx - na] += delta;
        }
        prop_assert!(moved.equation_error_sse(&rec) > sse, "coefficient {idx} moved by {delta}");
    }
}

#[test]
fn covariance_scales_with_interval_across_seeds() {
    for seed in 1..=5 {
        let set = CovarianceSettings { runs: 100, seed, ..Default::default() };
        let rep = cmd_verify_covariance(&[1e-1, 1e-2, 1e-3], set).unwrap();
        let slope = rep.slope.unwrap();
        assert!((0.85..=1.15).contains(&slope), "seed {seed}: slope {slope}");
        for row in &rep.rows {
            let ratio = row.trace / row.predicted;
            assert!((0.6..1.6).contains(&ratio), "seed {seed} h {}: trace/predicted {ratio}", row.h);
        }
    }
}

/// RMS of `Y_A − D_F θ*` on noise-free data, one entry per interval.
fn true_parameter_residuals(preset: &str, hs: &[f64]) -> Vec<f64> {
    let mut cfg = ExperimentConfig::for_preset(preset, Profile::Desk);
    cfg.h_grid = hs.to_vec();
    // square-wave edges on every sampling grid
    cfg.randomize_phase = false;
    let quiet = |n: usize| Some(vec![NoiseSpec::none(); n]);
    let exp = cfg.resolve().unwrap();
    cfg.noise_w = quiet(exp.preset.noise_w.len());
    cfg.noise_eta = quiet(exp.preset.noise_eta.len());
    let exp = cfg.resolve().unwrap();
    let sim = LoopSimulator::new(&exp.preset.plant_ss, &exp.preset.controller, cfg.fine_step).unwrap();
    realization_records(&exp, &sim, 0)
        .unwrap()
        .iter()
        .map(|rec| {
            let reg = svf_regression(rec, exp.structure, &exp.filter, exp.preset.discard, SvfOptions::default()).unwrap();
            reg.residual(&exp.truth).norm() / (reg.y_a.len() as f64).sqrt()
        })
        .collect()
}

#[test]
fn noise_free_residual_shrinks_with_interval() {
    let hs = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    for preset in ["P1f", "P4"] {
        let res = true_parameter_residuals(preset, &hs);
        assert!(res.windows(2).all(|w| w[1] < w[0]), "{preset}: {res:?}");
    }
}
