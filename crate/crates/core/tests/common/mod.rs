#![allow(dead_code)]

//! Closed-form and hand-computed reference checks shared by the oracle
//! tests and the acceptance report.

pub mod gen;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fastsvf::arx::{arx_freq_response, fit_arx, ArxModel};
use fastsvf::harness::{
    bode_entry, cmd_sweep, cmd_verify_covariance, cmd_verify_lemma1, identify_record, max_magnitude_deviation_db,
    p4_plant, preset_catalog, realization_records, CovarianceSettings, Experiment, ExperimentConfig, Method,
    Profile, SweepOutput,
};
use fastsvf::lsq::lstsq;
use fastsvf::lti::{
    c2d_zoh, closed_loop_assemble, h2_norm_ct, realize_mfd, realize_siso, DiscreteStateSpace, LinearModel,
    Model, RationalTransfer, StateSpace,
};
use fastsvf::metrics::{chordal_distance_siso, normalized_param_error, nu_gap, FrequencyGrid};
use fastsvf::sim::{
    gen_noise, gen_square_wave, simulate_closed_loop, ExcitationSpec, LoopSimulator, NoiseSpec, SampledRecord,
    SimulationConfig,
};
use fastsvf::svf::{build_filter_bank, svf_regression, HoldAlignment, SampledBank, SvfFilter, SvfOptions};
use fastsvf::{PolyOp, Polynomial};

pub type Check = Result<(), String>;

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn close(got: f64, want: f64, tol: f64, what: &str) -> Check {
    ensure((got - want).abs() <= tol, || format!("{what}: got {got:.12e}, want {want:.12e} (tol {tol:e})"))
}

pub fn p(c: &[f64]) -> Polynomial {
    Polynomial::new(c.to_vec())
}

pub fn tf(num: &[f64], den: &[f64]) -> RationalTransfer {
    RationalTransfer::new(p(num), p(den)).unwrap()
}

fn j(w: f64) -> Complex64 {
    Complex64::new(0.0, w)
}

/// Horner evaluation on raw ascending coefficients, independent of the
/// library's polynomial type.
fn horner(c: &[f64], s: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &v| acc * s + v)
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn sweep(preset: &str, hs: &[f64], realizations: usize, methods: &[Method]) -> SweepOutput {
    let mut cfg = ExperimentConfig::for_preset(preset, Profile::Desk);
    cfg.h_grid = hs.to_vec();
    cfg.realizations = realizations;
    cfg.methods = methods.to_vec();
    cmd_sweep(&cfg.resolve().unwrap(), None).unwrap()
}

pub fn column(out: &SweepOutput, method: Method, h: f64, gap: bool) -> Vec<f64> {
    out.rows
        .iter()
        .filter(|r| r.method == method && r.h == h)
        .filter_map(|r| if gap { r.nu_gap } else { r.normalized_param_error })
        .collect()
}

// ---- polynomials and models

pub fn p1_characteristic_polynomial() -> Check {
    // (p − 1)(0.2p − 2) = 0.2p² − 2.2p + 2; plus 3p + 7
    let got = Polynomial::combine(&Polynomial::combine(&p(&[-1.0, 1.0]), &p(&[-2.0, 0.2]), PolyOp::Multiply), &p(&[7.0, 3.0]), PolyOp::Add);
    let want = [9.0, 0.8, 0.2];
    ensure(got.coeffs().len() == 3, || format!("degree of {got}"))?;
    for (g, w) in got.coeffs().iter().zip(want) {
        close(*g, w, 1e-14, "P1 characteristic coefficient")?;
    }
    Ok(())
}

pub fn biproper_controller_realization() -> Check {
    // (3s + 7)/(0.2s − 2) = 15 + 37/(0.2s − 2)
    let ss = realize_siso(&tf(&[7.0, 3.0], &[-2.0, 0.2]));
    close(ss.d[(0, 0)], 15.0, 1e-12, "feedthrough")?;
    ensure(ss.states() == 1, || "one state".into())?;
    for w in [0.1, 1.0, 7.0] {
        let got = ss.eval(j(w)).unwrap()[(0, 0)];
        let want = 15.0 + 37.0 / (0.2 * j(w) - 2.0);
        ensure((got - want).norm() < 1e-12, || format!("remainder at {w}: {got} vs {want}"))?;
    }
    Ok(())
}

pub fn p4_realization_matches_fraction() -> Check {
    let mfd = p4_plant();
    let ss = realize_mfd(&mfd);
    ensure(ss.states() == 6, || format!("state dimension {}", ss.states()))?;
    let s = j(1.0);
    let d = horner(&[-4.0, 3.6, -0.6, 1.0], s);
    let nums = [[vec![4.4, 1.4, 1.0], vec![1.0]], [vec![7.6, -3.8, 3.0], vec![-1.0, 1.0, 1.0]]];
    let g = ss.eval(s).unwrap();
    for i in 0..2 {
        for k in 0..2 {
            let want = horner(&nums[i][k], s) / d;
            ensure((g[(i, k)] - want).norm() < 1e-10, || format!("entry ({i},{k}): {} vs {want}", g[(i, k)]))?;
        }
    }
    Ok(())
}

pub fn unstable_lag_response() -> Check {
    let g = tf(&[1.0], &[-1.0, 1.0]).frequency_response(1.0).unwrap()[(0, 0)];
    close(g.re, -0.5, 1e-15, "re")?;
    close(g.im, -0.5, 1e-15, "im")
}

pub fn discrete_dc_gain() -> Check {
    let m = |v: f64| DMatrix::from_element(1, 1, v);
    let dss = DiscreteStateSpace::new(m(0.5), m(1.0), m(1.0), m(0.0), 1.0).unwrap();
    close(dss.frequency_response(0.0).unwrap()[(0, 0)].re, 2.0, 1e-15, "1/(1 − 0.5)")
}

pub fn scalar_zero_order_hold() -> Check {
    let m = |v: f64| DMatrix::from_element(1, 1, v);
    let d = c2d_zoh(&StateSpace::new(m(-1.0), m(1.0), m(1.0), m(0.0)).unwrap(), 0.1).unwrap();
    close(d.ad[(0, 0)], (-0.1f64).exp(), 1e-15, "Ad")?;
    close(d.bd[(0, 0)], 1.0 - (-0.1f64).exp(), 1e-15, "Bd")?;
    close(d.ad[(0, 0)], 0.904837, 5e-7, "Ad 6 s.f.")?;
    close(d.bd[(0, 0)], 0.095163, 5e-7, "Bd 6 s.f.")
}

pub fn first_order_h2_norm() -> Check {
    close(h2_norm_ct(&realize_siso(&tf(&[1.0], &[1.0, 1.0]))).unwrap(), 0.5f64.sqrt(), 1e-12, "‖1/(s+1)‖₂")
}

/// `∫ f(t)² dt` of the band-pass prefilter by Simpson's rule on its impulse
/// response, propagated with an independent RK4 integrator.
pub fn band_pass_h2_against_quadrature() -> Check {
    let ss = realize_siso(&SvfFilter::band_pass());
    let lyap = h2_norm_ct(&ss).unwrap().powi(2);
    let a = &ss.a;
    let dt = 1e-3;
    let n = 60_000; // 60 s, tail below 1e-20
    let mut x = DVector::from_column_slice(ss.b.as_slice());
    let mut f2 = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        f2.push((&ss.c * &x)[(0, 0)].powi(2));
        let k1 = a * &x;
        let k2 = a * (&x + &k1 * (dt / 2.0));
        let k3 = a * (&x + &k2 * (dt / 2.0));
        let k4 = a * (&x + &k3 * dt);
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    let simpson = dt / 3.0
        * (f2[0] + f2[n] + (1..n).map(|k| if k % 2 == 1 { 4.0 * f2[k] } else { 2.0 * f2[k] }).sum::<f64>());
    ensure(lyap > 0.0 && lyap.is_finite(), || format!("‖F‖² = {lyap}"))?;
    close(lyap, simpson, 1e-6 * lyap, "‖F‖² Lyapunov vs quadrature")
}

pub fn sampled_first_order_norm() -> Check {
    let h: f64 = 0.01;
    let want = (1.0 - (-h).exp()).powi(2) / (1.0 - (-2.0 * h).exp());
    let rep = cmd_verify_lemma1(&tf(&[1.0], &[1.0, 1.0]), &[h]).unwrap();
    close(rep.rows[0].discrete_norm2, want, 1e-15, "‖F_h‖² closed form")?;
    ensure(format!("{:.7}", rep.rows[0].discrete_norm2) == "0.0050000", || {
        format!("5 s.f.: {:.7}", rep.rows[0].discrete_norm2)
    })?;
    close(rep.rows[0].ratio, 1.0, 5e-5, "ratio")
}

pub fn band_pass_ratio_at_fast_sampling() -> Check {
    let rep = cmd_verify_lemma1(&SvfFilter::band_pass(), &[1e-3]).unwrap();
    close(rep.rows[0].ratio, 1.0, 0.02, "ratio at h = 1e-3")
}

pub fn unstable_pole_count_of_p3() -> Check {
    let n = tf(&[-1.0, 1.0], &[-4.0, 0.0, 1.0]).unstable_pole_count().unwrap();
    ensure(n == 1, || format!("count {n}"))
}

pub fn p1_loop_eigenvalues() -> Check {
    let cl = closed_loop_assemble(&realize_siso(&tf(&[1.0], &[-1.0, 1.0])), &realize_siso(&tf(&[7.0, 3.0], &[-2.0, 0.2])))
        .unwrap();
    // roots of 0.2s² + 0.8s + 9: −2 ± j√41
    let mut poles = cl.poles();
    poles.sort_by(|a, b| a.im.total_cmp(&b.im));
    ensure(poles.len() == 2, || format!("{poles:?}"))?;
    close(poles[0].re, -2.0, 1e-9, "re")?;
    close(poles[1].im, 41f64.sqrt(), 1e-9, "im")?;
    close(poles[1].im, 6.4031, 5e-5, "im 5 s.f.")
}

// ---- signals and simulation

pub fn shifted_square_wave() -> Check {
    let v = gen_square_wave(&ExcitationSpec::square(4.0, 1.0, 1.0), 0.0);
    close(v, -1.0, 0.0, "period 4, phase 1, t = 0")
}

pub fn gaussian_noise_moments() -> Check {
    let n = 1_000_000;
    let v = gen_noise(&NoiseSpec::white(0.1), n, &mut ChaCha8Rng::seed_from_u64(42));
    let mean = v.iter().sum::<f64>() / n as f64;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    ensure(mean.abs() < 4.0 * 0.1 / (n as f64).sqrt(), || format!("mean {mean}"))?;
    ensure((sd - 0.1).abs() < 0.001, || format!("std {sd}"))
}

pub fn open_loop_step_response() -> Check {
    let plant = realize_siso(&tf(&[1.0], &[1.0, 1.0]));
    let zero = StateSpace::static_gain(DMatrix::zeros(1, 1));
    let cfg = SimulationConfig {
        fine_step: 1e-3,
        t_start: 0.0,
        t_end: 5.0,
        seed: 0,
        // +1 for the whole run
        excitation_u: vec![ExcitationSpec::square(1e6, 1.0, 0.0)],
        excitation_y: vec![ExcitationSpec::zero()],
        noise_w: vec![NoiseSpec::none()],
        noise_eta: vec![NoiseSpec::none()],
        record_clean: false,
    };
    let rec = simulate_closed_loop(&plant, &zero, &cfg).unwrap();
    for (k, y) in rec.y[0].iter().enumerate() {
        let t = k as f64 * 1e-3;
        close(*y, 1.0 - (-t).exp(), 1e-9, "1 − e^{−t}")?;
    }
    Ok(())
}

// ---- filters and regression

pub fn double_lag_filter_step() -> Check {
    let bank = build_filter_bank(&SvfFilter { tf: tf(&[1.0], &[1.0, 2.0, 1.0]), max_derivative: 1 }).unwrap();
    let h = 1e-2;
    let dm = SampledBank::new(&bank, h).unwrap().filter(&vec![1.0; 1001], HoldAlignment::Ceil);
    for i in 0..dm.rows {
        let t = i as f64 * h;
        close(dm.get(i, 0), 1.0 - (-t).exp() * (1.0 + t), 1e-12, "output 0")?;
        close(dm.get(i, 1), t * (-t).exp(), 1e-12, "output 1")?;
    }
    Ok(())
}

pub fn band_pass_leading_markov_parameter() -> Check {
    let bank = build_filter_bank(&SvfFilter { tf: SvfFilter::band_pass(), max_derivative: 2 }).unwrap();
    // s³ / (s³ + 2.8s² + 2.8s + 1) = 1 − (2.8s² + 2.8s + 1)/d
    close(bank.d_k[2], 1.0, 0.0, "D_2")
}

pub fn band_pass_nulls_offsets() -> Check {
    let bank = build_filter_bank(&SvfFilter { tf: SvfFilter::band_pass(), max_derivative: 1 }).unwrap();
    let c = 10.0;
    let h = 1e-3;
    let dm = SampledBank::new(&bank, h).unwrap().filter(&vec![c; 20_001], HoldAlignment::Ceil);
    for i in 15_000..dm.rows {
        ensure(dm.get(i, 0).abs() < 1e-4 * c, || format!("|output_0| = {} at t = {}", dm.get(i, 0), i as f64 * h))?;
    }
    Ok(())
}

/// Noise-free P4 data leaves an equation error `Y_A − D_F θ*` of only the
/// sampling error.
pub fn p4_noise_free_residual() -> Check {
    let mut cfg = ExperimentConfig::for_preset("P4", Profile::Desk);
    cfg.h_grid = vec![1e-3];
    let mut exp = cfg.resolve().unwrap();
    exp.preset.noise_w = vec![NoiseSpec::none(); 2];
    exp.preset.noise_eta = vec![NoiseSpec::none(); 2];
    let sim = LoopSimulator::new(&exp.preset.plant_ss, &exp.preset.controller, exp.cfg.fine_step).unwrap();
    let rec = realization_records(&exp, &sim, 0).unwrap().remove(0);
    let reg = svf_regression(&rec, exp.structure, &exp.filter, exp.preset.discard, SvfOptions::default()).unwrap();
    let r = reg.residual(&exp.truth);
    let rms = (r.norm_squared() / r.len() as f64).sqrt();
    ensure(rms < 1e-6, || format!("residual RMS {rms:e}"))
}

pub fn hand_least_squares() -> Check {
    let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    let sol = lstsq(&a, &DVector::from_vec(vec![1.0, 2.0, 3.0])).unwrap();
    close(sol.theta[0], 1.0, 1e-12, "θ₁")?;
    close(sol.theta[1], 2.0, 1e-12, "θ₂")?;
    close(sol.residual_norm, 0.0, 1e-12, "residual")
}

pub fn p1_noise_free_parameters() -> Check {
    let mut cfg = ExperimentConfig::for_preset("P1f", Profile::Desk);
    cfg.h_grid = vec![1e-3];
    let exp = cfg.resolve().unwrap();
    let sim = LoopSimulator::new(&exp.preset.plant_ss, &exp.preset.controller, exp.cfg.fine_step).unwrap();
    let rec = realization_records(&exp, &sim, 0).unwrap().remove(0);
    let est = identify_record(&exp, &rec).unwrap();
    close(est.theta[0], -1.0, 1e-2, "d0")?;
    close(est.theta[1], 1.0, 1e-2, "n0")
}

pub fn p1o_svf_gap() -> Check {
    let out = sweep("P1o", &[1e-2], 20, &[Method::Svf]);
    let m = median(&mut column(&out, Method::Svf, 1e-2, true));
    ensure(m < 0.1, || format!("median ν-gap {m}"))
}

// ---- ARX

pub fn arx_recovers_difference_equation() -> Check {
    let n = 300;
    let u = gen_noise(&NoiseSpec::white(1.0), n, &mut ChaCha8Rng::seed_from_u64(3));
    let mut y = vec![0.0; n];
    for k in 1..n {
        y[k] = 0.5 * y[k - 1] + u[k - 1];
    }
    let fit = fit_arx(&SampledRecord { h: 0.05, t0: 0.0, u: vec![u], y: vec![y] }, 1, 1, 1).unwrap();
    close(fit.a[0][0], 1.0, 0.0, "a₀")?;
    close(fit.a[0][1], -0.5, 1e-10, "a₁")?;
    close(fit.b[0][0][0], 1.0, 1e-10, "b₁")
}

pub fn arx_dc_gain() -> Check {
    for h in [1e-3, 0.1, 2.0] {
        let m = ArxModel {
            a: vec![vec![1.0, -0.5]],
            b: vec![vec![vec![1.0]]],
            na: 1,
            nb: 1,
            nk: 1,
            h,
            residual_norm: 0.0,
            condition_number: 1.0,
        };
        close(arx_freq_response(&m, 0.0).unwrap()[(0, 0)].re, 2.0, 1e-15, "1/(1 − 0.5)")?;
    }
    Ok(())
}

// ---- metrics

pub fn chordal_gain_pair() -> Check {
    let d = chordal_distance_siso(Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0));
    close(d, 1.0 / 10f64.sqrt(), 1e-15, "1/√10")?;
    close(d, 0.316228, 1e-6, "6 s.f.")
}

pub fn nu_gap_gain_pair() -> Check {
    let g = FrequencyGrid::log_spaced(1e-3, 1e3, 60).unwrap();
    let r = nu_gap(&RationalTransfer::gain(1.0), &RationalTransfer::gain(2.0), &g).unwrap();
    ensure(r.winding_ok, || "winding".into())?;
    close(r.value, 0.316228, 1e-6, "ν-gap")
}

pub fn parameter_error_arithmetic() -> Check {
    close(normalized_param_error(&[-1.1, 0.9], &[-1.0, 1.0]).unwrap(), 0.01, 1e-15, "(0.01 + 0.01)/2")
}

// ---- harness reports

pub fn covariance_at_millisecond() -> Check {
    let rep = cmd_verify_covariance(&[1e-3], CovarianceSettings::default()).unwrap();
    let tr = rep.rows[0].trace;
    ensure((tr / 2e-4 - 1.0).abs() < 0.2, || format!("trace {tr:e}"))
}

pub fn bode_unstable_lag() -> Check {
    let (mag, _) = bode_entry(&tf(&[1.0], &[-1.0, 1.0]), 0, 0, &[1.0]).unwrap();
    close(mag[0], 20.0 * 0.5f64.sqrt().log10(), 1e-12, "20 log10(1/√2)")?;
    close(mag[0], -3.01, 5e-3, "−3.01 dB")
}

pub fn bode_clustering_of_p1_models() -> Check {
    let mut cfg = ExperimentConfig::for_preset("P1", Profile::Desk);
    cfg.h_grid = vec![1e-4];
    cfg.realizations = 50;
    let exp: Experiment = cfg.resolve().unwrap();
    let sim = LoopSimulator::new(&exp.preset.plant_ss, &exp.preset.controller, exp.cfg.fine_step).unwrap();
    let grid = FrequencyGrid::log_spaced(1e-2, 1e2, 50).unwrap();
    let mut within = 0;
    for r in 0..50 {
        let rec = realization_records(&exp, &sim, r).unwrap().remove(0);
        let est = identify_record(&exp, &rec).unwrap();
        if max_magnitude_deviation_db(&est.model, &exp.preset.plant, grid.omegas()).unwrap() < 1.0 {
            within += 1;
        }
    }
    ensure(within >= 45, || format!("{within} of 50 within 1 dB"))
}

/// Every reference check with its name.
pub fn all_checks() -> Vec<(&'static str, fn() -> Check)> {
    vec![
        ("P1 characteristic polynomial", p1_characteristic_polynomial),
        ("biproper controller realization", biproper_controller_realization),
        ("P4 realization vs direct fraction", p4_realization_matches_fraction),
        ("1/(s−1) at ω = 1", unstable_lag_response),
        ("discrete DC gain", discrete_dc_gain),
        ("scalar zero-order hold", scalar_zero_order_hold),
        ("H2 norm of 1/(s+1)", first_order_h2_norm),
        ("band-pass H2 vs quadrature", band_pass_h2_against_quadrature),
        ("sampled first-order norm", sampled_first_order_norm),
        ("band-pass ratio at h = 1e-3", band_pass_ratio_at_fast_sampling),
        ("P3 unstable pole count", unstable_pole_count_of_p3),
        ("P1 loop eigenvalues", p1_loop_eigenvalues),
        ("shifted square wave", shifted_square_wave),
        ("Gaussian noise moments", gaussian_noise_moments),
        ("open-loop step response", open_loop_step_response),
        ("double-lag filter step", double_lag_filter_step),
        ("band-pass leading Markov parameter", band_pass_leading_markov_parameter),
        ("band-pass offset nulling", band_pass_nulls_offsets),
        ("P4 noise-free residual", p4_noise_free_residual),
        ("hand least squares", hand_least_squares),
        ("P1 noise-free parameters", p1_noise_free_parameters),
        ("P1 with offsets, SVF ν-gap", p1o_svf_gap),
        ("ARX difference equation", arx_recovers_difference_equation),
        ("ARX DC gain", arx_dc_gain),
        ("chordal distance of gains", chordal_gain_pair),
        ("ν-gap of gains", nu_gap_gain_pair),
        ("parameter error arithmetic", parameter_error_arithmetic),
        ("covariance trace at h = 1e-3", covariance_at_millisecond),
        ("Bode of 1/(s−1)", bode_unstable_lag),
        ("Bode clustering of P1 models", bode_clustering_of_p1_models),
    ]
}

pub fn catalog_models(name: &str) -> Model {
    preset_catalog(name).unwrap().plant
}
