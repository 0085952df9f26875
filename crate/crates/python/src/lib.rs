//! Python bindings. Structured results (estimates, reports, sweep rows) come
//! back as plain dicts and lists through their JSON form.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyComplex;
use serde::Serialize;

use fastsvf::arx;
use fastsvf::harness::{self, CovarianceSettings, ExperimentConfig, FilterChoice, Profile};
use fastsvf::lti::{self, LinearModel, MatrixFraction, RationalTransfer};
use fastsvf::metrics;
use fastsvf::sim::{self, LoopSimulator};
use fastsvf::svf::{self, Structure, SvfFilter};
use fastsvf::Polynomial;

fn err(e: fastsvf::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn profile(name: &str) -> PyResult<Profile> {
    match name {
        "desk" => Ok(Profile::Desk),
        "paper" => Ok(Profile::Paper),
        other => Err(PyValueError::new_err(format!("profile must be 'desk' or 'paper', got {other:?}"))),
    }
}

/// A continuous-time transfer function or common-denominator matrix
/// fraction. Coefficients are in ascending powers of `s`.
#[pyclass(name = "Model", module = "pyfastsvf", from_py_object)]
#[derive(Clone)]
struct PyModel {
    inner: lti::Model,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn transfer(num: Vec<f64>, den: Vec<f64>) -> PyResult<Self> {
        let tf = RationalTransfer::new(Polynomial::new(num), Polynomial::new(den)).map_err(err)?;
        Ok(Self { inner: lti::Model::Siso(tf) })
    }

    /// `num[i][j]` is the numerator of entry `(i, j)`.
    #[staticmethod]
    fn matrix_fraction(den: Vec<f64>, num: Vec<Vec<Vec<f64>>>) -> PyResult<Self> {
        let num = num.into_iter().map(|row| row.into_iter().map(Polynomial::new).collect()).collect();
        let mfd = MatrixFraction::new(Polynomial::new(den), num).map_err(err)?;
        Ok(Self { inner: lti::Model::Mfd(mfd) })
    }

    /// Model encoded by an SVF parameter vector `[d_{n-1}..d_0, N_11, …]`.
    #[staticmethod]
    #[pyo3(signature = (theta, n, m = 1, l = 1))]
    fn from_theta(theta: Vec<f64>, n: usize, m: usize, l: usize) -> PyResult<Self> {
        Ok(Self { inner: svf::model_from_theta(&theta, Structure { n, m, l }).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("model serializes")
    }

    /// `(outputs, inputs)`.
    fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    fn order(&self) -> usize {
        self.inner.order()
    }

    fn poles<'py>(&self, py: Python<'py>) -> Vec<Bound<'py, PyComplex>> {
        lti::realize(&self.inner).poles().iter().map(|p| PyComplex::from_doubles(py, p.re, p.im)).collect()
    }

    fn unstable_pole_count(&self) -> PyResult<usize> {
        self.inner.unstable_pole_count().map_err(err)
    }

    fn h2_norm(&self) -> PyResult<f64> {
        lti::h2_norm_ct(&lti::realize(&self.inner)).map_err(err)
    }

    /// Gain matrix at `s = jω` as nested lists of complex numbers.
    fn frequency_response<'py>(&self, py: Python<'py>, omega: f64) -> PyResult<Vec<Vec<Bound<'py, PyComplex>>>> {
        let g = self.inner.frequency_response(omega).map_err(err)?;
        Ok((0..g.nrows())
            .map(|i| (0..g.ncols()).map(|j| PyComplex::from_doubles(py, g[(i, j)].re, g[(i, j)].im)).collect())
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Model({})", self.to_json())
    }
}

/// Uniformly sampled input and output channels.
#[pyclass(name = "SampledRecord", module = "pyfastsvf", from_py_object)]
#[derive(Clone)]
struct PySampledRecord {
    inner: sim::SampledRecord,
}

#[pymethods]
impl PySampledRecord {
    #[new]
    #[pyo3(signature = (h, u, y, t0 = 0.0))]
    fn new(h: f64, u: Vec<Vec<f64>>, y: Vec<Vec<f64>>, t0: f64) -> PyResult<Self> {
        let len = u.first().or(y.first()).map_or(0, Vec::len);
        if !(h > 0.0) || u.iter().chain(&y).any(|c| c.len() != len) {
            return Err(PyValueError::new_err("h must be positive and all channels the same length"));
        }
        Ok(Self { inner: sim::SampledRecord { h, t0, u, y } })
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }

    #[getter]
    fn t0(&self) -> f64 {
        self.inner.t0
    }

    #[getter]
    fn u(&self) -> Vec<Vec<f64>> {
        self.inner.u.clone()
    }

    #[getter]
    fn y(&self) -> Vec<Vec<f64>> {
        self.inner.y.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn retain_from(&self, t: f64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.retain_from(t).map_err(err)? })
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.inner.write_csv(&mut buf).map_err(err)?;
        String::from_utf8(buf).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

/// Names of the built-in loops.
#[pyfunction]
fn presets() -> Vec<&'static str> {
    harness::PRESET_NAMES.to_vec()
}

/// The true plant of a preset.
#[pyfunction]
fn preset_plant(name: &str) -> PyResult<PyModel> {
    Ok(PyModel { inner: harness::preset_catalog(name).map_err(err)?.plant })
}

/// Closed-loop data of one realization of a preset, sampled at `h` from
/// `t_start` on.
#[pyfunction]
#[pyo3(signature = (preset, h, realization = 0, seed = None, profile = "desk"))]
fn simulate(preset: &str, h: f64, realization: usize, seed: Option<u64>, profile: &str) -> PyResult<PySampledRecord> {
    let mut cfg = ExperimentConfig::for_preset(preset, self::profile(profile)?);
    cfg.h_grid = vec![h];
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    let exp = cfg.resolve().map_err(err)?;
    let sim = LoopSimulator::new(&exp.preset.plant_ss, &exp.preset.controller, cfg.fine_step).map_err(err)?;
    let rec = harness::realization_records(&exp, &sim, realization).map_err(err)?.remove(0);
    Ok(PySampledRecord { inner: rec })
}

/// SVF least-squares identification of an order-`n` model. `filter` is
/// `"eqF"`, `"eqF3"` or a Model whose relative degree is at least `n`.
#[pyfunction]
#[pyo3(signature = (record, n, filter = None, discard = 0.0))]
fn identify_svf<'py>(
    py: Python<'py>,
    record: &PySampledRecord,
    n: usize,
    filter: Option<&Bound<'py, PyAny>>,
    discard: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let tf = match filter {
        None => SvfFilter::band_pass(),
        Some(f) => {
            if let Ok(name) = f.extract::<String>() {
                match name.as_str() {
                    "eqF" => FilterChoice::EqF.transfer(),
                    "eqF3" => FilterChoice::EqF3.transfer(),
                    other => return Err(PyValueError::new_err(format!("unknown filter {other:?}"))),
                }
            } else {
                match f.extract::<PyModel>()?.inner {
                    lti::Model::Siso(tf) => tf,
                    lti::Model::Mfd(_) => return Err(PyValueError::new_err("filter must be a scalar transfer")),
                }
            }
        }
    };
    let rec = &record.inner;
    let s = Structure { n, m: rec.inputs(), l: rec.outputs() };
    let est = svf::identify_svf(rec, s, &SvfFilter::new(tf, n).map_err(err)?, discard).map_err(err)?;
    to_py(py, &est)
}

/// Least-squares ARX fit; `a` and `b` come back in ascending delay order.
#[pyfunction]
#[pyo3(signature = (record, na = 10, nb = 10, nk = 1))]
fn fit_arx<'py>(py: Python<'py>, record: &PySampledRecord, na: usize, nb: usize, nk: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &arx::fit_arx(&record.inner, na, nb, nk).map_err(err)?)
}

/// ν-gap between two continuous-time models on an adaptive grid.
#[pyfunction]
fn nu_gap<'py>(py: Python<'py>, a: &PyModel, b: &PyModel) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &metrics::nu_gap_auto(&a.inner, &b.inner).map_err(err)?)
}

/// ν-gap between an ARX fit (as returned by `fit_arx`) and a model.
#[pyfunction]
fn arx_nu_gap<'py>(py: Python<'py>, fit: &Bound<'py, PyAny>, truth: &PyModel) -> PyResult<Bound<'py, PyAny>> {
    let text: String = py.import("json")?.call_method1("dumps", (fit,))?.extract()?;
    let fit: arx::ArxModel = serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &metrics::nu_gap_auto(&fit, &truth.inner).map_err(err)?)
}

/// Chordal distance between two complex gains.
#[pyfunction]
fn chordal_distance(a: Complex64, b: Complex64) -> f64 {
    metrics::chordal_distance_siso(a, b)
}

#[pyfunction]
fn normalized_param_error(estimate: Vec<f64>, truth: Vec<f64>) -> PyResult<f64> {
    metrics::normalized_param_error(&estimate, &truth).map_err(err)
}

/// `‖F_h‖₂² / (h ‖F‖₂²)` for each interval.
#[pyfunction]
fn verify_lemma1<'py>(py: Python<'py>, filter: &PyModel, hs: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let lti::Model::Siso(tf) = &filter.inner else {
        return Err(PyValueError::new_err("filter must be a scalar transfer"));
    };
    to_py(py, &harness::cmd_verify_lemma1(tf, &hs).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (hs, sigma = 1.0, t_final = 20.0, runs = 200, seed = 1))]
fn verify_covariance<'py>(
    py: Python<'py>,
    hs: Vec<f64>,
    sigma: f64,
    t_final: f64,
    runs: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let set = CovarianceSettings { sigma, t_final, runs, seed };
    to_py(py, &harness::cmd_verify_covariance(&hs, set).map_err(err)?)
}

/// Runs a sweep and returns `(rows, summary)`. `config` is a JSON string
/// merged over the profile defaults of its preset.
#[pyfunction]
#[pyo3(signature = (config = None, preset = "P1", profile = "desk", jobs = None))]
fn sweep<'py>(
    py: Python<'py>,
    config: Option<&str>,
    preset: &str,
    profile: &str,
    jobs: Option<usize>,
) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>)> {
    let prof = self::profile(profile)?;
    let cfg = match config {
        Some(text) => ExperimentConfig::from_json(text, prof).map_err(err)?,
        None => ExperimentConfig::for_preset(preset, prof),
    };
    let exp = cfg.resolve().map_err(err)?;
    let out = py.detach(|| harness::cmd_sweep(&exp, jobs)).map_err(err)?;
    Ok((to_py(py, &out.rows)?, to_py(py, &out.summary)?))
}

#[pymodule]
fn pyfastsvf(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PySampledRecord>()?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(preset_plant, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(identify_svf, m)?)?;
    m.add_function(wrap_pyfunction!(fit_arx, m)?)?;
    m.add_function(wrap_pyfunction!(nu_gap, m)?)?;
    m.add_function(wrap_pyfunction!(arx_nu_gap, m)?)?;
    m.add_function(wrap_pyfunction!(chordal_distance, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_param_error, m)?)?;
    m.add_function(wrap_pyfunction!(verify_lemma1, m)?)?;
    m.add_function(wrap_pyfunction!(verify_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
