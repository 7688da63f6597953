//! Python extension module exposing the main types and operations of the
//! toolkit: attenuation models, the free-space kernel and its
//! derivatives, the closed-form weak kernel, Gram spectra, decay fits and
//! trace synthesis.
//!
//! Build with `cargo build -p attenuspec-python --release` and import the
//! produced cdylib as `attenuspec_py` (see python/smoke_test.py).

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use attenuspec_core::attenuation::{self, AttenuationModel, Classification};
use attenuspec_core::config::RunConfig;
use attenuspec_core::error::Error;
use attenuspec_core::geometry::{interior_grid, BallGeometry};
use attenuspec_core::operator::{
    gram_direct, gram_weak, Discretization, FrequencyGrid, WeakGramOptions,
};
use attenuspec_core::signals::{causality_check, synthesize, SynthesisGrid};
use attenuspec_core::spectra::{self, DecayLaw, SpectrumReport};
use attenuspec_core::wavekernel;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Numerics(_) | Error::NoLimit(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn classify_grid() -> Vec<f64> {
    (1..=400).map(|k| 0.25 * k as f64).collect()
}

/// An attenuation model from the catalog.
#[pyclass(frozen)]
struct Model {
    inner: AttenuationModel,
}

#[pymethods]
impl Model {
    /// Model("power_law", gamma=0.5, alpha=1.0) etc.; parameter names
    /// follow the config schema (tau, gamma, alpha, c0, tau_tilde, c).
    #[new]
    #[pyo3(signature = (name, **params))]
    fn new(name: &str, params: Option<Bound<'_, pyo3::types::PyDict>>) -> PyResult<Self> {
        let mut json = serde_json::Map::new();
        json.insert("model".into(), serde_json::Value::String(name.into()));
        if let Some(params) = params {
            for (k, v) in params.iter() {
                let key: String = k.extract()?;
                let value: f64 = v.extract()?;
                json.insert(key, serde_json::json!(value));
            }
        }
        let cfg: attenuspec_core::config::ModelConfig =
            serde_json::from_value(serde_json::Value::Object(json))
                .map_err(|e| PyValueError::new_err(format!("bad model spec: {e}")))?;
        Ok(Model { inner: cfg.build().map_err(to_py_err)? })
    }

    fn name(&self) -> &str {
        self.inner.name()
    }

    /// kappa(omega) on the real axis.
    fn kappa(&self, omega: f64) -> Complex64 {
        self.inner.kappa(omega)
    }

    /// Holomorphic extension kappa~(z) for Im z >= 0.
    fn kappa_tilde(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.kappa_tilde(z).map_err(to_py_err)
    }

    /// Numerical propagation speed; returns float('inf') for divergent
    /// models.
    #[pyo3(signature = (omega_max = 1e9, tol = 1e-6))]
    fn propagation_speed(&self, omega_max: f64, tol: f64) -> PyResult<f64> {
        attenuation::propagation_speed(&self.inner, omega_max, tol).map_err(to_py_err)
    }

    /// Classification dictionary: kind plus the table constants.
    fn classify<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let dict = pyo3::types::PyDict::new(py);
        match attenuation::classify(&self.inner, &classify_grid()).map_err(to_py_err)? {
            Classification::Strong(p) => {
                dict.set_item("kind", "strong")?;
                dict.set_item("kappa0", p.kappa0)?;
                dict.set_item("beta", p.beta)?;
                dict.set_item("omega0", p.omega0)?;
                dict.set_item("kappa1", p.kappa1)?;
                dict.set_item("N", p.n_exp)?;
            }
            Classification::Weak(w) => {
                dict.set_item("kind", "weak")?;
                dict.set_item("c", w.c)?;
                dict.set_item("kappa_inf", w.kappa_inf)?;
            }
        }
        Ok(dict)
    }

    /// Max of |kappa(-w) + conj(kappa(w))| over the grid.
    fn symmetry_defect(&self, grid: Vec<f64>) -> f64 {
        attenuation::validate_symmetry(&self.inner, &grid)
    }

    fn __repr__(&self) -> String {
        format!("Model({:?})", self.inner)
    }
}

/// Free-space kernel G(omega, x) of the attenuated wave equation.
#[pyfunction]
fn greens(model: &Model, omega: f64, x: [f64; 3]) -> PyResult<Complex64> {
    wavekernel::greens(&model.inner, omega, x).map_err(to_py_err)
}

/// j-th directional derivative of the kernel at x along the unit vector v.
#[pyfunction]
fn directional_derivative(
    model: &Model,
    omega: f64,
    x: [f64; 3],
    v: [f64; 3],
    j: usize,
) -> PyResult<Complex64> {
    wavekernel::directional_derivative(&model.inner, omega, x, v, j).map_err(to_py_err)
}

/// Closed-form constant-attenuation kernel F0(x, y) on a ball of radius R
/// with standoff eps (weak models only).
#[pyfunction]
fn gram_weak_f0(model: &Model, radius: f64, eps: f64, x: [f64; 3], y: [f64; 3]) -> PyResult<f64> {
    let geom = BallGeometry::new([0.0; 3], radius, eps).map_err(to_py_err)?;
    let class = attenuation::classify(&model.inner, &classify_grid()).map_err(to_py_err)?;
    let split = class.weak().map_err(to_py_err)?;
    attenuspec_core::operator::gram_weak_f0(split, &geom, x, y).map_err(to_py_err)
}

/// Assembles the Gram matrix for a JSON configuration and returns the
/// eigenvalue spectrum (descending).
#[pyfunction]
fn spectrum(config_json: &str) -> PyResult<Vec<f64>> {
    let cfg = RunConfig::from_json(config_json).map_err(to_py_err)?;
    let model = cfg.model.build().map_err(to_py_err)?;
    let geom = cfg.geometry.build().map_err(to_py_err)?;
    let disc =
        Discretization::new(geom, cfg.geometry.n_boundary, cfg.geometry.h).map_err(to_py_err)?;
    let class = attenuation::classify(&model, &classify_grid()).map_err(to_py_err)?;
    let gram = match &class {
        Classification::Strong(params) => {
            let freq = FrequencyGrid::for_strong(&model, params, geom.eps, 2.0 * geom.radius)
                .map_err(to_py_err)?;
            gram_direct(&model, &class, &disc, &freq).map_err(to_py_err)?
        }
        Classification::Weak(split) => {
            let opts = WeakGramOptions {
                omega_band: cfg.frequency.omega_band,
                kstar_threshold: cfg.frequency.kstar_threshold,
                t_pad: cfg.frequency.t_pad,
                diagonal: cfg.frequency.diagonal,
            };
            gram_weak(split, &disc, &opts).map_err(to_py_err)?
        }
    };
    Ok(spectra::eigen_spectrum(&gram).map_err(to_py_err)?.eigenvalues)
}

fn as_report(eigenvalues: Vec<f64>) -> PyResult<SpectrumReport> {
    SpectrumReport::from_eigenvalues(eigenvalues, "python", "python").map_err(to_py_err)
}

/// Least-squares power-law fit log l_n = log C - p log n over the 1-based
/// inclusive range; returns (p, prefactor, r_squared).
#[pyfunction]
fn fit_power(eigenvalues: Vec<f64>, lo: usize, hi: usize) -> PyResult<(f64, f64, f64)> {
    let fit = spectra::fit_power(&as_report(eigenvalues)?, (lo, hi)).map_err(to_py_err)?;
    let DecayLaw::PowerLaw { p } = fit.law else { unreachable!() };
    Ok((p, fit.prefactor, fit.r_squared))
}

/// Stretched-exponential fit log l_n = a - c n^s; returns
/// (c, prefactor, r_squared).
#[pyfunction]
fn fit_stretched(eigenvalues: Vec<f64>, s: f64, lo: usize, hi: usize) -> PyResult<(f64, f64, f64)> {
    let fit = spectra::fit_stretched(&as_report(eigenvalues)?, s, (lo, hi)).map_err(to_py_err)?;
    let DecayLaw::StretchedExp { c, .. } = fit.law else { unreachable!() };
    Ok((c, fit.prefactor, fit.r_squared))
}

/// Synthesizes a point-source pressure trace at the detector; returns
/// (times, values, acausal_energy_fraction).
#[pyfunction]
#[pyo3(signature = (model, detector, omega_cut = 128.0, n_t = 4096))]
fn point_source_trace(
    model: &Model,
    detector: [f64; 3],
    omega_cut: f64,
    n_t: usize,
) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let interior = attenuspec_core::geometry::InteriorGrid {
        points: vec![[0.0; 3]],
        weights: vec![1.0],
        spacing: 1.0,
    };
    let grid = SynthesisGrid { omega_cut, n_t };
    let trace =
        synthesize(&model.inner, &interior, &[1.0], detector, &grid).map_err(to_py_err)?;
    let frac = causality_check(&trace);
    Ok((trace.times, trace.values, frac))
}

/// Nystrom spectrum of a named synthetic 1-D kernel ("gaussian", "min",
/// "constant", "poly3").
#[pyfunction]
fn brute_spectrum(kernel: &str, n_disc: usize) -> PyResult<Vec<f64>> {
    let k = attenuspec_core::bounds::SyntheticKernel1D::by_name(kernel).map_err(to_py_err)?;
    Ok(attenuspec_core::bounds::brute_spectrum(&k, n_disc).map_err(to_py_err)?.eigenvalues)
}

/// Interior voxel count for a geometry, handy for sizing runs.
#[pyfunction]
fn interior_point_count(radius: f64, eps: f64, h: f64) -> PyResult<usize> {
    let geom = BallGeometry::new([0.0; 3], radius, eps).map_err(to_py_err)?;
    Ok(interior_grid(&geom, h).map_err(to_py_err)?.len())
}

#[pymodule]
fn attenuspec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(greens, m)?)?;
    m.add_function(wrap_pyfunction!(directional_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(gram_weak_f0, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(fit_power, m)?)?;
    m.add_function(wrap_pyfunction!(fit_stretched, m)?)?;
    m.add_function(wrap_pyfunction!(point_source_trace, m)?)?;
    m.add_function(wrap_pyfunction!(brute_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(interior_point_count, m)?)?;
    m.add("VERSION", attenuspec_core::VERSION)?;
    Ok(())
}
