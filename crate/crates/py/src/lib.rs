//! Python bindings for `critnls`.
//!
//! Built as the extension module `critnls`; solver results come back as plain
//! dicts and lists so they convert directly to NumPy or pandas.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use critnls::energy::RadialForm;
use critnls::geometry::{self, TransformSpec};
use critnls::grids::{make_radial_grid, RadialField, RadialGrid, Spacing};
use critnls::problem::{model_potentials, validate_params, ProblemParams};
use critnls::solve::{self, SolverOpts};
use critnls::verify::{self, CheckRecord, SuiteGrids};
use critnls::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Param(_) | Error::Config(_) | Error::Domain(_) | Error::Grid(_) | Error::Step(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Validated model parameters; the derived exponent and constants are read-only.
#[pyclass(name = "Params", frozen)]
#[derive(Clone)]
struct PyParams {
    inner: ProblemParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (dim = 3, a = 1.0, b = 1.0, s = 0.5, mu = 1.0))]
    fn new(dim: usize, a: f64, b: f64, s: f64, mu: f64) -> PyResult<Self> {
        Ok(PyParams { inner: validate_params(dim, a, b, s, mu).map_err(to_py)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }
    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }
    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }
    #[getter]
    fn s(&self) -> f64 {
        self.inner.s
    }
    #[getter]
    fn mu(&self) -> f64 {
        self.inner.mu
    }
    #[getter]
    fn p(&self) -> f64 {
        self.inner.p
    }
    #[getter]
    fn c_b(&self) -> f64 {
        self.inner.c_b
    }
    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("Params(dim={}, a={}, b={}, s={}, mu={}, p={})", p.dim, p.a, p.b, p.s, p.mu, p.p)
    }
}

/// Radial grid and solver settings shared by the solver entry points.
#[pyclass(name = "Settings", frozen)]
#[derive(Clone)]
struct PySettings {
    grid: SuiteGrids,
    opts: SolverOpts,
}

#[pymethods]
impl PySettings {
    #[new]
    #[pyo3(signature = (
        r_min = 1e-3, r_max = 40.0, nodes = 4000, spacing = "uniform",
        max_iters = 5000, tol = 1e-8, path_nodes = 40, seed = 0x5EED, perturbation = 0.0,
        tensor_half_width = 4.0, tensor_nodes = 128
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        r_min: f64,
        r_max: f64,
        nodes: usize,
        spacing: &str,
        max_iters: usize,
        tol: f64,
        path_nodes: usize,
        seed: u64,
        perturbation: f64,
        tensor_half_width: f64,
        tensor_nodes: usize,
    ) -> PyResult<Self> {
        let spacing: Spacing = spacing.parse().map_err(to_py)?;
        Ok(PySettings {
            grid: SuiteGrids { r_min, r_max, nodes, spacing, tensor_half_width, tensor_nodes },
            opts: SolverOpts { max_iters, tol, path_nodes, seed, perturbation },
        })
    }
}

impl PySettings {
    fn radial(&self, dim: usize) -> PyResult<Arc<RadialGrid>> {
        let g = &self.grid;
        make_radial_grid(dim, g.r_min, g.r_max, g.nodes, g.spacing).map_err(to_py)
    }
}

fn settings(s: Option<PySettings>) -> PySettings {
    s.unwrap_or_else(|| PySettings { grid: SuiteGrids::default(), opts: SolverOpts::default() })
}

fn put_field<'py>(d: &Bound<'py, PyDict>, key: &str, f: &RadialField) -> PyResult<()> {
    d.set_item("r", f.grid.radii().to_vec())?;
    d.set_item(key, f.vals.clone())
}

fn record_dict<'py>(py: Python<'py>, r: &CheckRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new_bound(py);
    d.set_item("name", &r.name)?;
    d.set_item("anchor", &r.anchor)?;
    d.set_item("measured", r.measured)?;
    d.set_item("target", r.target)?;
    d.set_item("tolerance", r.tolerance)?;
    d.set_item("passed", r.passed)?;
    d.set_item("details", &r.details)?;
    Ok(d)
}

/// Sobolev constant `S_p` of the isotropic problem and its normalized minimizer.
#[pyfunction]
#[pyo3(signature = (params, settings = None))]
fn ground_state_sp<'py>(
    py: Python<'py>,
    params: &PyParams,
    settings: Option<PySettings>,
) -> PyResult<Bound<'py, PyDict>> {
    let s = self::settings(settings);
    let grid = s.radial(params.inner.dim)?;
    let rep = solve::ground_state_sp(&params.inner, &grid, &s.opts).map_err(to_py)?;
    let d = PyDict::new_bound(py);
    d.set_item("value", rep.value)?;
    d.set_item("iterations", rep.iterations)?;
    d.set_item("gradient_norm", rep.final_gradient_norm)?;
    put_field(&d, "u", &rep.minimizer)?;
    Ok(d)
}

/// Nehari-quotient ground state of the transformed model problem.
#[pyfunction]
#[pyo3(signature = (params, settings = None))]
fn nehari_minimize<'py>(
    py: Python<'py>,
    params: &PyParams,
    settings: Option<PySettings>,
) -> PyResult<Bound<'py, PyDict>> {
    let s = self::settings(settings);
    let grid = s.radial(params.inner.dim)?;
    let pot = model_potentials(&params.inner);
    let rep = solve::nehari_minimize(&params.inner, &pot, &grid, &s.opts).map_err(to_py)?;
    let d = PyDict::new_bound(py);
    d.set_item("value", rep.value)?;
    d.set_item("level", rep.level)?;
    d.set_item("t_star", rep.t_star)?;
    d.set_item("iterations", rep.iterations)?;
    d.set_item("gradient_norm", rep.final_gradient_norm)?;
    d.set_item("history", rep.history.clone())?;
    put_field(&d, "u", &rep.critical_point())?;
    Ok(d)
}

/// Mountain-pass level of the transformed model problem by the string method.
#[pyfunction]
#[pyo3(signature = (params, settings = None))]
fn mountain_pass<'py>(
    py: Python<'py>,
    params: &PyParams,
    settings: Option<PySettings>,
) -> PyResult<Bound<'py, PyDict>> {
    let s = self::settings(settings);
    let grid = s.radial(params.inner.dim)?;
    let pot = model_potentials(&params.inner);
    let rep = solve::mountain_pass_path(&params.inner, &pot, &grid, &s.opts).map_err(to_py)?;
    let d = PyDict::new_bound(py);
    d.set_item("level", rep.level)?;
    d.set_item("iterations", rep.iterations)?;
    d.set_item("gradient_norm", rep.final_gradient_norm)?;
    d.set_item("max_index", rep.max_index)?;
    d.set_item("path_energies", rep.path_energies.clone())?;
    put_field(&d, "u", &rep.saddle)?;
    Ok(d)
}

/// Existence threshold report with the annulus sweep.
#[pyfunction]
#[pyo3(signature = (params, settings = None))]
fn threshold<'py>(
    py: Python<'py>,
    params: &PyParams,
    settings: Option<PySettings>,
) -> PyResult<Bound<'py, PyDict>> {
    let s = self::settings(settings);
    let grid = s.radial(params.inner.dim)?;
    let pot = model_potentials(&params.inner);
    let rep = solve::threshold_check(&params.inner, &pot, &grid, &s.opts).map_err(to_py)?;
    let d = PyDict::new_bound(py);
    d.set_item("lhs", rep.lhs)?;
    d.set_item("S_p", rep.s_p)?;
    d.set_item("S", rep.s)?;
    d.set_item("rhs", rep.rhs)?;
    d.set_item("ps_threshold", rep.ps_threshold)?;
    d.set_item("mp_level", rep.mp_level)?;
    d.set_item("quotient_condition_holds", rep.quotient_condition_holds)?;
    d.set_item("level_below_threshold", rep.level_below_threshold)?;
    d.set_item("degraded", rep.degraded)?;
    d.set_item("nehari_value", rep.nehari_value)?;
    let sweep = PyList::empty_bound(py);
    for t in &rep.annulus {
        let row = PyDict::new_bound(py);
        row.set_item("r", t.r)?;
        row.set_item("quotient_a", t.quotient_a)?;
        row.set_item("dirichlet_quotient", t.dirichlet_quotient)?;
        sweep.append(row)?;
    }
    d.set_item("annulus", sweep)?;
    Ok(d)
}

/// Full audit suite as a list of record dicts.
#[pyfunction]
#[pyo3(signature = (params, settings = None))]
fn run_suite<'py>(
    py: Python<'py>,
    params: &PyParams,
    settings: Option<PySettings>,
) -> PyResult<Bound<'py, PyList>> {
    let s = self::settings(settings);
    let pot = model_potentials(&params.inner);
    let records = verify::run_suite(&params.inner, &pot, &s.grid, &s.opts).map_err(to_py)?;
    let out = PyList::empty_bound(py);
    for r in &records {
        out.append(record_dict(py, r)?)?;
    }
    Ok(out)
}

/// Change-of-variables audits as a list of record dicts.
#[pyfunction]
fn transform_checks<'py>(py: Python<'py>, params: &PyParams) -> PyResult<Bound<'py, PyList>> {
    let records = verify::transform_checks(&params.inner).map_err(to_py)?;
    let out = PyList::empty_bound(py);
    for r in &records {
        out.append(record_dict(py, r)?)?;
    }
    Ok(out)
}

/// `J` of a radial profile sampled on the grid described by `settings`.
#[pyfunction]
#[pyo3(signature = (params, values, settings = None))]
fn energy(params: &PyParams, values: Vec<f64>, settings: Option<PySettings>) -> PyResult<f64> {
    let s = self::settings(settings);
    let grid = s.radial(params.inner.dim)?;
    if values.len() != grid.len() {
        return Err(PyValueError::new_err(format!(
            "expected {} values, got {}",
            grid.len(),
            values.len()
        )));
    }
    let pot = model_potentials(&params.inner);
    let form = RadialForm::transformed(&params.inner, &pot, &grid).map_err(to_py)?;
    let field = RadialField::new(grid, values).map_err(to_py)?;
    Ok(form.energy(&field.vals))
}

/// `y = |x|^{-b/2} x`.
#[pyfunction]
fn forward_map(b: f64, x: Vec<f64>) -> PyResult<Vec<f64>> {
    let spec = TransformSpec::new(b, x.len()).map_err(to_py)?;
    geometry::forward_map(&spec, &x).map_err(to_py)
}

/// Inverse of [`forward_map`].
#[pyfunction]
fn inverse_map(b: f64, y: Vec<f64>) -> PyResult<Vec<f64>> {
    let spec = TransformSpec::new(b, y.len()).map_err(to_py)?;
    geometry::inverse_map(&spec, &y).map_err(to_py)
}

/// Runs the command-line front end with `args` (without the program name).
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    critnls::cli::run(std::iter::once("critnls".to_string()).chain(args))
}

#[pymodule]
#[pyo3(name = "critnls")]
fn critnls_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PySettings>()?;
    m.add_function(wrap_pyfunction!(ground_state_sp, m)?)?;
    m.add_function(wrap_pyfunction!(nehari_minimize, m)?)?;
    m.add_function(wrap_pyfunction!(mountain_pass, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(transform_checks, m)?)?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(forward_map, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_map, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
