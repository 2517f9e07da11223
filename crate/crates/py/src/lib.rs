//! Python bindings: instances, LPT, the exact solver, ρ_m, the tight family,
//! worst-case search and minimality certification.
//!
//! Reports are returned as plain dicts built from the same JSON the CLI
//! prints, so field names match `uniform-lpt --format json`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use uniform_lpt::analysis::{self, CharacteristicPolynomial, DEFAULT_ROOT_TOL};
use uniform_lpt::exact::{self, DEFAULT_NODE_BUDGET};
use uniform_lpt::{certify as cert, json, model, verify, worstcase, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::BudgetExhausted { .. } | Error::EnumerationCap { .. } | Error::MappingCap { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_dict<'py, T: Serialize + ?Sized>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (json::to_string(value),))
}

/// Uniform processors with speeds and tasks with sizes, both non-increasing.
#[pyclass(module = "uniform_lpt", frozen, from_py_object)]
#[derive(Clone)]
pub struct Instance {
    inner: model::Instance,
}

#[pymethods]
impl Instance {
    /// Builds an instance; unsorted input is sorted when `sort` is true.
    #[new]
    #[pyo3(signature = (speeds, tasks, name=None, sort=false))]
    fn new(speeds: Vec<f64>, tasks: Vec<f64>, name: Option<String>, sort: bool) -> PyResult<Self> {
        let inner = if sort {
            model::Instance::sorted(speeds, tasks)
        } else {
            model::Instance::new(speeds, tasks)
        }
        .map_err(to_py)?;
        Ok(Instance {
            inner: match name {
                Some(n) => inner.with_name(n),
                None => inner,
            },
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Instance {
            inner: model::parse_instance(text).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        model::serialize_instance(&self.inner)
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn speeds(&self) -> Vec<f64> {
        self.inner.speeds().to_vec()
    }

    #[getter]
    fn tasks(&self) -> Vec<f64> {
        self.inner.sizes().to_vec()
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.inner.name().map(str::to_owned)
    }

    /// Copy with every size divided by the smallest one.
    fn normalize_sizes(&self) -> PyResult<Self> {
        Ok(Instance {
            inner: model::normalize_sizes(&self.inner).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Instance({})", self.to_json())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// A complete assignment of tasks (0-based) to processors (0-based).
#[pyclass(module = "uniform_lpt", frozen, get_all)]
pub struct Schedule {
    assignment: Vec<usize>,
    loads: Vec<f64>,
    finish_times: Vec<f64>,
    makespan: f64,
    /// Search nodes for exact schedules, `None` for LPT.
    nodes_explored: Option<u64>,
}

impl Schedule {
    fn from_core(s: model::Schedule, nodes_explored: Option<u64>) -> Self {
        Schedule {
            assignment: s.assignment,
            loads: s.loads,
            finish_times: s.finish_times,
            makespan: s.makespan,
            nodes_explored,
        }
    }
}

#[pymethods]
impl Schedule {
    fn tasks_on(&self, p: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == p).collect()
    }

    fn __repr__(&self) -> String {
        format!("Schedule(makespan={}, assignment={:?})", self.makespan, self.assignment)
    }
}

#[pyfunction]
fn lpt(instance: &Instance) -> Schedule {
    Schedule::from_core(uniform_lpt::lpt::lpt_schedule(&instance.inner), None)
}

/// Optimal schedule by branch-and-bound; raises RuntimeError past the budget.
#[pyfunction]
#[pyo3(signature = (instance, node_budget=DEFAULT_NODE_BUDGET))]
fn opt(py: Python<'_>, instance: &Instance, node_budget: u64) -> PyResult<Schedule> {
    let inner = &instance.inner;
    let r = py.detach(|| exact::opt_bnb(inner, node_budget)).map_err(to_py)?;
    Ok(Schedule::from_core(r.schedule(inner), Some(r.nodes_explored)))
}

/// Optimal schedule by enumerating every assignment.
#[pyfunction]
fn opt_enumerate(py: Python<'_>, instance: &Instance) -> PyResult<Schedule> {
    let inner = &instance.inner;
    let r = py.detach(|| exact::opt_enumerate(inner)).map_err(to_py)?;
    Ok(Schedule::from_core(r.schedule(inner), Some(r.nodes_explored)))
}

#[pyfunction]
#[pyo3(signature = (instance, node_budget=DEFAULT_NODE_BUDGET))]
fn ratio<'py>(py: Python<'py>, instance: &Instance, node_budget: u64) -> PyResult<Bound<'py, PyAny>> {
    let inner = &instance.inner;
    let rep = py.detach(|| analysis::approx_ratio(inner, node_budget)).map_err(to_py)?;
    to_dict(py, &rep)
}

/// ρ_m, the unique positive root of `2x^m - x^(m-1) - ... - x - 2`.
#[pyfunction]
fn rho(m: usize) -> PyResult<f64> {
    analysis::rho(m).map_err(to_py)
}

/// Coefficients of `P_m`, lowest degree first.
#[pyfunction]
fn char_poly(m: usize) -> PyResult<Vec<f64>> {
    Ok(analysis::char_poly(m).map_err(to_py)?.coefficients().to_vec())
}

/// Largest positive root of the polynomial with the given coefficients
/// (lowest degree first).
#[pyfunction]
#[pyo3(signature = (coefficients, tol=DEFAULT_ROOT_TOL))]
fn max_positive_root(coefficients: Vec<f64>, tol: f64) -> PyResult<f64> {
    let p = CharacteristicPolynomial::new(coefficients).map_err(to_py)?;
    analysis::max_positive_root(&p, tol).map_err(to_py)
}

/// The instance with ratio exactly ρ_m, for m in 2..=8.
#[pyfunction]
fn gis_instance(m: usize) -> PyResult<Instance> {
    Ok(Instance {
        inner: worstcase::generate_gis_instance(m).map_err(to_py)?,
    })
}

#[pyfunction]
#[pyo3(signature = (instance, node_budget=DEFAULT_NODE_BUDGET))]
fn certify<'py>(py: Python<'py>, instance: &Instance, node_budget: u64) -> PyResult<Bound<'py, PyAny>> {
    let inner = &instance.inner;
    let rep = py.detach(|| cert::certify(inner, node_budget)).map_err(to_py)?;
    to_dict(py, &rep)
}

/// Hill-climbing search; `best_instance` in the result is an `Instance`.
#[pyfunction]
#[pyo3(signature = (m, n_max, restarts=100, steps=1000, seed=0, n_min=None, step_scale=0.25, node_budget=1_000_000))]
#[allow(clippy::too_many_arguments)]
fn search<'py>(
    py: Python<'py>,
    m: usize,
    n_max: usize,
    restarts: usize,
    steps: usize,
    seed: u64,
    n_min: Option<usize>,
    step_scale: f64,
    node_budget: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = worstcase::SearchConfig::new(m, n_max);
    if let Some(n) = n_min {
        cfg.n_min = n;
    }
    cfg.restarts = restarts;
    cfg.steps_per_restart = steps;
    cfg.seed = seed;
    cfg.step_scale = step_scale;
    cfg.solver_node_budget = node_budget;
    let res = py.detach(|| worstcase::search_worst(&cfg)).map_err(to_py)?;
    let out = to_dict(py, &res)?;
    out.set_item(
        "best_instance",
        Instance {
            inner: res.best_instance,
        },
    )?;
    Ok(out)
}

/// Largest ratio over `samples` random instances with the given shape.
#[pyfunction]
#[pyo3(signature = (m, n, samples, seed=0, node_budget=DEFAULT_NODE_BUDGET))]
fn ratio_ceiling<'py>(
    py: Python<'py>,
    m: usize,
    n: usize,
    samples: usize,
    seed: u64,
    node_budget: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = py
        .detach(|| worstcase::ratio_ceiling_check(m, n, samples, seed, node_budget))
        .map_err(to_py)?;
    to_dict(py, &rep)
}

/// Runs the acceptance checks ("quick" or "full") and returns one dict each.
#[pyfunction]
#[pyo3(signature = (level="quick"))]
fn run_checks<'py>(py: Python<'py>, level: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let level = match level {
        "quick" => verify::Level::Quick,
        "full" => verify::Level::Full,
        other => return Err(PyValueError::new_err(format!("unknown level {other:?}"))),
    };
    let outcomes = py.detach(|| verify::run(level, |_| {}));
    outcomes
        .iter()
        .map(|o| {
            let d = PyDict::new(py);
            d.set_item("id", o.id)?;
            d.set_item("name", o.name)?;
            d.set_item("passed", o.passed)?;
            d.set_item("detail", &o.detail)?;
            d.set_item("elapsed_ms", o.elapsed.as_secs_f64() * 1e3)?;
            Ok(d)
        })
        .collect()
}

#[pymodule(name = "uniform_lpt")]
fn python_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<Schedule>()?;
    m.add_function(wrap_pyfunction!(lpt, m)?)?;
    m.add_function(wrap_pyfunction!(opt, m)?)?;
    m.add_function(wrap_pyfunction!(opt_enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(ratio, m)?)?;
    m.add_function(wrap_pyfunction!(rho, m)?)?;
    m.add_function(wrap_pyfunction!(char_poly, m)?)?;
    m.add_function(wrap_pyfunction!(max_positive_root, m)?)?;
    m.add_function(wrap_pyfunction!(gis_instance, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_ceiling, m)?)?;
    m.add_function(wrap_pyfunction!(run_checks, m)?)?;
    Ok(())
}
