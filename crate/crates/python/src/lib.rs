//! Python module `exprk`: method catalog, order-condition checks, dense φ
//! functions, single integrations and convergence studies.

use exprk_core::matfun::{phi_stack, DenseMatrix};
use exprk_core::orderconds::{self, standard_probes, DEFAULT_SEED};
use exprk_core::problems::{problem_by_name, AnyProblem};
use exprk_core::schemes::{self, integrate as integrate_core, make_engine, EngineKind, EngineSettings, ExecutionMode};
use exprk_core::study::{self, ConvergenceReport, StudyConfig};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(exprk, ExprkError, PyException, "Runtime failure inside the toolkit.");

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    ExprkError::new_err(e.to_string())
}

/// An exponential Runge-Kutta method from the catalog.
#[pyclass(name = "Method", module = "exprk", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyMethod {
    inner: schemes::ExpRKMethod,
}

#[pymethods]
impl PyMethod {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        schemes::method_by_name(name).map(|inner| Self { inner }).map_err(value_err)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn stages(&self) -> usize {
        self.inner.stages()
    }

    /// Engine calls per step.
    #[getter]
    fn batches(&self) -> usize {
        self.inner.batch_count()
    }

    /// Nodes `c_1..c_s` as exact fractions, e.g. `"1/2"`.
    #[getter]
    fn nodes(&self) -> Vec<String> {
        self.inner.nodes().iter().map(|q| q.to_string()).collect()
    }

    #[getter]
    fn node_values(&self) -> Vec<f64> {
        self.inner.nodes().iter().map(|&q| schemes::to_f64(q)).collect()
    }

    /// Claimed form of conditions 1 to 16.
    #[getter]
    fn claims(&self) -> Vec<String> {
        self.inner.claims().iter().map(|c| c.to_string()).collect()
    }

    /// φ orders used by each batch.
    fn batch_orders(&self) -> Vec<Vec<usize>> {
        self.inner.plan().iter().map(|b| b.orders_used()).collect()
    }

    /// Copy with update weight `b_stage` multiplied by `num / den`.
    fn with_scaled_weight(&self, stage: usize, num: i64, den: i64) -> PyResult<Self> {
        if stage == 0 || stage > self.inner.stages() || den == 0 {
            return Err(PyValueError::new_err("invalid stage or zero denominator"));
        }
        let factor = schemes::Q::new(num as i128, den as i128);
        self.inner.with_scaled_entry((stage, 0), factor).map(|inner| Self { inner }).map_err(value_err)
    }

    fn describe(&self) -> String {
        self.inner.describe()
    }

    fn __repr__(&self) -> String {
        format!("Method('{}', order={}, stages={}, batches={})", self.inner.name(), self.inner.order(), self.inner.stages(), self.inner.batch_count())
    }
}

/// Result of checking the stiff order conditions of one method.
#[pyclass(name = "OrderReport", module = "exprk", frozen)]
pub struct PyOrderReport {
    inner: orderconds::OrderConditionReport,
}

#[pymethods]
impl PyOrderReport {
    /// True when every claim is met in exactly its claimed form.
    #[getter]
    fn passed(&self) -> bool {
        self.inner.passed()
    }

    #[getter]
    fn method(&self) -> String {
        self.inner.method.clone()
    }

    /// `(number, claimed, achieved, strong_residual, relaxed_residual)` per condition.
    #[getter]
    fn rows(&self) -> Vec<(usize, String, Option<String>, f64, f64)> {
        self.inner
            .results
            .iter()
            .map(|r| {
                (r.number, r.claimed.to_string(), r.achieved.map(|a| a.to_string()), r.strong_residual, r.relaxed_residual)
            })
            .collect()
    }

    #[getter]
    fn mismatches(&self) -> Vec<String> {
        self.inner.mismatches().iter().map(|m| m.to_string()).collect()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

/// Checks every claimed order condition of `method` on random probes.
#[pyfunction]
#[pyo3(signature = (method, probes = 5, dim = 6, seed = DEFAULT_SEED, tol = 1e-9))]
fn check_order_conditions(method: &PyMethod, probes: usize, dim: usize, seed: u64, tol: f64) -> PyResult<PyOrderReport> {
    if probes < 3 || dim == 0 {
        return Err(PyValueError::new_err("need at least 3 probes of positive dimension"));
    }
    let p = standard_probes(probes, dim, seed);
    orderconds::check_conditions(&method.inner, &p, tol).map(|inner| PyOrderReport { inner }).map_err(runtime_err)
}

#[pyfunction]
fn method_names() -> Vec<&'static str> {
    schemes::METHOD_NAMES.to_vec()
}

#[pyfunction]
fn problem_names() -> Vec<&'static str> {
    exprk_core::problems::PROBLEM_NAMES.to_vec()
}

/// `[φ_0(A), …, φ_order(A)]` of a real square matrix given as nested lists.
#[pyfunction]
fn phi(matrix: Vec<Vec<f64>>, order: usize) -> PyResult<Vec<Vec<Vec<f64>>>> {
    let a = DenseMatrix::from_rows(&matrix).map_err(value_err)?;
    let stack = phi_stack(&a, order).map_err(value_err)?;
    Ok((0..=order)
        .map(|k| {
            let m = stack.get(k);
            (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.as_array()[[i, j]]).collect()).collect()
        })
        .collect())
}

/// Least-squares order over the pre-floor segment of an error sequence.
#[pyfunction]
#[pyo3(signature = (steps, errors, tol = 1e-12))]
fn fit_order(steps: Vec<usize>, errors: Vec<f64>, tol: f64) -> PyResult<Option<f64>> {
    if steps.len() != errors.len() {
        return Err(PyValueError::new_err("steps and errors differ in length"));
    }
    Ok(study::fit_order(&steps, &errors, tol))
}

fn engine_kind(name: &str) -> PyResult<EngineKind> {
    Ok(match name {
        "auto" => EngineKind::Auto,
        "krylov" => EngineKind::Krylov,
        "dense" => EngineKind::Dense,
        "diagonal" => EngineKind::Diagonal,
        other => return Err(PyValueError::new_err(format!("unknown engine '{other}'"))),
    })
}

/// State after one fixed-step integration.
#[pyclass(name = "Integration", module = "exprk", frozen)]
pub struct PyIntegration {
    #[pyo3(get)]
    values: Py<PyAny>,
    #[pyo3(get)]
    steps: usize,
    #[pyo3(get)]
    engine_calls: usize,
    #[pyo3(get)]
    nonlinear_evals: usize,
}

/// Integrates a built-in problem from 0 to `t_final` with `steps` equal steps.
#[pyfunction]
#[pyo3(signature = (problem, size, method, steps, t_final, engine = "auto", tol = 1e-12))]
fn integrate(
    py: Python<'_>,
    problem: &str,
    size: usize,
    method: &PyMethod,
    steps: usize,
    t_final: f64,
    engine: &str,
    tol: f64,
) -> PyResult<PyIntegration> {
    let settings = EngineSettings { kind: engine_kind(engine)?, tolerance: tol, ..Default::default() };
    let p = problem_by_name(problem, size).map_err(value_err)?;
    macro_rules! run {
        ($s:expr) => {{
            let s = $s;
            let eng = make_engine(exprk_core::schemes::SemilinearProblem::linear(s), &settings).map_err(value_err)?;
            let m = &method.inner;
            py.detach(|| integrate_core(m, s, eng.as_ref(), s.initial(), 0.0, t_final, steps, ExecutionMode::Batched))
                .map_err(runtime_err)?
        }};
    }
    let (values, stats) = match &p {
        AnyProblem::Real(s) => {
            let r = run!(s);
            (r.u.into_pyobject(py)?.into_any().unbind(), r.stats)
        }
        AnyProblem::Complex(s) => {
            let r = run!(s);
            let u: Vec<Complex64> = r.u;
            (u.into_pyobject(py)?.into_any().unbind(), r.stats)
        }
    };
    Ok(PyIntegration { values, steps, engine_calls: stats.engine_calls, nonlinear_evals: stats.nonlinear_evals })
}

/// Convergence study results.
#[pyclass(name = "Study", module = "exprk", frozen)]
pub struct PyStudy {
    inner: ConvergenceReport,
}

#[pymethods]
impl PyStudy {
    /// `(method, N, error, seconds, engine_calls)` per run.
    #[getter]
    fn rows(&self) -> Vec<(String, usize, f64, f64, usize)> {
        self.inner.rows.iter().map(|r| (r.method.clone(), r.steps, r.error, r.seconds, r.engine_calls)).collect()
    }

    /// Fitted order per method; `None` when undefined.
    #[getter]
    fn orders(&self) -> Vec<(String, Option<f64>)> {
        self.inner.orders.iter().map(|o| (o.method.clone(), o.order)).collect()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.inner.warnings.clone()
    }

    fn order(&self, method: &str) -> Option<f64> {
        self.inner.order(method)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn summary(&self) -> String {
        self.inner.summary()
    }
}

/// Runs a convergence study from a preset name or TOML text, with overrides.
#[pyfunction]
#[pyo3(signature = (preset = None, config_toml = None, *, methods = None, steps = None, size = None, t_final = None, dense_oracle = None, tol = None))]
#[allow(clippy::too_many_arguments)]
fn run_study(
    py: Python<'_>,
    preset: Option<&str>,
    config_toml: Option<&str>,
    methods: Option<Vec<String>>,
    steps: Option<Vec<usize>>,
    size: Option<usize>,
    t_final: Option<f64>,
    dense_oracle: Option<bool>,
    tol: Option<f64>,
) -> PyResult<PyStudy> {
    let mut cfg = match (preset, config_toml) {
        (Some(p), None) => StudyConfig::by_preset(p).ok_or_else(|| PyValueError::new_err(format!("unknown preset '{p}'")))?,
        (None, Some(t)) => StudyConfig::from_toml(t).map_err(value_err)?,
        _ => return Err(PyValueError::new_err("give exactly one of preset or config_toml")),
    };
    if let Some(v) = methods {
        cfg.methods = v;
    }
    if let Some(v) = steps {
        cfg.steps = v;
    }
    if let Some(v) = size {
        cfg.size = v;
    }
    if let Some(v) = t_final {
        cfg.t_final = v;
    }
    if let Some(v) = dense_oracle {
        cfg.dense_oracle = v;
    }
    if let Some(v) = tol {
        cfg.tol = v;
    }
    cfg.validate().map_err(value_err)?;
    let report = py.detach(|| study::run_study(&cfg)).map_err(runtime_err)?;
    Ok(PyStudy { inner: report })
}

#[pymodule]
fn exprk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ExprkError", m.py().get_type::<ExprkError>())?;
    m.add("DEFAULT_SEED", DEFAULT_SEED)?;
    m.add_class::<PyMethod>()?;
    m.add_class::<PyOrderReport>()?;
    m.add_class::<PyIntegration>()?;
    m.add_class::<PyStudy>()?;
    m.add_function(wrap_pyfunction!(method_names, m)?)?;
    m.add_function(wrap_pyfunction!(problem_names, m)?)?;
    m.add_function(wrap_pyfunction!(check_order_conditions, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(fit_order, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(run_study, m)?)?;
    Ok(())
}
