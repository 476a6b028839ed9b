//! Python bindings.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use freedesc_core::engine::{self, Problem, SearchResult};
use freedesc_core::oracle::oracle_validity_with;
use freedesc_core::syntax::{parse, print};
use freedesc_core::Logic;

fn logic_of(name: &str) -> PyResult<Logic> {
    name.parse().map_err(PyValueError::new_err)
}

fn to_py(py: Python<'_>, v: serde_json::Value) -> PyResult<Py<PyAny>> {
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (v.to_string(),))?.unbind())
}

fn run(
    py: Python<'_>,
    formula: &str,
    logic: &str,
    budget: usize,
    nonempty: bool,
    satisfy: bool,
) -> PyResult<Py<PyAny>> {
    let logic = logic_of(logic)?;
    let goal = parse(formula, logic.language()).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let base = if satisfy { Problem::satisfy(logic, goal) } else { Problem::prove(logic, goal) };
    let problem = base.with_budget(budget).with_nonempty(nonempty);
    let result = py.detach(|| engine::prove(&problem)).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let stats = result.stats();
    let mut out = serde_json::json!({
        "verdict": result.verdict(),
        "steps": stats.steps,
        "branches": stats.branches,
    });
    match &result {
        SearchResult::Refuted(r) => out["model"] = r.model.to_json(),
        SearchResult::Proved(p) => out["tree"] = p.tree.to_json(),
        SearchResult::Unknown(_) => {}
    }
    to_py(py, out)
}

/// Search for a proof. Returns a dict with `verdict` of proved, refuted or unknown.
#[pyfunction]
#[pyo3(signature = (formula, logic = "pqfl", budget = 50_000, nonempty = false))]
fn prove(py: Python<'_>, formula: &str, logic: &str, budget: usize, nonempty: bool) -> PyResult<Py<PyAny>> {
    run(py, formula, logic, budget, nonempty, false)
}

/// Search for a model; `refuted` means an open saturated branch was found.
#[pyfunction]
#[pyo3(signature = (formula, logic = "pqfl", budget = 50_000, nonempty = false))]
fn sat(py: Python<'_>, formula: &str, logic: &str, budget: usize, nonempty: bool) -> PyResult<Py<PyAny>> {
    run(py, formula, logic, budget, nonempty, true)
}

#[pyfunction]
#[pyo3(signature = (formula, logic = "pqfl", bound = 3, nonempty = false))]
fn oracle(py: Python<'_>, formula: &str, logic: &str, bound: usize, nonempty: bool) -> PyResult<Py<PyAny>> {
    let logic = logic_of(logic)?;
    let f = parse(formula, logic.language()).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let verdict = py
        .detach(|| oracle_validity_with(&f, logic, bound, nonempty))
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, verdict.to_json())
}

/// Parse and pretty-print a formula.
#[pyfunction]
#[pyo3(signature = (formula, logic = "pqfl"))]
fn normalize(formula: &str, logic: &str) -> PyResult<String> {
    let logic = logic_of(logic)?;
    let f = parse(formula, logic.language()).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(print(&f))
}

#[pymodule]
fn freedesc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(prove, m)?)?;
    m.add_function(wrap_pyfunction!(sat, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    Ok(())
}
