//! Python bindings for `pairwise-topk`.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use pairwise_topk::harness::{self, ExperimentConfig};
use pairwise_topk::ingest::{self, MissingPolicy, NormalizedInstance};
use pairwise_topk::{bounds, oracle, seed, selection, verify, ComparisonOracle};

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serializes through JSON into plain Python objects.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_missing(missing: &str) -> PyResult<MissingPolicy> {
    missing.parse().map_err(value_err)
}

/// Pairwise preference matrix `p[i][j]`.
#[pyclass(frozen, module = "pairwise_topk_py")]
struct PreferenceInstance {
    inner: Arc<pairwise_topk::PreferenceInstance>,
}

impl PreferenceInstance {
    fn wrap(inner: pairwise_topk::PreferenceInstance) -> Self {
        PreferenceInstance { inner: Arc::new(inner) }
    }
}

#[pymethods]
impl PreferenceInstance {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        pairwise_topk::PreferenceInstance::from_rows(rows).map(Self::wrap).map_err(value_err)
    }

    #[staticmethod]
    fn equal_gap(n: usize, p_win: f64) -> PyResult<Self> {
        oracle::equal_gap_instance(n, p_win).map(Self::wrap).map_err(value_err)
    }

    #[staticmethod]
    #[pyo3(signature = (n, lo, hi, seed=0, enforce=false))]
    fn uniform_gap(n: usize, lo: f64, hi: f64, seed: u64, enforce: bool) -> PyResult<Self> {
        let mut rng = seed::rng_from(seed::derive(seed, seed::STREAM_INSTANCE));
        oracle::uniform_gap_instance(n, lo, hi, enforce, &mut rng).map(Self::wrap).map_err(value_err)
    }

    #[staticmethod]
    fn mnl(scores: Vec<f64>) -> PyResult<Self> {
        oracle::mnl_instance(&scores).map(Self::wrap).map_err(value_err)
    }

    #[staticmethod]
    #[pyo3(signature = (scores, sigma=1.0))]
    fn thurstone(scores: Vec<f64>, sigma: f64) -> PyResult<Self> {
        oracle::thurstone_instance(&scores, sigma).map(Self::wrap).map_err(value_err)
    }

    /// Empirical instance from the text of a `.pwg` file.
    #[staticmethod]
    #[pyo3(signature = (text, missing="error"))]
    fn from_pwg(text: &str, missing: &str) -> PyResult<Self> {
        let doc = ingest::parse_pwg(text).map_err(value_err)?;
        ingest::to_preference_instance(&doc, parse_missing(missing)?).map(Self::wrap).map_err(value_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self::wrap).map_err(value_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&*self.inner).map_err(value_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn prob(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.n();
        if i >= n || j >= n {
            return Err(value_err(format!("item out of range for n = {n}")));
        }
        Ok(self.inner.prob(i, j))
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows()
    }

    fn is_strict(&self) -> bool {
        self.inner.is_strict()
    }

    fn flipped(&self) -> Self {
        Self::wrap(self.inner.flipped())
    }

    fn true_best_k(&self, k: usize) -> PyResult<Vec<usize>> {
        pairwise_topk::true_best_k(&self.inner, k).map_err(value_err)
    }

    fn ranking(&self) -> PyResult<Vec<usize>> {
        pairwise_topk::ranking_of(&self.inner).map(|r| r.order().to_vec()).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!("PreferenceInstance(n={})", self.inner.n())
    }
}

/// Samples comparison outcomes from a preference matrix and counts them.
#[pyclass(module = "pairwise_topk_py")]
struct MatrixOracle {
    inner: oracle::MatrixOracle,
}

#[pymethods]
impl MatrixOracle {
    #[new]
    #[pyo3(signature = (instance, seed=0))]
    fn new(instance: &PreferenceInstance, seed: u64) -> Self {
        MatrixOracle { inner: oracle::MatrixOracle::new(instance.inner.clone(), seed) }
    }

    /// Returns the winner of one noisy comparison.
    fn compare(&mut self, i: usize, j: usize) -> PyResult<usize> {
        self.inner.compare(i, j).map_err(value_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn comparisons(&self) -> u64 {
        self.inner.comparisons()
    }
}

#[pyclass(frozen, get_all, module = "pairwise_topk_py")]
struct SelectionResult {
    selected: Vec<usize>,
    comparisons: u64,
    rounds: usize,
    flagged: bool,
}

#[pymethods]
impl SelectionResult {
    fn __repr__(&self) -> String {
        format!(
            "SelectionResult(selected={:?}, comparisons={}, rounds={}, flagged={})",
            self.selected, self.comparisons, self.rounds, self.flagged
        )
    }
}

impl From<pairwise_topk::SelectionResult> for SelectionResult {
    fn from(r: pairwise_topk::SelectionResult) -> Self {
        SelectionResult { selected: r.selected, comparisons: r.comparisons, rounds: r.rounds, flagged: r.flagged }
    }
}

fn items_or_all(oracle: &MatrixOracle, items: Option<Vec<usize>>) -> Vec<usize> {
    items.unwrap_or_else(|| (0..oracle.inner.n()).collect())
}

/// (ε, k)-optimal subset by quickselect.
#[pyfunction]
#[pyo3(signature = (oracle, k, epsilon, delta, seed=0, items=None))]
fn epsilon_quick_select(
    oracle: &mut MatrixOracle,
    k: usize,
    epsilon: f64,
    delta: f64,
    seed: u64,
    items: Option<Vec<usize>>,
) -> PyResult<SelectionResult> {
    let items = items_or_all(oracle, items);
    selection::epsilon_quick_select(&mut oracle.inner, &items, k, epsilon, delta, &mut seed::rng_from(seed))
        .map(Into::into)
        .map_err(value_err)
}

/// (ε, k)-optimal subset by tournament.
#[pyfunction]
#[pyo3(signature = (oracle, k, epsilon, delta, seed=0, items=None))]
fn tournament_k_select(
    oracle: &mut MatrixOracle,
    k: usize,
    epsilon: f64,
    delta: f64,
    seed: u64,
    items: Option<Vec<usize>>,
) -> PyResult<SelectionResult> {
    let items = items_or_all(oracle, items);
    selection::tournament_k_select(&mut oracle.inner, &items, k, epsilon, delta, &mut seed::rng_from(seed))
        .map(Into::into)
        .map_err(value_err)
}

/// (ε, k)-optimal set of worst items.
#[pyfunction]
#[pyo3(signature = (oracle, k, epsilon, delta, seed=0, items=None))]
fn tournament_worst_select(
    oracle: &mut MatrixOracle,
    k: usize,
    epsilon: f64,
    delta: f64,
    seed: u64,
    items: Option<Vec<usize>>,
) -> PyResult<SelectionResult> {
    let items = items_or_all(oracle, items);
    selection::tournament_worst_select(&mut oracle.inner, &items, k, epsilon, delta, &mut seed::rng_from(seed))
        .map(Into::into)
        .map_err(value_err)
}

/// Exact best item.
#[pyfunction]
#[pyo3(signature = (oracle, delta, seed=0, items=None))]
fn seebs(oracle: &mut MatrixOracle, delta: f64, seed: u64, items: Option<Vec<usize>>) -> PyResult<SelectionResult> {
    let items = items_or_all(oracle, items);
    selection::seebs(&mut oracle.inner, &items, delta, &mut seed::rng_from(seed)).map(Into::into).map_err(value_err)
}

/// Exact best-k set; `selector` is `"tks"` or `"eqs"`.
#[pyfunction]
#[pyo3(signature = (oracle, k, delta, seed=0, items=None, selector="tks"))]
fn seeks(
    oracle: &mut MatrixOracle,
    k: usize,
    delta: f64,
    seed: u64,
    items: Option<Vec<usize>>,
    selector: &str,
) -> PyResult<SelectionResult> {
    let selector = match selector {
        "tks" => selection::PacSelector::Tks,
        "eqs" => selection::PacSelector::Eqs,
        other => return Err(value_err(format!("unknown selector {other:?}"))),
    };
    let items = items_or_all(oracle, items);
    selection::seeks(&mut oracle.inner, &items, k, delta, &mut seed::rng_from(seed), selector)
        .map(Into::into)
        .map_err(value_err)
}

#[pyfunction]
fn is_eps_k_optimal<'py>(
    py: Python<'py>,
    instance: &PreferenceInstance,
    subset: Vec<usize>,
    epsilon: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &verify::is_eps_k_optimal(&instance.inner, &subset, epsilon).map_err(value_err)?)
}

#[pyfunction]
fn is_exact_best_k<'py>(
    py: Python<'py>,
    instance: &PreferenceInstance,
    subset: Vec<usize>,
    k: usize,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &verify::is_exact_best_k(&instance.inner, &subset, k).map_err(value_err)?)
}

#[pyfunction]
fn validate_sst<'py>(py: Python<'py>, instance: &PreferenceInstance) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &verify::validate_sst(&instance.inner))
}

#[pyfunction]
fn validate_sti<'py>(py: Python<'py>, instance: &PreferenceInstance) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &verify::validate_sti(&instance.inner))
}

#[pyfunction]
fn validate_gamma<'py>(py: Python<'py>, instance: &PreferenceInstance, gamma: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &verify::validate_gamma(&instance.inner, gamma).map_err(value_err)?)
}

/// `n ε^{-2} ln(k/δ)`.
#[pyfunction]
fn pac_lower_bound(n: usize, k: usize, epsilon: f64, delta: f64) -> f64 {
    bounds::pac_lower_bound(&bounds::BoundQuery { n, k, epsilon, delta, gaps: None })
}

/// Rows `(n, lower, upper_k1, upper_kgt1)` with every gap equal to `gap`.
#[pyfunction]
fn growth_table(gap: f64, delta: f64, k: usize, n_grid: Vec<usize>) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    let rows = bounds::growth_table(gap, delta, k, &n_grid).map_err(value_err)?;
    Ok(rows.into_iter().map(|r| (r.n, r.lower, r.upper_k1, r.upper_kgt1)).collect())
}

/// Normalized `{n, labels, p}` form of `.pwg` text.
#[pyfunction]
#[pyo3(signature = (text, missing="error"))]
fn parse_pwg<'py>(py: Python<'py>, text: &str, missing: &str) -> PyResult<Bound<'py, PyAny>> {
    let doc = ingest::parse_pwg(text).map_err(value_err)?;
    let inst = ingest::to_preference_instance(&doc, parse_missing(missing)?).map_err(value_err)?;
    to_py(py, &NormalizedInstance::new(&doc, &inst))
}

/// Runs a JSON experiment config and returns the CSV report.
#[pyfunction]
#[pyo3(signature = (config_json, threads=None))]
fn run_experiment(py: Python<'_>, config_json: &str, threads: Option<usize>) -> PyResult<String> {
    let cfg: ExperimentConfig = serde_json::from_str(config_json).map_err(value_err)?;
    let report = py.detach(|| harness::run_experiment_with_threads(&cfg, threads)).map_err(value_err)?;
    Ok(report.to_csv())
}

#[pymodule]
fn pairwise_topk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PreferenceInstance>()?;
    m.add_class::<MatrixOracle>()?;
    m.add_class::<SelectionResult>()?;
    m.add_function(wrap_pyfunction!(epsilon_quick_select, m)?)?;
    m.add_function(wrap_pyfunction!(tournament_k_select, m)?)?;
    m.add_function(wrap_pyfunction!(tournament_worst_select, m)?)?;
    m.add_function(wrap_pyfunction!(seebs, m)?)?;
    m.add_function(wrap_pyfunction!(seeks, m)?)?;
    m.add_function(wrap_pyfunction!(is_eps_k_optimal, m)?)?;
    m.add_function(wrap_pyfunction!(is_exact_best_k, m)?)?;
    m.add_function(wrap_pyfunction!(validate_sst, m)?)?;
    m.add_function(wrap_pyfunction!(validate_sti, m)?)?;
    m.add_function(wrap_pyfunction!(validate_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(pac_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(growth_table, m)?)?;
    m.add_function(wrap_pyfunction!(parse_pwg, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
