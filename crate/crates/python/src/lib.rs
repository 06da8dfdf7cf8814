//! Python bindings. Reports cross the boundary either as small wrapper
//! objects or as the same JSON the CLI emits.

use num_bigint::BigUint;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ultrawelch_core::scalar::{self, Prime};
use ultrawelch_core::search::{self, Gamma, SearchOptions, SearchSpace};
use ultrawelch_core::welch::{self, check_unital};
use ultrawelch_core::{linalg, symtensor, Backend, BoundReport, FrameConfig, Scalar, Valuation, Variant};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn backend(prime: Option<u64>) -> PyResult<Backend> {
    match prime {
        Some(p) => Backend::padic(p).map_err(err),
        None => Ok(Backend::Laurent),
    }
}

fn parse_rows(rows: Vec<Vec<String>>) -> PyResult<Vec<Vec<Scalar>>> {
    rows.into_iter()
        .map(|row| row.iter().map(|s| s.parse::<Scalar>().map_err(err)).collect())
        .collect()
}

fn to_text(m: &linalg::Matrix) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| r.iter().map(Scalar::to_string).collect()).collect()
}

fn finite(v: Valuation) -> Option<i64> {
    v.finite()
}

/// Vectors τ_j and functionals f_j over Q_p (when `prime` is given) or Q((t)).
#[pyclass(name = "FrameConfig", module = "ultrawelch", frozen)]
pub struct PyFrameConfig {
    inner: FrameConfig,
}

#[pymethods]
impl PyFrameConfig {
    #[new]
    #[pyo3(signature = (vectors, functionals, prime=None))]
    fn new(vectors: Vec<Vec<String>>, functionals: Vec<Vec<String>>, prime: Option<u64>) -> PyResult<Self> {
        let inner = FrameConfig::new(backend(prime)?, parse_rows(vectors)?, parse_rows(functionals)?).map_err(err)?;
        Ok(PyFrameConfig { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(|inner| PyFrameConfig { inner }).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (d, prime=None))]
    fn standard_basis(d: usize, prime: Option<u64>) -> PyResult<Self> {
        Ok(PyFrameConfig { inner: FrameConfig::standard_basis(backend(prime)?, d) })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serializable")
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// `f_j(τ_k)` as exact text.
    fn gram(&self) -> Vec<Vec<String>> {
        to_text(&linalg::gram(&self.inner))
    }

    /// The frame operator on `Sym^m`, in descending-lex monomial order.
    #[pyo3(signature = (m=1))]
    fn frame_operator(&self, m: u32) -> PyResult<Vec<Vec<String>>> {
        let op = symtensor::sym_frame_operator(&self.inner, m).map_err(err)?;
        Ok(to_text(&op.matrix))
    }

    /// `variant` is "padic" or "nonarch"; defaults to the backend's own.
    #[pyo3(signature = (m=1, variant=None, unital=false))]
    fn check_bound(&self, m: u32, variant: Option<&str>, unital: bool) -> PyResult<PyBoundReport> {
        let variant = match variant {
            Some(v) => v.parse::<Variant>().map_err(err)?,
            None => Variant::for_backend(&self.inner.backend()),
        };
        let inner = if unital {
            check_unital(&self.inner, m, variant)
        } else {
            ultrawelch_core::check_bound(&self.inner, m, variant)
        }
        .map_err(err)?;
        Ok(PyBoundReport { inner })
    }

    fn __repr__(&self) -> String {
        format!("FrameConfig(d={}, n={}, backend={:?})", self.inner.d(), self.inner.n(), self.inner.backend())
    }
}

#[pyclass(name = "BoundReport", module = "ultrawelch", frozen)]
pub struct PyBoundReport {
    inner: BoundReport,
}

#[pymethods]
impl PyBoundReport {
    #[getter]
    fn verdict(&self) -> String {
        self.inner.verdict.to_string()
    }

    #[getter]
    fn hypothesis_satisfied(&self) -> bool {
        self.inner.hypothesis.satisfied
    }

    /// Valuation of the left side; `None` when it is zero.
    #[getter]
    fn lhs_valuation(&self) -> Option<i64> {
        finite(self.inner.lhs.valuation())
    }

    #[getter]
    fn rhs_valuation(&self) -> Option<i64> {
        finite(self.inner.rhs.valuation())
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.m
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serializable")
    }

    fn __repr__(&self) -> String {
        format!("BoundReport(m={}, verdict={})", self.inner.m, self.inner.verdict)
    }
}

#[pyfunction]
fn sym_dim(d: usize, m: u32) -> BigUint {
    symtensor::sym_dim(d, m)
}

#[pyfunction]
fn binomial_valuation(n: u64, k: u64, p: u64) -> PyResult<u64> {
    scalar::binomial_valuation(n, k, Prime::new(p).map_err(err)?).map_err(err)
}

/// Valuation of `x` (rational text) at `p`, or `None` for zero.
#[pyfunction]
fn valuation(x: &str, p: u64) -> PyResult<Option<i64>> {
    let v = Backend::padic(p).map_err(err)?.valuation(&x.parse::<Scalar>().map_err(err)?).map_err(err)?;
    Ok(finite(v))
}

/// Whether `|Σ λ²| = max |λ|²` holds for the given values.
#[pyfunction]
#[pyo3(signature = (lambdas, prime=None))]
fn check_field_condition(lambdas: Vec<String>, prime: Option<u64>) -> PyResult<bool> {
    let values: Vec<Scalar> = lambdas.iter().map(|s| s.parse().map_err(err)).collect::<PyResult<_>>()?;
    Ok(scalar::check_field_condition(&values, &backend(prime)?).map_err(err)?.holds)
}

#[pyfunction]
fn find_field_condition_counterexample(p: u64, search_bound: u64) -> PyResult<Option<Vec<u64>>> {
    scalar::find_field_condition_counterexample(&Backend::padic(p).map_err(err)?, search_bound).map_err(err)
}

#[pyfunction]
fn demo_suite_json() -> String {
    serde_json::to_string(&welch::demo_suite()).expect("serializable")
}

fn options(budget: Option<u64>, seed: Option<u64>, workers: usize) -> SearchOptions {
    SearchOptions { budget, seed, workers: workers.max(1) }
}

/// Runs an equality search over a JSON `SearchSpace`; returns the result as JSON.
#[pyfunction]
#[pyo3(signature = (space_json, m=1, budget=None, seed=None, workers=1))]
fn search_equality(space_json: &str, m: u32, budget: Option<u64>, seed: Option<u64>, workers: usize) -> PyResult<String> {
    let space: SearchSpace = serde_json::from_str(space_json).map_err(err)?;
    let r = search::search_equality(&space, m, &options(budget, seed, workers)).map_err(err)?;
    Ok(serde_json::to_string(&r).expect("serializable"))
}

#[pyfunction]
#[pyo3(signature = (p, d, k=1, budget=None, seed=None, workers=1))]
fn search_zauner(p: u64, d: usize, k: u32, budget: Option<u64>, seed: Option<u64>, workers: usize) -> PyResult<String> {
    let r = search::search_zauner(Prime::new(p).map_err(err)?, d, k, &options(budget, seed, workers)).map_err(err)?;
    Ok(serde_json::to_string(&r).expect("serializable"))
}

/// `gamma` is "any", "common", an integer valuation, or "<V".
#[pyfunction]
#[pyo3(signature = (p, d, n_max, a="1", gamma="any", k=1, budget=None, seed=None, workers=1))]
#[allow(clippy::too_many_arguments)]
fn search_equiangular(
    p: u64,
    d: usize,
    n_max: usize,
    a: &str,
    gamma: &str,
    k: u32,
    budget: Option<u64>,
    seed: Option<u64>,
    workers: usize,
) -> PyResult<String> {
    let gamma: Gamma = gamma.parse().map_err(err)?;
    let a = scalar::parse_rational(a).map_err(err)?;
    let r = search::search_equiangular_params(
        Prime::new(p).map_err(err)?,
        d,
        a,
        gamma,
        n_max,
        k,
        &options(budget, seed, workers),
    )
    .map_err(err)?;
    Ok(serde_json::to_string(&r).expect("serializable"))
}

#[pymodule]
mod ultrawelch {
    #[pymodule_export]
    use super::{
        binomial_valuation, check_field_condition, demo_suite_json, find_field_condition_counterexample,
        search_equality, search_equiangular, search_zauner, sym_dim, valuation, PyBoundReport, PyFrameConfig,
    };
}
