//! Python bindings: the `portopt_py` extension module.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use portopt::search::{discrete_optimum, ApproxHeuristic, SolverConfig};
use portopt::{convex, io, Portfolio};

/// A validated problem instance.
#[pyclass(name = "Instance")]
struct PyInstance {
    inner: portopt::Instance,
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyObject {
    match v {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_py(py),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_py(py)
            }
        }
        serde_json::Value::String(s) => s.into_py(py),
        serde_json::Value::Array(items) => {
            let list = PyList::new_bound(py, items.iter().map(|x| json_to_py(py, x)));
            list.into_py(py)
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new_bound(py);
            for (k, x) in map {
                dict.set_item(k, json_to_py(py, x)).expect("set dict item");
            }
            dict.into_py(py)
        }
    }
}

#[pymethods]
impl PyInstance {
    /// Instance(prices, returns, omega, budget, risk, labels=None)
    #[new]
    #[pyo3(signature = (prices, returns, omega, budget, risk, labels=None))]
    fn new(
        prices: Vec<i64>,
        returns: Vec<i64>,
        omega: Vec<Vec<f64>>,
        budget: i64,
        risk: f64,
        labels: Option<Vec<String>>,
    ) -> PyResult<Self> {
        let n = omega.len();
        if omega.iter().any(|row| row.len() != n) {
            return Err(PyValueError::new_err("omega must be a square matrix"));
        }
        let omega = nalgebra_matrix(&omega);
        let inner = portopt::Instance {
            a: prices,
            mu: returns,
            omega,
            budget,
            r0_sq: risk,
            labels,
        }
        .validate()
        .map_err(value_err)?;
        Ok(PyInstance { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn budget(&self) -> i64 {
        self.inner.budget
    }

    /// Expected return of an integer portfolio.
    fn return_value(&self, x: Vec<i64>) -> PyResult<i64> {
        self.inner.return_value(&Portfolio(x)).map_err(value_err)
    }

    /// Risk Q(x) of an integer portfolio (absolute units).
    fn risk_value(&self, x: Vec<i64>) -> f64 {
        self.inner.quadratic_form().risk_value(&Portfolio(x))
    }

    /// Full-problem feasibility of an integer portfolio.
    fn is_feasible(&self, x: Vec<i64>) -> PyResult<bool> {
        let q = self.inner.quadratic_form();
        self.inner.is_feasible(&q, &Portfolio(x)).map_err(value_err)
    }

    /// Runs the solver; returns the report as a dict (plus trace lines under
    /// "trace" when trace=True).
    #[pyo3(signature = (max_cuts=4, max_nodes=10_000, tol=1e-4, prec=3, alpha=0.5, seed=0, heuristic="repair", trace=false))]
    #[allow(clippy::too_many_arguments)]
    fn solve(
        &self,
        py: Python<'_>,
        max_cuts: usize,
        max_nodes: usize,
        tol: f64,
        prec: u32,
        alpha: f64,
        seed: u64,
        heuristic: &str,
        trace: bool,
    ) -> PyResult<PyObject> {
        let heuristic = match heuristic {
            "repair" => ApproxHeuristic::Repair,
            "concentrate" => ApproxHeuristic::Concentrate,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown heuristic '{other}' (expected 'repair' or 'concentrate')"
                )))
            }
        };
        let cfg = SolverConfig {
            max_cuts,
            max_nodes,
            tol,
            prec,
            alpha,
            seed,
            heuristic,
            trace,
            ..SolverConfig::default()
        };
        let outcome = discrete_optimum(&self.inner, &cfg)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        let mut value = serde_json::to_value(&outcome.report).map_err(value_err)?;
        if trace {
            value["trace"] = serde_json::Value::Array(
                outcome.trace.into_iter().map(serde_json::Value::String).collect(),
            );
        }
        Ok(json_to_py(py, &value))
    }

    /// Border risk: the threshold r_b^2 below which the optimal investment
    /// leaves part of the budget uninvested.
    fn border_risk(&self, py: Python<'_>) -> PyResult<PyObject> {
        let border = convex::border_risk(&self.inner)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        let dict = PyDict::new_bound(py);
        dict.set_item("r_b_sq", border.r_b_sq)?;
        dict.set_item("indices", border.indices)?;
        dict.set_item("warning", border.warning)?;
        Ok(dict.into_py(py))
    }
}

fn nalgebra_matrix(rows: &[Vec<f64>]) -> nalgebra::DMatrix<f64> {
    let n = rows.len();
    nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// Loads an instance from asset and covariance CSV files.
#[pyfunction]
fn load_instance(
    instance_path: &str,
    covariance_path: &str,
    budget: i64,
    risk: f64,
) -> PyResult<PyInstance> {
    let inner = io::load_instance(
        std::path::Path::new(instance_path),
        std::path::Path::new(covariance_path),
        budget,
        risk,
    )
    .map_err(value_err)?;
    Ok(PyInstance { inner })
}

#[pymodule]
fn portopt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(load_instance, m)?)?;
    Ok(())
}
