//! Python bindings for `hecke`.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hecke::cache;
use hecke::envelope::{self, Family};
use hecke::lfunctions;
use hecke::sums::{self, default_checkpoints};
use hecke::{Backend, CoefficientTable};

create_exception!(hecke_py, HeckeError, PyException);

fn err(e: hecke::Error) -> PyErr {
    HeckeError::new_err(e.to_string())
}

fn parse_family(s: &str) -> PyResult<Family> {
    s.parse().map_err(PyValueError::new_err)
}

fn checkpoints_or_default(table: &CoefficientTable, cps: Option<Vec<u64>>) -> Vec<u64> {
    cps.unwrap_or_else(|| default_checkpoints(table.bound() as u64))
}

fn pairs(s: &sums::SumSeries) -> Vec<(u64, f64)> {
    s.checkpoints
        .iter()
        .copied()
        .zip(s.values.iter().copied())
        .collect()
}

/// Exact table of `tau(1..=max_x)` with normalized eigenvalues.
#[pyclass(name = "CoefficientTable", frozen)]
struct PyCoefficientTable {
    inner: Arc<CoefficientTable>,
}

#[pymethods]
impl PyCoefficientTable {
    #[new]
    #[pyo3(signature = (max_x, backend = "fast"))]
    fn new(py: Python<'_>, max_x: usize, backend: &str) -> PyResult<Self> {
        let backend: Backend = backend.parse().map_err(PyValueError::new_err)?;
        let table = py
            .detach(|| hecke::build_coefficient_table(max_x, backend))
            .map_err(err)?;
        Ok(PyCoefficientTable {
            inner: Arc::new(table),
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyCoefficientTable {
            inner: Arc::new(cache::read_cache(path).map_err(err)?),
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        cache::write_cache(&self.inner, path).map_err(err)
    }

    #[getter]
    fn bound(&self) -> usize {
        self.inner.bound()
    }

    fn __len__(&self) -> usize {
        self.inner.bound()
    }

    fn __repr__(&self) -> String {
        format!("CoefficientTable(max_x={})", self.inner.bound())
    }

    fn tau(&self, n: usize) -> PyResult<i128> {
        self.inner.tau(n).ok_or_else(|| {
            PyValueError::new_err(format!("n = {n} outside 1..={}", self.inner.bound()))
        })
    }

    fn eigenvalue(&self, n: u64) -> PyResult<f64> {
        self.inner.eigenvalue(n).map_err(err)
    }

    /// Normalized eigenvalues `lambda(1), ..., lambda(max_x)`.
    fn lambdas(&self) -> Vec<f64> {
        self.inner.lambdas()[1..].to_vec()
    }

    /// `(lambda_p, theta_p)` at a prime.
    fn prime_local_data(&self, p: u64) -> PyResult<(f64, f64)> {
        let d = self.inner.prime_local_data(p).map_err(err)?;
        Ok((d.lambda_p, d.theta_p))
    }

    #[pyo3(signature = (r, checkpoints = None))]
    fn power_sum(&self, r: f64, checkpoints: Option<Vec<u64>>) -> PyResult<Vec<(u64, f64)>> {
        let cps = checkpoints_or_default(&self.inner, checkpoints);
        Ok(pairs(
            &sums::power_sum_series(&self.inner, r, &cps).map_err(err)?,
        ))
    }

    #[pyo3(signature = (checkpoints = None))]
    fn signed_sum(&self, checkpoints: Option<Vec<u64>>) -> PyResult<Vec<(u64, f64)>> {
        let cps = checkpoints_or_default(&self.inner, checkpoints);
        Ok(pairs(
            &sums::signed_sum_series(&self.inner, &cps).map_err(err)?,
        ))
    }

    /// `[(x, positive, negative, zero)]` counts of `tau(n)` signs.
    #[pyo3(signature = (checkpoints = None))]
    fn sign_counts(&self, checkpoints: Option<Vec<u64>>) -> PyResult<Vec<(u64, u64, u64, u64)>> {
        let cps = checkpoints_or_default(&self.inner, checkpoints);
        let c = sums::sign_counts(&self.inner, &cps).map_err(err)?;
        Ok((0..cps.len())
            .map(|i| {
                (
                    cps[i],
                    c.plus.values[i] as u64,
                    c.minus.values[i] as u64,
                    c.zeros[i],
                )
            })
            .collect())
    }

    #[pyo3(signature = (r, checkpoints = None))]
    fn sandwich<'py>(
        &self,
        py: Python<'py>,
        r: f64,
        checkpoints: Option<Vec<u64>>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cps = checkpoints_or_default(&self.inner, checkpoints);
        let rep = sums::sandwich_check(&self.inner, r, &cps).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("lower_family", rep.lower_family.name())?;
        d.set_item("worst_lower_margin", rep.worst_lower_margin)?;
        d.set_item("worst_upper_margin", rep.worst_upper_margin)?;
        d.set_item("lower_violations", rep.lower_violations)?;
        d.set_item("upper_violations", rep.upper_violations)?;
        d.set_item("first_violation", rep.first_violation)?;
        d.set_item("summatory_ordered", rep.summatory_ordered)?;
        d.set_item("lower", pairs(&rep.lower))?;
        d.set_item("power", pairs(&rep.power))?;
        d.set_item("upper", pairs(&rep.upper))?;
        Ok(d)
    }

    /// `(ks, histogram)` of the angles of primes up to the table bound.
    #[pyo3(signature = (bins = 50))]
    fn sato_tate(&self, bins: usize) -> PyResult<(f64, Vec<u64>)> {
        let rep = sums::sato_tate_stats(&self.inner, self.inner.bound(), bins).map_err(err)?;
        Ok((rep.ks, rep.histogram))
    }

    /// Exact check of the Deligne bound; returns the violating `n`.
    #[pyo3(signature = (limit = None))]
    fn deligne_violations(&self, limit: Option<usize>) -> PyResult<Vec<u64>> {
        let limit = limit.unwrap_or(self.inner.bound());
        Ok(self.inner.deligne_exact(limit).map_err(err)?.violations)
    }
}

/// `{delta_minus, rho_minus, theta, rho_plus, delta_plus}` at `r`.
#[pyfunction]
fn exponents(py: Python<'_>, r: f64) -> PyResult<Bound<'_, PyDict>> {
    let e = envelope::exponents(r);
    let d = PyDict::new(py);
    d.set_item("delta_minus", e.delta_minus)?;
    d.set_item("rho_minus", e.rho_minus)?;
    d.set_item("theta", e.theta)?;
    d.set_item("rho_plus", e.rho_plus)?;
    d.set_item("delta_plus", e.delta_plus)?;
    Ok(d)
}

#[pyfunction]
fn exponent_table_csv(r_values: Vec<f64>) -> String {
    envelope::exponent_table_csv(&r_values)
}

/// `[a_0, ..., a_4]` of the canonical envelope.
#[pyfunction]
#[pyo3(signature = (r, family = "minus"))]
fn envelope_coefficients(r: f64, family: &str) -> PyResult<Vec<f64>> {
    Ok(envelope::envelope_coefficients(r, parse_family(family)?)
        .map_err(err)?
        .a
        .to_vec())
}

#[pyfunction]
#[pyo3(signature = (r, family = "minus"))]
fn rho_from_coefficients(r: f64, family: &str) -> PyResult<f64> {
    let c = envelope::envelope_coefficients(r, parse_family(family)?).map_err(err)?;
    Ok(envelope::rho_from_coefficients(&c))
}

/// `(passed, min, max)` of the grid scan.
#[pyfunction]
#[pyo3(signature = (r, family = "minus", grid = 100_000))]
fn verify_envelope(r: f64, family: &str, grid: usize) -> PyResult<(bool, f64, f64)> {
    let rep = envelope::verify_envelope(r, parse_family(family)?, grid).map_err(err)?;
    Ok((rep.passed, rep.min, rep.max))
}

/// `(kappa, eta, rho)` of the best contact points on a grid.
#[pyfunction]
#[pyo3(signature = (r, family = "minus", step = 0.01))]
fn optimize_parameters(
    py: Python<'_>,
    r: f64,
    family: &str,
    step: f64,
) -> PyResult<(f64, f64, f64)> {
    let family = parse_family(family)?;
    let p = py
        .detach(|| envelope::optimize_parameters(r, family, step))
        .map_err(err)?;
    Ok((p.kappa, p.eta, p.objective))
}

#[pyfunction]
fn trace_polynomial(m: usize) -> PyResult<Vec<i64>> {
    Ok(lfunctions::trace_polynomial(m)
        .map_err(err)?
        .coeffs()
        .to_vec())
}

#[pyfunction]
fn power_to_trace_basis(j: usize) -> PyResult<Vec<i64>> {
    lfunctions::power_to_trace_basis(j).map_err(err)
}

/// Coefficients `1, c_1, ..., c_depth` of the local residual series.
#[pyfunction]
fn decomposition_residual(theta: f64, j: usize, depth: usize) -> PyResult<Vec<f64>> {
    Ok(lfunctions::decomposition_residual(theta, j, depth)
        .map_err(err)?
        .coeffs()
        .to_vec())
}

#[pyfunction]
fn ks_distance_sato_tate(angles: Vec<f64>) -> f64 {
    sums::ks_distance_sato_tate(&angles)
}

/// `(rho_hat, intercept, residual)` for a series given as parallel lists.
#[pyfunction]
fn fit_exponent(checkpoints: Vec<u64>, values: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    if checkpoints.len() != values.len() {
        return Err(PyValueError::new_err(
            "checkpoints and values differ in length",
        ));
    }
    let s = sums::SumSeries {
        kind: sums::SeriesKind::PowerSum(1.0),
        checkpoints,
        values,
    };
    let f = sums::fit_exponent(&s).map_err(err)?;
    Ok((f.rho_hat, f.intercept, f.residual))
}

#[pymodule]
pub fn hecke_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HeckeError", m.py().get_type::<HeckeError>())?;
    m.add_class::<PyCoefficientTable>()?;
    m.add_function(wrap_pyfunction!(exponents, m)?)?;
    m.add_function(wrap_pyfunction!(exponent_table_csv, m)?)?;
    m.add_function(wrap_pyfunction!(envelope_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(rho_from_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(verify_envelope, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_parameters, m)?)?;
    m.add_function(wrap_pyfunction!(trace_polynomial, m)?)?;
    m.add_function(wrap_pyfunction!(power_to_trace_basis, m)?)?;
    m.add_function(wrap_pyfunction!(decomposition_residual, m)?)?;
    m.add_function(wrap_pyfunction!(ks_distance_sato_tate, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponent, m)?)?;
    Ok(())
}
