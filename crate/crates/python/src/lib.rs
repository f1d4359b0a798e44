//! Python bindings: a thin functional layer over the core crate.

use std::f64::consts::PI;

use cqwell::dipole::DipoleDecomposition;
use cqwell::evolution::{
    basis_vector, dominant_peak, evolve_substepped, prepare_q, resonance_scan, undo_transforms,
    DriveConfig, Observable, PropagatorBuilder, ScanMethod, ScanOptions,
};
use cqwell::kernel::{i_interval, Route, Truncation};
use cqwell::well::{solve_levels, EigenBasis, WellParams};
use cqwell::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

const TOL: f64 = 1e-12;

/// `(omega, beta, value)` rows and the dominant peak frequency.
type ScanResult = (Vec<(f64, f64, f64)>, Option<f64>);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParam { .. }
        | Error::IndexOutOfRange { .. }
        | Error::UnknownObservable(..) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn route(name: &str) -> PyResult<Route> {
    name.parse().map_err(PyValueError::new_err)
}

fn system(
    k1: f64,
    k2: f64,
    m: f64,
    hbar: f64,
    n: usize,
) -> PyResult<(WellParams, EigenBasis, DipoleDecomposition)> {
    let p = WellParams::new(m, k1, k2, hbar).map_err(py_err)?;
    let basis = solve_levels(p, n, TOL).map_err(py_err)?;
    let dip = DipoleDecomposition::new(&basis, n).map_err(py_err)?;
    Ok((p, basis, dip))
}

/// Lowest `n` energy levels in physical units.
#[pyfunction]
#[pyo3(signature = (k1=1.0, k2=4.0, n=6, m=1.0, hbar=1.0))]
fn levels(k1: f64, k2: f64, n: usize, m: f64, hbar: f64) -> PyResult<Vec<f64>> {
    let p = WellParams::new(m, k1, k2, hbar).map_err(py_err)?;
    let basis = solve_levels(p, n, TOL).map_err(py_err)?;
    Ok(basis.states.iter().map(|s| s.energy).collect())
}

/// Truncated dipole matrix and its eigenvalues, in units of `ℓ`.
#[pyfunction]
#[pyo3(signature = (k1=1.0, k2=4.0, n=6, m=1.0, hbar=1.0))]
fn dipole(k1: f64, k2: f64, n: usize, m: f64, hbar: f64) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let (_, _, dip) = system(k1, k2, m, hbar, n)?;
    let x = dip
        .x
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    Ok((x, dip.lambda.iter().copied().collect()))
}

/// `I(ξ, ξ₀|α)` through the chosen series route.
#[pyfunction]
#[pyo3(signature = (xi, alpha, xi0=0.0, route="fourier"))]
fn kernel(xi: f64, alpha: f64, xi0: f64, route: &str) -> PyResult<Complex64> {
    i_interval(xi, xi0, alpha, self::route(route)?, Truncation::default()).map_err(py_err)
}

/// Populations `|φ̂_k|²` from the ground state, sampled over `periods` drive
/// periods with one product step per sample. Returns `(xi, populations)`.
#[pyfunction]
#[pyo3(signature = (beta, omega, k1=1.0, k2=4.0, n=6, periods=1.0, samples_per_period=64, xi0=0.0, route="fourier"))]
fn evolve(
    beta: f64,
    omega: f64,
    k1: f64,
    k2: f64,
    n: usize,
    periods: f64,
    samples_per_period: usize,
    xi0: f64,
    route: &str,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let (p, _, dip) = system(k1, k2, 1.0, 1.0, n)?;
    let d = DriveConfig::from_beta(beta, omega, xi0, &p).map_err(py_err)?;
    let b = PropagatorBuilder::new(&dip, &d, self::route(route)?, Truncation::default())
        .map_err(py_err)?;
    let steps = (periods * samples_per_period as f64).round() as usize;
    if steps == 0 {
        return Err(PyValueError::new_err(
            "periods * samples_per_period must round to at least 1",
        ));
    }
    let end = xi0 + 2.0 * PI * periods;
    let q0 = prepare_q(&basis_vector(n, 0).map_err(py_err)?, xi0, &dip, &d).map_err(py_err)?;
    let qs = evolve_substepped(&q0, &b, xi0, end, steps).map_err(py_err)?;
    let mut xis = vec![xi0];
    let mut pops = vec![(0..n).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect()];
    for (j, q) in qs.iter().enumerate() {
        let xi = xi0 + (end - xi0) * (j + 1) as f64 / steps as f64;
        let (_, phi) = undo_transforms(q, xi, &dip, &d).map_err(py_err)?;
        xis.push(xi);
        pops.push(phi.iter().map(|z| z.norm_sqr()).collect());
    }
    Ok((xis, pops))
}

/// Ground-state depletion over drive frequencies at fixed amplitude, with `β`
/// given at `omega_ref`. Returns `(omega, beta, value)` rows and the dominant
/// peak frequency.
#[pyfunction]
#[pyo3(signature = (omegas, beta, omega_ref, k1=1.0, k2=4.0, n=6, periods=1, method="propagator", observable="depletion"))]
fn scan(
    omegas: Vec<f64>,
    beta: f64,
    omega_ref: f64,
    k1: f64,
    k2: f64,
    n: usize,
    periods: usize,
    method: &str,
    observable: &str,
) -> PyResult<ScanResult> {
    let (p, _, dip) = system(k1, k2, 1.0, 1.0, n)?;
    let d = DriveConfig::from_beta(beta, omega_ref, 0.0, &p).map_err(py_err)?;
    let method = match method {
        "propagator" => ScanMethod::Propagator,
        "reference" => ScanMethod::Reference,
        other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
    };
    let opts = ScanOptions {
        observable: observable.parse::<Observable>().map_err(py_err)?,
        method,
        periods,
        ..ScanOptions::default()
    };
    let points = resonance_scan(&dip, &p, &d, &omegas, &opts).map_err(py_err)?;
    let peak = dominant_peak(&points).map(|pk| pk.omega);
    Ok((
        points
            .iter()
            .map(|pt| (pt.omega, pt.beta, pt.value))
            .collect(),
        peak,
    ))
}

#[pymodule(name = "cqwell")]
fn cqwell_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", cqwell::VERSION)?;
    m.add_function(wrap_pyfunction!(levels, m)?)?;
    m.add_function(wrap_pyfunction!(dipole, m)?)?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    Ok(())
}
