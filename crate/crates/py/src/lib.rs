//! Python bindings. States are passed as the same JSON family specs the CLI accepts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use steernet::bloch::{decompose, Mat3, Vec3};
use steernet::cli::{reproduce as run_target, Target};
use steernet::criteria::{
    bell_local_3322, bowles_for_state, canonical_form, chsh_max, cjwr_max, f3_report, i3322_max,
    reduced_f3_values, CriterionReport,
};
use steernet::families::{eq13_value, eq14_value, make_state, FamilySpec};
use steernet::netswap::{bsm_swap, star_swap};
use steernet::optimize::OptConfig;
use steernet::qmat::DensityMatrix;
use steernet::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Internal(m) => PyRuntimeError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn state(spec: &str) -> PyResult<DensityMatrix> {
    FamilySpec::from_json(spec).and_then(|s| make_state(&s)).map_err(py_err)
}

fn config(restarts: usize, seed: u64) -> OptConfig {
    OptConfig { restarts, seed, ..OptConfig::default() }
}

/// Density matrix of a family spec as nested lists of complex numbers.
#[pyfunction]
fn density_matrix(spec: &str) -> PyResult<Vec<Vec<num_complex::Complex64>>> {
    Ok(state(spec)?.matrix().rows())
}

/// `(u, v, W)` of a two-qubit state.
#[pyfunction]
fn bloch(spec: &str) -> PyResult<(Vec3, Vec3, Mat3)> {
    let b = decompose(&state(spec)?).map_err(py_err)?;
    Ok((b.u, b.v, b.w))
}

/// `(a, diagonal of W)` of the canonical form.
#[pyfunction]
fn canonical(spec: &str) -> PyResult<(Vec3, Vec3)> {
    let c = canonical_form(&state(spec)?).map_err(py_err)?;
    Ok((c.a, c.w))
}

/// Criterion report as a JSON string.
#[pyfunction]
#[pyo3(signature = (criterion, spec, restarts = 64, seed = 0x5eed))]
fn check(criterion: &str, spec: &str, restarts: usize, seed: u64) -> PyResult<String> {
    let rho = state(spec)?;
    let cfg = config(restarts, seed);
    let report: CriterionReport = match criterion {
        "f3" => f3_report(&rho),
        "cjwr" => cjwr_max(&rho, &cfg),
        "chsh" => chsh_max(&rho, &cfg),
        "i3322" => i3322_max(&rho, &cfg),
        "bell-local" => bell_local_3322(&rho, &cfg),
        "unsteerable" => bowles_for_state(&rho, &cfg),
        other => return Err(PyValueError::new_err(format!("unknown criterion {other:?}"))),
    }
    .map_err(py_err)?;
    Ok(report.to_json())
}

/// Swap outcomes as `(label, probability, f3 values)`.
///
/// Two links give one value per outcome; three links give the pairwise values of the star network.
#[pyfunction]
#[pyo3(signature = (left, right, third = None))]
fn swap(left: &str, right: &str, third: Option<&str>) -> PyResult<Vec<(String, f64, Vec<f64>)>> {
    let (a, b) = (state(left)?, state(right)?);
    let outcomes = match third {
        Some(t) => star_swap(&a, &b, &state(t)?),
        None => bsm_swap(&a, &b),
    }
    .map_err(py_err)?;
    outcomes
        .iter()
        .map(|o| {
            let values = match third {
                Some(_) => reduced_f3_values(&o.conditional)?.to_vec(),
                None => vec![decompose(&o.conditional)?.correlation_weight()],
            };
            Ok((o.label.clone(), o.probability, values))
        })
        .collect::<Result<_, Error>>()
        .map_err(py_err)
}

/// Closed-form conditional values `(00/01, 10/11)` of the gamma pair.
#[pyfunction]
fn gamma_conditionals(p: f64, alpha: f64) -> PyResult<(f64, f64)> {
    Ok((eq13_value(p, alpha).map_err(py_err)?, eq14_value(p, alpha).map_err(py_err)?))
}

/// Reproduction checks as `(name, pass, expected, got)`.
#[pyfunction]
#[pyo3(signature = (target, restarts = 64, seed = 0x5eed))]
fn reproduce(py: Python<'_>, target: &str, restarts: usize, seed: u64) -> PyResult<Vec<(String, bool, String, String)>> {
    let t = match target {
        "fig2" => Target::Fig2,
        "star-table" => Target::StarTable,
        "genuine-table" => Target::GenuineTable,
        "appendixC" => Target::AppendixC,
        "appendixD" => Target::AppendixD,
        other => return Err(PyValueError::new_err(format!("unknown target {other:?}"))),
    };
    let cfg = config(restarts, seed);
    let checks = py.detach(|| run_target(t, &cfg)).map_err(py_err)?;
    Ok(checks.into_iter().map(|c| (c.name, c.pass, c.expected, c.got)).collect())
}

#[pymodule]
fn steernet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(density_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(bloch, m)?)?;
    m.add_function(wrap_pyfunction!(canonical, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(swap, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_conditionals, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    Ok(())
}
