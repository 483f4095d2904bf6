//! Python bindings for the partial-fraction matrix exponential.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pfexpm::bench::{self, Family, MatrixSpec};
use pfexpm::engine::{self, ExpOptions, ExpResult, ExpValue, Shift, Threads};
use pfexpm::error::Error;
use pfexpm::linalg::{self, CMatrix, HermitianMatrix, C64};
use pfexpm::rootgen::{cached_table, check_order};
use pfexpm::scalar::{self, DigitModel, PartialFraction};

fn to_py(e: Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        4 => PyOSError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn hermitian(rows: Vec<Vec<C64>>) -> PyResult<HermitianMatrix> {
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let m = CMatrix::new(d, d, rows.into_iter().flatten().collect()).map_err(to_py)?;
    HermitianMatrix::new(m).map_err(to_py)
}

fn rows_of(m: &CMatrix) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| m.row(i).to_vec()).collect()
}

fn real_rows(m: &CMatrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().map(|z| z.re).collect()).collect()
}

fn options(n: usize, shift: Option<&Bound<'_, PyAny>>, threads: Option<usize>, digits: u32) -> PyResult<ExpOptions> {
    let shift = match shift {
        None => Shift::None,
        Some(s) => {
            if let Ok(c) = s.extract::<f64>() {
                Shift::Fixed(c)
            } else {
                s.extract::<String>()?.parse().map_err(|e: Error| to_py(e))?
            }
        }
    };
    let threads = match threads {
        None => Threads::Auto,
        Some(k) => Threads::count(k).map_err(to_py)?,
    };
    Ok(ExpOptions::new(n).with_shift(shift).with_threads(threads).with_digits(digits))
}

fn result_dict<'py>(py: Python<'py>, r: &ExpResult, real: bool) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    match &r.value {
        ExpValue::Matrix(m) if real => out.set_item("value", real_rows(m))?,
        ExpValue::Matrix(m) => out.set_item("value", rows_of(m))?,
        ExpValue::Vector(v) if real => out.set_item("value", v.iter().map(|z| z.re).collect::<Vec<_>>())?,
        ExpValue::Vector(v) => out.set_item("value", v.clone())?,
    }
    out.set_item("error_bound", r.error_bound)?;
    out.set_item("uniform_bound", r.uniform_bound)?;
    out.set_item("relative", r.relative)?;
    out.set_item("shift", r.shift)?;
    out.set_item("t_para_ms", r.t_para.as_secs_f64() * 1e3)?;
    out.set_item("t_total_ms", r.t_total.as_secs_f64() * 1e3)?;
    out.set_item("warnings", r.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>())?;
    Ok(out)
}

/// `exp(A)` for a Hermitian matrix given as a list of rows.
///
/// `shift` is `None`, `"auto"` or a number `c`.
#[pyfunction]
#[pyo3(signature = (matrix, n, shift=None, threads=None, digits=16))]
fn expm<'py>(
    py: Python<'py>,
    matrix: Vec<Vec<C64>>,
    n: usize,
    shift: Option<&Bound<'py, PyAny>>,
    threads: Option<usize>,
    digits: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let a = hermitian(matrix)?;
    let opts = options(n, shift, threads, digits)?;
    let real = a.is_real();
    let r = py.detach(|| match opts.shift {
        Shift::None => engine::matexp_full(&a, &opts),
        _ => engine::matexp_shifted(&a, None, &opts),
    });
    result_dict(py, &r.map_err(to_py)?, real)
}

/// `exp(A) v` without forming `exp(A)`.
#[pyfunction]
#[pyo3(signature = (matrix, v, n, shift=None, threads=None, digits=16))]
fn expm_action<'py>(
    py: Python<'py>,
    matrix: Vec<Vec<C64>>,
    v: Vec<C64>,
    n: usize,
    shift: Option<&Bound<'py, PyAny>>,
    threads: Option<usize>,
    digits: u32,
) -> PyResult<Bound<'py, PyDict>> {
    let a = hermitian(matrix)?;
    let opts = options(n, shift, threads, digits)?;
    let real = a.is_real() && v.iter().all(|z| z.im == 0.0);
    let r = py.detach(|| match opts.shift {
        Shift::None => engine::matexp_action(&a, &v, &opts),
        _ => engine::matexp_shifted(&a, Some(&v), &opts),
    });
    result_dict(py, &r.map_err(to_py)?, real)
}

/// Reference `exp(A)` from a Hermitian eigendecomposition.
#[pyfunction]
fn exp_oracle(py: Python<'_>, matrix: Vec<Vec<C64>>) -> PyResult<Vec<Vec<C64>>> {
    let a = hermitian(matrix)?;
    let m = py.detach(|| linalg::exp_oracle(&a)).map_err(to_py)?;
    Ok(rows_of(&m))
}

/// Spectral norm of the difference of two square matrices.
#[pyfunction]
fn norm2_diff(a: Vec<Vec<C64>>, b: Vec<Vec<C64>>) -> PyResult<f64> {
    let to_m = |rows: Vec<Vec<C64>>| {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        CMatrix::new(r, c, rows.into_iter().flatten().collect()).map_err(to_py)
    };
    let d = to_m(a)?.sub(&to_m(b)?).map_err(to_py)?;
    linalg::norm2(&d).map_err(to_py)
}

/// Poles `theta_k` and weights `a_k` of `1/exp_n(-z)` in binary64.
#[pyfunction]
fn pole_table(n: usize) -> PyResult<(Vec<C64>, Vec<C64>)> {
    let t = cached_table(n).map_err(to_py)?;
    Ok((t.roots_c64(), t.coeffs_c64()))
}

/// `R_n(x)` through the partial-fraction sum.
#[pyfunction]
fn eval_pf(n: usize, x: f64) -> PyResult<f64> {
    Ok(PartialFraction::for_order(n).map_err(to_py)?.eval_real(x))
}

#[pyfunction]
fn err_n(n: usize, x: f64) -> PyResult<f64> {
    check_order(n).map_err(to_py)?;
    Ok(scalar::err_n(n, x))
}

#[pyfunction]
fn bound_m1(n: usize) -> f64 {
    scalar::bound_m1(n)
}

#[pyfunction]
#[pyo3(signature = (n, digits=16))]
fn bound_m2(n: usize, digits: u32) -> PyResult<f64> {
    let pf = PartialFraction::for_order(n).map_err(to_py)?;
    DigitModel::new(digits).m2(n as u64, pf.abs_coeff_sum()).map_err(to_py)
}

/// `R_n(-rho) - exp(-rho)`.
#[pyfunction]
fn truncation_gap(n: usize, rho: f64) -> f64 {
    scalar::truncation_gap(n, rho)
}

/// Benchmark matrix as a list of real rows.
#[pyfunction]
#[pyo3(signature = (family, d, lo=None, hi=None, seed=0))]
fn gen_matrix(family: &str, d: usize, lo: Option<f64>, hi: Option<f64>, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let family: Family = family.parse().map_err(|e: Error| to_py(e))?;
    let range = match (lo, hi) {
        (Some(l), Some(h)) => Some((l, h)),
        (None, None) => None,
        _ => return Err(PyValueError::new_err("lo and hi must be given together")),
    };
    let spec = MatrixSpec { family, d, range, seed };
    let a = bench::gen_matrix(&spec).map_err(to_py)?;
    Ok(real_rows(a.matrix()))
}

#[pymodule]
fn pfexpm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(expm, m)?)?;
    m.add_function(wrap_pyfunction!(expm_action, m)?)?;
    m.add_function(wrap_pyfunction!(exp_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(norm2_diff, m)?)?;
    m.add_function(wrap_pyfunction!(pole_table, m)?)?;
    m.add_function(wrap_pyfunction!(eval_pf, m)?)?;
    m.add_function(wrap_pyfunction!(err_n, m)?)?;
    m.add_function(wrap_pyfunction!(bound_m1, m)?)?;
    m.add_function(wrap_pyfunction!(bound_m2, m)?)?;
    m.add_function(wrap_pyfunction!(truncation_gap, m)?)?;
    m.add_function(wrap_pyfunction!(gen_matrix, m)?)?;
    Ok(())
}
