//! Test-matrix generators and the scalar and matrix experiment drivers.

mod csv;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::engine::{matexp_action, matexp_full, ExpOptions, ExpResult, ExpValue, Mode, Shift, Threads};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, norm2, vec_norm2, CMatrix, HermitianMatrix, SpectralBounds, C64};
use crate::scalar::{bound_m1, uniform_errors, DigitModel, PartialFraction};

pub use csv::{
    emit_csv, emit_plotdata, emit_scalar_csv, parse_csv, read_csv, write_csv, write_plotdata, write_scalar_csv,
    CSV_HEADER, SCALAR_CSV_HEADER,
};

const VECTOR_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Lap1D,
    Lap2D,
    RandomSpectrum,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Lap1D => "lap1d",
            Family::Lap2D => "lap2d",
            Family::RandomSpectrum => "random",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lap1d" => Ok(Family::Lap1D),
            "lap2d" => Ok(Family::Lap2D),
            "random" => Ok(Family::RandomSpectrum),
            _ => Err(Error::BadSpec(format!("unknown family '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixSpec {
    pub family: Family,
    pub d: usize,
    /// Spectrum interval, RandomSpectrum only.
    pub range: Option<(f64, f64)>,
    pub seed: u64,
}

impl MatrixSpec {
    pub fn lap1d(d: usize) -> Self {
        Self {
            family: Family::Lap1D,
            d,
            range: None,
            seed: 0,
        }
    }

    pub fn lap2d(d: usize) -> Self {
        Self {
            family: Family::Lap2D,
            d,
            range: None,
            seed: 0,
        }
    }

    pub fn random(d: usize, lo: f64, hi: f64, seed: u64) -> Self {
        Self {
            family: Family::RandomSpectrum,
            d,
            range: Some((lo, hi)),
            seed,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::BadSpec("dimension must be at least 1".into()));
        }
        match (self.family, self.range) {
            (Family::RandomSpectrum, Some((lo, hi))) => {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(Error::BadSpec(format!("bad spectrum range {lo}:{hi}")));
                }
            }
            (Family::RandomSpectrum, None) => {
                return Err(Error::BadSpec("random family needs a spectrum range".into()));
            }
            (_, Some(_)) => {
                return Err(Error::BadSpec(format!("{} takes no spectrum range", self.family)));
            }
            (Family::Lap2D, None) => {
                let m = grid_side(self.d);
                if m * m != self.d {
                    return Err(Error::BadSpec(format!("lap2d needs a perfect square, got d={}", self.d)));
                }
            }
            (Family::Lap1D, None) => {}
        }
        Ok(())
    }

    /// Value of the CSV `family` column: `lap1d`, `lap2d` or `random(lo:hi)`.
    pub fn family_label(&self) -> String {
        match self.range {
            Some((lo, hi)) => format!("{}({lo}:{hi})", self.family),
            None => self.family.to_string(),
        }
    }

    pub fn parse_family_label(label: &str) -> Result<(Family, Option<(f64, f64)>)> {
        if let Some(inner) = label.strip_prefix("random(").and_then(|s| s.strip_suffix(')')) {
            return Ok((Family::RandomSpectrum, Some(parse_range(inner)?)));
        }
        Ok((label.parse()?, None))
    }
}

/// `lo:hi`
pub fn parse_range(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::BadSpec(format!("bad range '{s}', expected lo:hi"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn grid_side(d: usize) -> usize {
    let mut m = (d as f64).sqrt().round() as usize;
    while m * m > d {
        m -= 1;
    }
    while (m + 1) * (m + 1) <= d {
        m += 1;
    }
    m
}

fn real_hermitian(d: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<HermitianMatrix> {
    HermitianMatrix::new(CMatrix::from_fn(d, d, |i, j| C64::new(f(i, j), 0.0)))
}

pub fn gen_matrix(spec: &MatrixSpec) -> Result<HermitianMatrix> {
    spec.validate()?;
    let d = spec.d;
    match spec.family {
        Family::Lap1D => real_hermitian(d, |i, j| match i.abs_diff(j) {
            0 => -2.0,
            1 => 1.0,
            _ => 0.0,
        }),
        Family::Lap2D => {
            let m = grid_side(d);
            real_hermitian(d, |i, j| {
                let (ri, ci) = (i / m, i % m);
                let (rj, cj) = (j / m, j % m);
                if i == j {
                    -4.0
                } else if (ri == rj && ci.abs_diff(cj) == 1) || (ci == cj && ri.abs_diff(rj) == 1) {
                    1.0
                } else {
                    0.0
                }
            })
        }
        Family::RandomSpectrum => {
            let (lo, hi) = spec.range.expect("validated");
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let lambda: Vec<f64> = (0..d).map(|_| rng.random_range(lo..=hi)).collect();
            let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
            let q = g.qr().q();
            let m = &q * DMatrix::from_diagonal(&DVector::from_column_slice(&lambda)) * q.transpose();
            let lo_eig = lambda.iter().copied().fold(f64::INFINITY, f64::min);
            let hi_eig = lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let a = real_hermitian(d, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))?;
            Ok(a.with_bounds(SpectralBounds::new(lo_eig, hi_eig, true)?))
        }
    }
}

/// Unit-norm real Gaussian vector derived from `seed`.
pub fn random_unit_vector(d: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ VECTOR_SEED_SALT);
    let v: Vec<C64> = (0..d).map(|_| C64::new(rng.sample(StandardNormal), 0.0)).collect();
    let norm = vec_norm2(&v);
    v.into_iter().map(|z| z / norm).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Absolute,
    Relative,
}

impl ErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Absolute => "absolute",
            ErrorKind::Relative => "relative",
        }
    }
}

impl FromStr for ErrorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(ErrorKind::Absolute),
            "relative" => Ok(ErrorKind::Relative),
            _ => Err(Error::BadSpec(format!("unknown error kind '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub spec: MatrixSpec,
    pub n: usize,
    pub mode: Mode,
    pub shift: Shift,
    pub trial: usize,
    pub error: f64,
    pub error_kind: ErrorKind,
    /// Oracle (eigendecomposition) time.
    pub t_seq_ms: f64,
    pub t_para_ms: f64,
    pub t_total_ms: f64,
    pub bound: Option<f64>,
    /// Not part of the CSV schema; written to plot data only.
    pub per_term_ms: Vec<f64>,
}

impl BenchRecord {
    /// The record as it reads back from CSV.
    pub fn csv_view(&self) -> BenchRecord {
        BenchRecord {
            per_term_ms: Vec::new(),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSuite {
    pub specs: Vec<MatrixSpec>,
    pub n_list: Vec<usize>,
    pub mode: Mode,
    /// Trial `t` uses seed `spec.seed + t`.
    pub trials: usize,
    pub threads: Threads,
    pub shift: Shift,
    pub digits: u32,
    /// Timed repetitions per measurement; the median is reported.
    pub repeats: usize,
    /// Discard one untimed run before measuring.
    pub warmup: bool,
}

impl MatrixSuite {
    pub fn new(specs: Vec<MatrixSpec>, n_list: Vec<usize>, mode: Mode) -> Self {
        Self {
            specs,
            n_list,
            mode,
            trials: 1,
            threads: Threads::Auto,
            shift: Shift::None,
            digits: 16,
            repeats: 3,
            warmup: true,
        }
    }
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    assert!(!xs.is_empty(), "median of an empty sample");
    xs.sort_by(f64::total_cmp);
    let k = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[k]
    } else {
        0.5 * (xs[k - 1] + xs[k])
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Runs `f` once untimed if `warmup`, then `repeats` times; returns the
/// last output and the per-run wall times.
fn timed<T>(repeats: usize, warmup: bool, mut f: impl FnMut() -> Result<T>) -> Result<(T, Vec<Duration>)> {
    if warmup {
        f()?;
    }
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let t0 = Instant::now();
        last = Some(f()?);
        times.push(t0.elapsed());
    }
    Ok((last.expect("at least one run"), times))
}

enum Oracle {
    Matrix(CMatrix),
    Vector(Vec<C64>),
}

pub fn run_matrix_suite(suite: &MatrixSuite) -> Result<Vec<BenchRecord>> {
    if suite.trials == 0 {
        return Err(Error::BadSpec("trials must be at least 1".into()));
    }
    let mut records = Vec::new();
    for spec in &suite.specs {
        for trial in 0..suite.trials {
            let spec_t = spec.with_seed(spec.seed.wrapping_add(trial as u64));
            let a = gen_matrix(&spec_t)?;
            let v = (suite.mode == Mode::Action).then(|| random_unit_vector(a.dim(), spec_t.seed));

            let ((eig_values, oracle), oracle_times) = timed(suite.repeats, suite.warmup, || {
                let eig = eig_hermitian(&a)?;
                let oracle = match &v {
                    None => Oracle::Matrix(eig.apply_fn(f64::exp)),
                    Some(v) => Oracle::Vector(eig.apply_fn_vec(f64::exp, v)?),
                };
                Ok((eig.values, oracle))
            })?;
            let t_seq_ms = median(oracle_times.into_iter().map(ms).collect());
            let lo = eig_values.first().copied().unwrap_or(0.0);
            let alpha = eig_values.last().copied().unwrap_or(0.0);
            let a = a.with_bounds(SpectralBounds::new(lo, alpha, true)?);
            let (error_kind, scale) = if alpha > 0.0 {
                (ErrorKind::Relative, alpha.exp())
            } else {
                (ErrorKind::Absolute, 1.0)
            };

            for &n in &suite.n_list {
                let opts = ExpOptions::new(n)
                    .with_shift(suite.shift)
                    .with_threads(suite.threads)
                    .with_digits(suite.digits);
                let run = || match &v {
                    None => matexp_full(&a, &opts),
                    Some(v) => matexp_action(&a, v, &opts),
                };
                if suite.warmup {
                    run()?;
                }
                let runs = (0..suite.repeats.max(1)).map(|_| run()).collect::<Result<Vec<ExpResult>>>()?;
                let last = runs.last().expect("at least one run");
                let error = match (&oracle, &last.value) {
                    (Oracle::Matrix(o), ExpValue::Matrix(r)) => norm2(&r.sub(o)?)?,
                    (Oracle::Vector(o), ExpValue::Vector(y)) => {
                        let diff: Vec<C64> = y.iter().zip(o).map(|(p, q)| p - q).collect();
                        vec_norm2(&diff)
                    }
                    _ => unreachable!("oracle kind follows the mode"),
                } / scale;
                records.push(BenchRecord {
                    spec: spec_t,
                    n,
                    mode: suite.mode,
                    shift: suite.shift,
                    trial,
                    error,
                    error_kind,
                    t_seq_ms,
                    t_para_ms: median(runs.iter().map(|r| ms(r.t_para)).collect()),
                    t_total_ms: median(runs.iter().map(|r| ms(r.t_total)).collect()),
                    bound: last.error_bound,
                    per_term_ms: last.per_term_times.iter().copied().map(ms).collect(),
                });
            }
        }
    }
    Ok(records)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarRecord {
    pub n: usize,
    pub max_e1: f64,
    pub max_e2: f64,
    pub max_e3: f64,
    pub m1: f64,
    /// Absent when the digit model condition fails for this `n`.
    pub m2: Option<f64>,
}

pub fn run_scalar_suite(n_list: &[usize], grid: &[f64], digits: u32) -> Result<Vec<ScalarRecord>> {
    if let Some(x) = grid.iter().find(|x| !(**x <= 0.0)) {
        return Err(Error::BadSpec(format!("scalar grid must lie in x <= 0, found {x}")));
    }
    let model = DigitModel::new(digits);
    n_list
        .iter()
        .map(|&n| {
            let pf = PartialFraction::for_order(n)?;
            let m2 = model.m2(n as u64, pf.abs_coeff_sum()).ok();
            let rounded = pf.with_digits(digits);
            let (max_e1, max_e2, max_e3) = uniform_errors(&rounded, grid);
            Ok(ScalarRecord {
                n,
                max_e1,
                max_e2,
                max_e3,
                m1: bound_m1(n),
                m2,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigenvalues_hermitian;

    #[test]
    fn lap1d_three_by_three() {
        let a = gen_matrix(&MatrixSpec::lap1d(3)).unwrap();
        let want = CMatrix::from_real(3, 3, &[-2.0, 1.0, 0.0, 1.0, -2.0, 1.0, 0.0, 1.0, -2.0]).unwrap();
        assert_eq!(a.matrix(), &want);
        let b = a.bounds_or_gershgorin();
        assert_eq!((b.lo, b.hi), (-4.0, 0.0));
    }

    #[test]
    fn lap2d_is_kronecker_sum() {
        for m in [2usize, 3, 5, 10] {
            let a = gen_matrix(&MatrixSpec::lap2d(m * m)).unwrap();
            let got = eigenvalues_hermitian(a.matrix()).unwrap();
            let one = eigenvalues_hermitian(gen_matrix(&MatrixSpec::lap1d(m)).unwrap().matrix()).unwrap();
            let mut want: Vec<f64> = one.iter().flat_map(|x| one.iter().map(move |y| x + y)).collect();
            want.sort_by(f64::total_cmp);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-12, "m={m}: {g} vs {w}");
            }
        }
        assert!(gen_matrix(&MatrixSpec::lap2d(10)).is_err());
    }

    #[test]
    fn random_spectrum_is_recovered() {
        let spec = MatrixSpec::random(50, -1.0, 0.0, 11);
        let a = gen_matrix(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut lambda: Vec<f64> = (0..50).map(|_| rng.random_range(-1.0..=0.0)).collect();
        lambda.sort_by(f64::total_cmp);
        let got = eigenvalues_hermitian(a.matrix()).unwrap();
        for (g, w) in got.iter().zip(&lambda) {
            assert!((g - w).abs() < 1e-12);
        }
        assert_eq!(gen_matrix(&spec).unwrap(), a);
        assert_ne!(gen_matrix(&spec.with_seed(12)).unwrap(), a);
        assert!(a.bounds().unwrap().exact);
    }

    #[test]
    fn bad_specs_rejected() {
        assert!(gen_matrix(&MatrixSpec::lap1d(0)).is_err());
        assert!(gen_matrix(&MatrixSpec::random(4, 1.0, 0.0, 0)).is_err());
        let mut s = MatrixSpec::lap1d(4);
        s.range = Some((-1.0, 0.0));
        assert!(s.validate().is_err());
    }

    #[test]
    fn family_labels_round_trip() {
        for spec in [MatrixSpec::lap1d(3), MatrixSpec::lap2d(4), MatrixSpec::random(5, -0.25, 20.0, 1)] {
            let (f, r) = MatrixSpec::parse_family_label(&spec.family_label()).unwrap();
            assert_eq!((f, r), (spec.family, spec.range));
        }
        assert!(MatrixSpec::parse_family_label("random(1:x)").is_err());
    }

    #[test]
    fn unit_vector_is_normalized_and_seeded() {
        let v = random_unit_vector(20, 5);
        assert!((vec_norm2(&v) - 1.0).abs() < 1e-15);
        assert_eq!(v, random_unit_vector(20, 5));
    }

    #[test]
    fn scalar_suite_examples() {
        let grid = crate::scalar::linspace(-100.0, 0.0, 2001);
        let rows = run_scalar_suite(&[8, 32], &grid, 16).unwrap();
        assert!(rows[0].max_e2 <= bound_m1(8));
        assert!(rows[1].max_e3 <= rows[1].m2.unwrap());
        assert!(run_scalar_suite(&[8], &[0.5], 16).is_err());
    }

    #[test]
    fn matrix_suite_small_run() {
        let mut suite = MatrixSuite::new(vec![MatrixSpec::lap1d(20)], vec![8, 16], Mode::Action);
        suite.repeats = 1;
        suite.warmup = false;
        let recs = run_matrix_suite(&suite).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs[1].error < recs[0].error);
        for r in &recs {
            assert!(r.error <= r.bound.unwrap());
            assert_eq!(r.per_term_ms.len(), r.n / 2);
            assert_eq!(r.error_kind, ErrorKind::Absolute);
        }
    }

    #[test]
    fn positive_spectrum_reports_relative_error() {
        let mut suite = MatrixSuite::new(vec![MatrixSpec::random(12, 0.0, 5.0, 3)], vec![16], Mode::Full);
        suite.repeats = 1;
        suite.warmup = false;
        suite.shift = Shift::Auto;
        let recs = run_matrix_suite(&suite).unwrap();
        assert_eq!(recs[0].error_kind, ErrorKind::Relative);
        // Exact eigenvalue bounds make the a priori bound attained, so allow round-off.
        let slack = crate::scalar::bound_m2(&PartialFraction::for_order(16).unwrap(), 16).unwrap();
        assert!(recs[0].error <= recs[0].bound.unwrap() + slack, "{:?}", recs[0]);
    }
}
