//! Matrix exponential of Hermitian matrices through the partial-fraction form
//! `R_n(A) = sum_k a_k (A + theta_k I)^{-1}`.
//!
//! Each conjugate pair of poles is one independent task: one complex LU
//! factorization, one solve, and the pair's contribution. Tasks write into
//! pre-assigned slots and the slots are summed in ascending pair order, so
//! the result does not depend on the number of threads.

use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HermitianMatrix, LuFactorization, SpectralBounds, C64};
use crate::rootgen::check_order;
use crate::scalar::{bound_m1, truncation_gap, PartialFraction};

/// Largest shift whose exponential is finite in binary64.
pub const MAX_SHIFT: f64 = 709.782712893384;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Mode {
    #[default]
    Full,
    Action,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Action => "action",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Mode::Full),
            "action" => Ok(Mode::Action),
            _ => Err(Error::BadSpec(format!("unknown mode '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Shift {
    #[default]
    None,
    Auto,
    Fixed(f64),
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shift::None => f.write_str("none"),
            Shift::Auto => f.write_str("auto"),
            Shift::Fixed(c) => write!(f, "c={c}"),
        }
    }
}

impl FromStr for Shift {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Shift::None),
            "auto" => Ok(Shift::Auto),
            _ => {
                let c = s
                    .strip_prefix("c=")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::BadSpec(format!("unknown shift '{s}'")))?;
                if !c.is_finite() {
                    return Err(Error::BadSpec(format!("shift must be finite, got {c}")));
                }
                Ok(Shift::Fixed(c))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Threads {
    #[default]
    Auto,
    Count(NonZeroUsize),
}

impl Threads {
    pub fn count(k: usize) -> Result<Self> {
        NonZeroUsize::new(k)
            .map(Threads::Count)
            .ok_or_else(|| Error::BadSpec("thread count must be positive".into()))
    }
}

impl fmt::Display for Threads {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threads::Auto => f.write_str("auto"),
            Threads::Count(k) => write!(f, "{k}"),
        }
    }
}

impl FromStr for Threads {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Threads::Auto);
        }
        let k = s
            .parse::<usize>()
            .map_err(|_| Error::BadSpec(format!("bad thread count '{s}'")))?;
        Threads::count(k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpOptions {
    pub n: usize,
    pub mode: Mode,
    pub shift: Shift,
    pub parallel: bool,
    pub threads: Threads,
    /// Significant digits of the pole/weight table; 16 or more uses binary64 as is.
    pub digits: u32,
}

impl ExpOptions {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            mode: Mode::Full,
            shift: Shift::None,
            parallel: true,
            threads: Threads::Auto,
            digits: 16,
        }
    }

    pub fn with_shift(mut self, shift: Shift) -> Self {
        self.shift = shift;
        self
    }

    pub fn with_threads(mut self, threads: Threads) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_digits(mut self, digits: u32) -> Self {
        self.digits = digits;
        self
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }

    fn validate(&self) -> Result<()> {
        check_order(self.n)?;
        if let Shift::Fixed(c) = self.shift {
            if !c.is_finite() {
                return Err(Error::BadSpec(format!("shift must be finite, got {c}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExpValue {
    Matrix(CMatrix),
    Vector(Vec<C64>),
}

impl ExpValue {
    pub fn as_matrix(&self) -> Option<&CMatrix> {
        match self {
            ExpValue::Matrix(m) => Some(m),
            ExpValue::Vector(_) => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[C64]> {
        match self {
            ExpValue::Vector(v) => Some(v),
            ExpValue::Matrix(_) => None,
        }
    }

    fn scale(&mut self, s: f64) {
        let data = match self {
            ExpValue::Matrix(m) => m.data_mut(),
            ExpValue::Vector(v) => v.as_mut_slice(),
        };
        for z in data {
            *z *= s;
        }
    }
}

/// Conditions under which a result is returned without a certified bound.
#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// `n <= 2 rho`: the a priori bound is not guaranteed.
    OrderTooSmall { n: usize, rho: f64 },
    /// The (shifted) spectrum is not known to be non-positive.
    SpectrumNotCertified { hi: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::OrderTooSmall { n, rho } => {
                write!(f, "n={n} does not exceed 2*rho={}; no a priori bound", 2.0 * rho)
            }
            Warning::SpectrumNotCertified { hi } => {
                write!(f, "spectral upper bound {hi:e} is positive; no a priori bound")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExpResult {
    pub value: ExpValue,
    /// `R_n(-rho) - exp(-rho)`, absolute without shift and relative with one
    /// (scaled by `e^{c - alpha}`). Present only when `n > 2 rho`.
    pub error_bound: Option<f64>,
    /// `2^-n`, scaled the same way; present whenever the spectrum of the
    /// shifted matrix is certified non-positive.
    pub uniform_bound: Option<f64>,
    /// Whether the bounds are relative to `||exp(A)||_2`.
    pub relative: bool,
    pub shift: f64,
    pub per_term_times: Vec<Duration>,
    pub t_para: Duration,
    pub t_total: Duration,
    pub warnings: Vec<Warning>,
}

/// `R_n(-rho) - exp(-rho)` for a spectrum inside `bounds`.
pub fn apriori_bound(bounds: SpectralBounds, n: usize) -> Result<f64> {
    check_order(n)?;
    if bounds.hi > 0.0 {
        return Err(Error::SpectrumNotNonPositive(bounds.hi));
    }
    let rho = bounds.rho();
    if n as f64 <= 2.0 * rho {
        return Err(Error::OrderTooSmall { n, rho });
    }
    Ok(truncation_gap(n, rho))
}

pub fn matexp_full(a: &HermitianMatrix, opts: &ExpOptions) -> Result<ExpResult> {
    run(a, None, &ExpOptions { mode: Mode::Full, ..*opts })
}

pub fn matexp_action(a: &HermitianMatrix, v: &[C64], opts: &ExpOptions) -> Result<ExpResult> {
    if v.len() != a.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for dimension {}",
            v.len(),
            a.dim()
        )));
    }
    if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvariantViolation("vector has non-finite entries".into()));
    }
    run(a, Some(v), &ExpOptions { mode: Mode::Action, ..*opts })
}

/// `e^c R_n(A - c I)`, defaulting to the automatic shift when none is set.
/// Action mode requires `v`.
pub fn matexp_shifted(a: &HermitianMatrix, v: Option<&[C64]>, opts: &ExpOptions) -> Result<ExpResult> {
    let shift = match opts.shift {
        Shift::None => Shift::Auto,
        s => s,
    };
    let opts = ExpOptions { shift, ..*opts };
    match (opts.mode, v) {
        (Mode::Full, _) => matexp_full(a, &opts),
        (Mode::Action, Some(v)) => matexp_action(a, v, &opts),
        (Mode::Action, None) => Err(Error::BadSpec("action mode needs a vector".into())),
    }
}

/// Shift value for `a`: Gershgorin upper bound, or exact `alpha(A)` when
/// exact bounds are attached.
pub fn auto_shift(a: &HermitianMatrix) -> f64 {
    a.bounds_or_gershgorin().hi
}

/// Lower bound on `alpha(A) = max eig`: exact when known, else the largest
/// diagonal entry (a Rayleigh quotient).
fn alpha_lower_bound(a: &HermitianMatrix) -> f64 {
    match a.bounds() {
        Some(b) if b.exact => b.hi,
        _ => {
            let m = a.matrix();
            (0..a.dim()).map(|i| m[(i, i)].re).fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

enum Term {
    Matrix(CMatrix),
    Vector(Vec<C64>),
}

fn pair_term(
    shifted: &HermitianMatrix,
    v: Option<&[C64]>,
    theta: C64,
    coeff: C64,
    real_path: bool,
) -> Result<Term> {
    let m = shifted.matrix();
    let lu = LuFactorization::new(m.shifted(theta))?;
    match v {
        None => {
            let x = lu.inverse()?;
            let d = x.nrows();
            let y = x.scale(coeff);
            let t = if real_path {
                CMatrix::new(d, d, y.data().iter().map(|z| C64::new(2.0 * z.re, 0.0)).collect())?
            } else {
                // (A + conj(theta) I)^{-1} = X^H for Hermitian A.
                y.add(&y.adjoint())?
            };
            Ok(Term::Matrix(t))
        }
        Some(v) => {
            let y = lu.solve_vec(v)?;
            if real_path {
                Ok(Term::Vector(y.iter().map(|z| C64::new(2.0 * (coeff * z).re, 0.0)).collect()))
            } else {
                let lu_conj = LuFactorization::new(m.shifted(theta.conj()))?;
                let w = lu_conj.solve_vec(v)?;
                let cc = coeff.conj();
                Ok(Term::Vector(y.iter().zip(&w).map(|(p, q)| coeff * p + cc * q).collect()))
            }
        }
    }
}

fn run(a: &HermitianMatrix, v: Option<&[C64]>, opts: &ExpOptions) -> Result<ExpResult> {
    let start = Instant::now();
    opts.validate()?;
    let n = opts.n;
    let pf = PartialFraction::for_order(n)?.with_digits(opts.digits);

    let c = match opts.shift {
        Shift::None => 0.0,
        Shift::Auto => auto_shift(a),
        Shift::Fixed(c) => c,
    };
    if !c.is_finite() {
        return Err(Error::BadSpec(format!("shift evaluates to {c}")));
    }
    if c > MAX_SHIFT {
        return Err(Error::Overflow(c));
    }
    let shifted_owned;
    let shifted = if c == 0.0 {
        a
    } else {
        shifted_owned = a.shifted(-c);
        &shifted_owned
    };

    let mut warnings = Vec::new();
    let bounds = shifted.bounds_or_gershgorin();
    if let (Shift::None, Some(b)) = (opts.shift, a.bounds()) {
        if b.hi > 0.0 {
            return Err(Error::SpectrumNotNonPositive(b.hi));
        }
    }
    let scale_rel = if c == 0.0 { 1.0 } else { (c - alpha_lower_bound(a)).exp() };
    let (error_bound, uniform_bound) = if bounds.hi > 0.0 {
        warnings.push(Warning::SpectrumNotCertified { hi: bounds.hi });
        (None, None)
    } else {
        let rho = bounds.rho();
        let eb = if n as f64 > 2.0 * rho {
            Some(truncation_gap(n, rho) * scale_rel)
        } else {
            warnings.push(Warning::OrderTooSmall { n, rho });
            None
        };
        (eb, Some(bound_m1(n) * scale_rel))
    };

    let real_path = a.is_real() && v.is_none_or(|v| v.iter().all(|z| z.im == 0.0));
    let tasks: Vec<(C64, C64)> = pf.pairs().iter().map(|&k| (pf.roots()[k], pf.coeffs()[k])).collect();
    let task = |&(theta, coeff): &(C64, C64)| -> Result<(Term, Duration)> {
        let t0 = Instant::now();
        let term = pair_term(shifted, v, theta, coeff, real_path)?;
        Ok((term, t0.elapsed()))
    };

    let slots: Vec<Result<(Term, Duration)>> = if opts.parallel {
        match opts.threads {
            Threads::Auto => tasks.par_iter().map(task).collect(),
            Threads::Count(k) => rayon::ThreadPoolBuilder::new()
                .num_threads(k.get())
                .build()
                .map_err(|e| Error::InvariantViolation(format!("thread pool: {e}")))?
                .install(|| tasks.par_iter().map(task).collect()),
        }
    } else {
        tasks.iter().map(task).collect()
    };

    let d = a.dim();
    let mut per_term_times = Vec::with_capacity(slots.len());
    let mut value = match v {
        None => ExpValue::Matrix(CMatrix::zeros(d, d)),
        Some(_) => ExpValue::Vector(vec![C64::new(0.0, 0.0); d]),
    };
    for slot in slots {
        let (term, dt) = slot?;
        per_term_times.push(dt);
        match (&mut value, term) {
            (ExpValue::Matrix(acc), Term::Matrix(t)) => *acc = acc.add(&t)?,
            (ExpValue::Vector(acc), Term::Vector(t)) => {
                for (x, y) in acc.iter_mut().zip(t) {
                    *x += y;
                }
            }
            _ => unreachable!("term kind follows the mode"),
        }
    }
    if c != 0.0 {
        value.scale(c.exp());
    }
    let t_para = per_term_times.iter().copied().max().unwrap_or_default();
    Ok(ExpResult {
        value,
        error_bound,
        uniform_bound,
        relative: c != 0.0,
        shift: c,
        per_term_times,
        t_para,
        t_total: start.elapsed(),
        warnings,
    })
}
