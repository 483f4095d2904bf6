//! Roots of the truncated exponential series and partial-fraction weights.
//!
//! Roots are seeded from the eigenvalues of the companion matrix of the
//! normalized polynomial `exp_n(n z)` and then refined simultaneously by
//! Aberth–Ehrlich iteration in double-double arithmetic. The weights `a_k`
//! of `1/exp_n(-z) = sum_k a_k / (z + theta_k)` follow from the roots by one
//! of three algebraically equivalent formulas.
//!
//! Tables are stored with conjugate pairs adjacent: `roots[2l]` has positive
//! imaginary part and `roots[2l + 1]` is its exact conjugate. Pairs are
//! sorted by ascending real part, then ascending imaginary part.

use std::cmp::Ordering;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ext::{ExtComplex, ExtReal};

/// Lower bound on the separation of any two roots of `exp_n`, for all n >= 2.
pub const GAMMA: f64 = 0.29044;

pub const MAX_ORDER: usize = 64;

/// Accepted backward error: `|exp_n(theta)| <= RESIDUAL_TOL * max(1, |exp_n'(theta)|)`.
pub const RESIDUAL_TOL: f64 = 1e-10;

const MAX_ABERTH_ITERATIONS: usize = 500;
const TABLE_HEADER: &str = "pfexpm-table";
const TABLE_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum CoeffMethod {
    /// `a_k = -n! / prod_{j != k} (theta_k - theta_j)`
    #[default]
    ProductFormula,
    /// `a_k = -1 / exp_n'(theta_k)`
    DerivativeFormula,
    /// `a_k = n! / theta_k^n`
    PowerFormula,
}

impl CoeffMethod {
    pub const ALL: [CoeffMethod; 3] = [
        CoeffMethod::ProductFormula,
        CoeffMethod::DerivativeFormula,
        CoeffMethod::PowerFormula,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CoeffMethod::ProductFormula => "product",
            CoeffMethod::DerivativeFormula => "derivative",
            CoeffMethod::PowerFormula => "power",
        }
    }
}

impl fmt::Display for CoeffMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoeffMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "product" => Ok(CoeffMethod::ProductFormula),
            "derivative" => Ok(CoeffMethod::DerivativeFormula),
            "power" => Ok(CoeffMethod::PowerFormula),
            other => Err(format!("unknown coefficient method '{other}'")),
        }
    }
}

/// Validated roots and weights for one even order `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct RootTable {
    n: usize,
    roots: Vec<ExtComplex>,
    coeffs: Vec<ExtComplex>,
    method: CoeffMethod,
    residual: f64,
}

impl RootTable {
    /// Assembles a table from raw parts and checks every invariant.
    pub fn from_parts(
        n: usize,
        roots: Vec<ExtComplex>,
        coeffs: Vec<ExtComplex>,
        method: CoeffMethod,
    ) -> Result<Self> {
        let mut table = Self {
            n,
            roots,
            coeffs,
            method,
            residual: f64::NAN,
        };
        table.residual = table.validate()?;
        Ok(table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn roots(&self) -> &[ExtComplex] {
        &self.roots
    }

    pub fn coeffs(&self) -> &[ExtComplex] {
        &self.coeffs
    }

    pub fn method(&self) -> CoeffMethod {
        self.method
    }

    /// Largest `|exp_n(theta_k)|` over the stored roots.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn roots_c64(&self) -> Vec<Complex64> {
        self.roots.iter().map(|z| z.to_c64()).collect()
    }

    pub fn coeffs_c64(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(|z| z.to_c64()).collect()
    }

    /// Checks all table invariants and returns the raw residual.
    fn validate(&self) -> Result<f64> {
        let n = self.n;
        check_order(n).map_err(|_| violation(format!("order n={n} out of range")))?;
        if self.roots.len() != n || self.coeffs.len() != n {
            return Err(violation(format!(
                "expected {n} roots and weights, found {} and {}",
                self.roots.len(),
                self.coeffs.len()
            )));
        }
        for (label, values) in [("root", &self.roots), ("weight", &self.coeffs)] {
            for (k, z) in values.iter().enumerate() {
                if !z.is_finite() || !z.re.is_normalized() || !z.im.is_normalized() {
                    return Err(violation(format!("{label} {k} is not a normalized finite value")));
                }
            }
        }

        for l in 0..n / 2 {
            let (up, down) = (self.roots[2 * l], self.roots[2 * l + 1]);
            if up.im.hi == 0.0 || down.im.hi == 0.0 {
                return Err(violation(format!("root {} is real", 2 * l)));
            }
            if !(up.im.hi > 0.0) || down != up.conj() {
                return Err(violation(format!("roots {} and {} are not an ordered conjugate pair", 2 * l, 2 * l + 1)));
            }
            if self.coeffs[2 * l + 1] != self.coeffs[2 * l].conj() {
                return Err(violation(format!("weights {} and {} are not conjugate", 2 * l, 2 * l + 1)));
            }
            if l > 0 && pair_order(&self.roots[2 * l - 2], &up) != Ordering::Less {
                return Err(violation(format!("pair {l} is out of order")));
            }
        }

        let one = ExtReal::ONE;
        let upper = ExtReal::from_f64(n as f64);
        for (k, z) in self.roots.iter().enumerate() {
            let r = z.norm();
            if r < one || r > upper {
                return Err(violation(format!("|theta_{k}| = {} outside [1, {n}]", r.to_f64())));
            }
            // Outside (or on) the root-free parabola y^2 < 4(x + 1).
            let margin = z.im.sqr() - (z.re + one).mul_f64(4.0);
            if margin.hi < 0.0 {
                return Err(violation(format!("theta_{k} lies inside the parabola y^2 < 4(x+1)")));
            }
        }

        let sep = min_separation(&self.roots);
        if sep < GAMMA {
            return Err(violation(format!("root separation {sep} below {GAMMA}")));
        }

        let mut residual = 0.0f64;
        for (k, z) in self.roots.iter().enumerate() {
            let p = wide::exp_trunc(n, *z).norm().to_f64();
            let scale = wide::exp_trunc(n - 1, *z).norm().to_f64().max(1.0);
            if !(p <= RESIDUAL_TOL * scale) {
                return Err(violation(format!(
                    "|exp_n(theta_{k})| = {p:e} exceeds {RESIDUAL_TOL:e} * {scale:e}"
                )));
            }
            residual = residual.max(p);
        }

        // R_n(0) = sum_k a_k / theta_k = 1.
        let mut sum = ExtComplex::ZERO;
        let mut mag = 0.0f64;
        for (a, t) in self.coeffs.iter().zip(&self.roots) {
            let term = *a / *t;
            mag += term.norm().to_f64();
            sum += term;
        }
        let dev = (sum - ExtComplex::ONE).norm().to_f64();
        if !(dev <= 1e-12 * mag.max(1.0)) {
            return Err(violation(format!("weights do not reproduce R_n(0) = 1 (deviation {dev:e})")));
        }
        Ok(residual)
    }
}

fn violation(msg: String) -> Error {
    Error::InvariantViolation(msg)
}

pub fn check_order(n: usize) -> Result<()> {
    if n < 2 || n > MAX_ORDER || n % 2 != 0 {
        Err(Error::OrderOutOfRange(n))
    } else {
        Ok(())
    }
}

fn pair_order(a: &ExtComplex, b: &ExtComplex) -> Ordering {
    a.re
        .partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.im.abs().partial_cmp(&b.im.abs()).unwrap_or(Ordering::Equal))
}

pub fn min_separation(roots: &[ExtComplex]) -> f64 {
    let mut sep = f64::INFINITY;
    for (j, a) in roots.iter().enumerate() {
        for b in &roots[j + 1..] {
            sep = sep.min((*a - *b).norm().to_f64());
        }
    }
    sep
}

/// `exp_n(z)` and `exp_n'(z) = exp_{n-1}(z)` by Horner's scheme in double-double.
pub fn exp_trunc_with_derivative(n: usize, z: ExtComplex) -> (ExtComplex, ExtComplex) {
    let coeffs = inverse_factorials(n);
    let mut p = ExtComplex::from_real(coeffs[n]);
    let mut dp = ExtComplex::ZERO;
    for c in coeffs[..n].iter().rev() {
        dp = dp * z + p;
        p = p * z + ExtComplex::from_real(*c);
    }
    (p, dp)
}

fn inverse_factorials(n: usize) -> Vec<ExtReal> {
    let mut out = Vec::with_capacity(n + 1);
    let mut c = ExtReal::ONE;
    out.push(c);
    for k in 1..=n {
        c = c.div_f64(k as f64);
        out.push(c);
    }
    out
}

/// Wide fixed-point evaluation of `exp_n` for residuals near a root, where
/// double-double Horner loses digits to cancellation.
mod wide {
    use num_bigint::BigInt;
    use num_traits::{FromPrimitive, ToPrimitive, Zero};

    use crate::ext::{ExtComplex, ExtReal};

    const FRAC_BITS: u32 = 320;

    #[derive(Clone)]
    struct Fixed {
        re: BigInt,
        im: BigInt,
    }

    fn from_f64(x: f64) -> BigInt {
        // Exact for |x| >= 2^-268; smaller parts are below the working precision.
        BigInt::from_f64(x * 2f64.powi(FRAC_BITS as i32)).unwrap_or_else(BigInt::zero)
    }

    fn from_ext(x: ExtReal) -> BigInt {
        from_f64(x.hi) + from_f64(x.lo)
    }

    fn to_ext(x: &BigInt) -> ExtReal {
        let scale = 2f64.powi(-(FRAC_BITS as i32));
        let hi = x.to_f64().unwrap_or(f64::NAN) * scale;
        let rest = x - from_f64(hi);
        ExtReal::new(hi, rest.to_f64().unwrap_or(f64::NAN) * scale)
    }

    /// `exp_n(z)` accurate to far beyond double-double, rounded back.
    pub fn exp_trunc(n: usize, z: ExtComplex) -> ExtComplex {
        let one = BigInt::from(1u8) << FRAC_BITS;
        let zr = from_ext(z.re);
        let zi = from_ext(z.im);
        let mut s = Fixed { re: one.clone(), im: BigInt::zero() };
        for k in (1..=n).rev() {
            let re = (&s.re * &zr - &s.im * &zi) >> FRAC_BITS;
            let im = (&s.re * &zi + &s.im * &zr) >> FRAC_BITS;
            let k = BigInt::from(k);
            s = Fixed { re: re / &k + &one, im: im / &k };
        }
        ExtComplex::new(to_ext(&s.re), to_ext(&s.im))
    }
}

/// Initial guesses: eigenvalues of the companion matrix of the monic
/// polynomial proportional to `exp_n(n z)`, scaled back by `n`.
fn companion_guesses(n: usize) -> Vec<Complex64> {
    let nf = n as f64;
    let ln_fact = |k: usize| (1..=k).map(|j| (j as f64).ln()).sum::<f64>();
    let ln_lead = nf * nf.ln() - ln_fact(n);
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        // monic coefficient of z^k
        let b = (k as f64 * nf.ln() - ln_fact(k) - ln_lead).exp();
        companion[(0, n - 1 - k)] = -b;
    }
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    let eig = nalgebra::linalg::Schur::try_new(companion, f64::EPSILON, 10_000)
        .map(|s| s.complex_eigenvalues());
    match eig {
        Some(values) if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => {
            values.iter().map(|z| Complex64::new(z.re, z.im) * nf).collect()
        }
        _ => (0..n)
            .map(|k| {
                let phase = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / nf;
                Complex64::from_polar(0.6 * nf, phase)
            })
            .collect(),
    }
}

fn aberth_refine(n: usize, guesses: &[Complex64]) -> Result<Vec<ExtComplex>> {
    let mut z: Vec<ExtComplex> = guesses.iter().map(|&g| g.into()).collect();
    // Nudge coincident seeds apart; Aberth needs distinct starting points.
    for k in 0..n {
        for j in 0..k {
            if (z[k] - z[j]).norm().to_f64() < 1e-8 {
                z[k] += ExtComplex::from_f64(1e-3 * (k as f64 + 1.0), 1e-3);
            }
        }
    }

    let mut best = f64::INFINITY;
    let mut stalled = 0;
    for _ in 0..MAX_ABERTH_ITERATIONS {
        let prev = z.clone();
        let mut max_rel = 0.0f64;
        for k in 0..n {
            let (p, dp) = exp_trunc_with_derivative(n, prev[k]);
            if p.re.hi == 0.0 && p.im.hi == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = ExtComplex::ZERO;
            for (j, zj) in prev.iter().enumerate() {
                if j != k {
                    repulsion += (prev[k] - *zj).recip();
                }
            }
            let step = ratio / (ExtComplex::ONE - ratio * repulsion);
            if !step.is_finite() {
                continue;
            }
            z[k] = prev[k] - step;
            max_rel = max_rel.max(step.norm().to_f64() / prev[k].norm().to_f64());
        }
        if max_rel < 1e-30 {
            break;
        }
        // Once in the asymptotic regime, stop when corrections no longer shrink:
        // they are then dominated by evaluation round-off.
        if max_rel < 0.5 * best {
            best = max_rel;
            stalled = 0;
        } else if best < 1e-10 {
            stalled += 1;
            if stalled >= 4 {
                break;
            }
        }
    }

    let mut worst = 0.0f64;
    for root in &z {
        let (p, dp) = exp_trunc_with_derivative(n, *root);
        let scaled = p.norm().to_f64() / dp.norm().to_f64().max(1.0);
        worst = worst.max(if scaled.is_nan() { f64::INFINITY } else { scaled });
    }
    if !(worst <= RESIDUAL_TOL) {
        return Err(Error::IterationLimitExceeded {
            n,
            iterations: MAX_ABERTH_ITERATIONS,
            residual: worst,
        });
    }
    Ok(z)
}

/// Roots of `exp_n` in double-double, conjugate pairs adjacent and sorted.
pub fn compute_roots(n: usize) -> Result<Vec<ExtComplex>> {
    check_order(n)?;
    let refined = aberth_refine(n, &companion_guesses(n))?;

    let (mut upper, lower): (Vec<_>, Vec<_>) = refined.into_iter().partition(|z| z.im.hi > 0.0);
    if upper.len() != n / 2 || lower.len() != n / 2 {
        return Err(violation(format!(
            "expected {} roots in each half-plane, found {} above and {} below",
            n / 2,
            upper.len(),
            lower.len()
        )));
    }
    for u in &upper {
        let mirrored = lower
            .iter()
            .map(|l| (*l - u.conj()).norm().to_f64())
            .fold(f64::INFINITY, f64::min);
        if mirrored > 1e-8 * u.norm().to_f64() {
            return Err(violation("refined roots are not closed under conjugation".into()));
        }
    }
    for u in upper.iter_mut() {
        *u = newton_polish(n, *u);
    }
    upper.sort_by(pair_order);
    Ok(upper.iter().flat_map(|u| [*u, u.conj()]).collect())
}

/// Newton steps with the residual evaluated in wide fixed point, until the
/// correction drops below the double-double resolution of the root.
fn newton_polish(n: usize, mut z: ExtComplex) -> ExtComplex {
    for _ in 0..8 {
        let step = wide::exp_trunc(n, z) / wide::exp_trunc(n - 1, z);
        if !step.is_finite() {
            break;
        }
        z -= step;
        if step.norm().to_f64() <= 1e-33 * z.norm().to_f64() {
            break;
        }
    }
    z
}

/// Partial-fraction weights for roots ordered as produced by [`compute_roots`].
pub fn compute_coeffs(roots: &[ExtComplex], method: CoeffMethod) -> Vec<ExtComplex> {
    let n = roots.len();
    let fact = ExtComplex::from_real(ExtReal::factorial(n));
    let mut out = Vec::with_capacity(n);
    for k in (0..n).step_by(2) {
        let theta = roots[k];
        let a = match method {
            CoeffMethod::ProductFormula => {
                let mut prod = ExtComplex::ONE;
                for (j, other) in roots.iter().enumerate() {
                    if j != k {
                        prod *= theta - *other;
                    }
                }
                -(fact / prod)
            }
            CoeffMethod::DerivativeFormula => {
                -wide::exp_trunc(n - 1, theta).recip()
            }
            CoeffMethod::PowerFormula => fact / theta.powi(n as u32),
        };
        out.push(a);
        out.push(a.conj());
    }
    out
}

pub fn build_table(n: usize, method: CoeffMethod) -> Result<RootTable> {
    let roots = compute_roots(n)?;
    let coeffs = compute_coeffs(&roots, method);
    RootTable::from_parts(n, roots, coeffs, method)
}

/// Process-wide cache of product-formula tables, built on first use.
pub fn cached_table(n: usize) -> Result<&'static RootTable> {
    static TABLES: [OnceLock<RootTable>; MAX_ORDER / 2] = [const { OnceLock::new() }; MAX_ORDER / 2];
    check_order(n)?;
    let cell = &TABLES[n / 2 - 1];
    if let Some(t) = cell.get() {
        return Ok(t);
    }
    let table = build_table(n, CoeffMethod::ProductFormula)?;
    Ok(cell.get_or_init(|| table))
}

fn fmt_component(x: f64) -> String {
    format!("{x:.35e}")
}

pub fn write_table<W: Write>(table: &RootTable, mut w: W) -> Result<()> {
    writeln!(w, "{TABLE_HEADER} v{TABLE_VERSION}")?;
    writeln!(w, "n={}", table.n)?;
    writeln!(w, "method={}", table.method)?;
    for (tag, values) in [("theta", &table.roots), ("a", &table.coeffs)] {
        for z in values.iter() {
            writeln!(
                w,
                "{tag} {} {} {} {}",
                fmt_component(z.re.hi),
                fmt_component(z.re.lo),
                fmt_component(z.im.hi),
                fmt_component(z.im.lo)
            )?;
        }
    }
    Ok(())
}

pub fn read_table<R: Read>(r: R) -> Result<RootTable> {
    let mut lines = BufReader::new(r)
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, Ok(l))) => Ok((i, l.trim().to_string())),
            Some((_, Err(e))) => Err(e.into()),
            None => Err(Error::Parse {
                line: 0,
                msg: format!("unexpected end of file, expected {what}"),
            }),
        }
    };
    let parse_err = |line: usize, msg: String| Error::Parse { line, msg };

    let (ln, header) = next("header")?;
    let version = header
        .strip_prefix(TABLE_HEADER)
        .and_then(|rest| rest.trim().strip_prefix('v'))
        .ok_or_else(|| parse_err(ln, format!("bad header '{header}'")))?;
    match version.parse::<u32>() {
        Ok(TABLE_VERSION) => {}
        _ => return Err(parse_err(ln, format!("unsupported table version '{version}'"))),
    }

    let (ln, nline) = next("n=")?;
    let n: usize = nline
        .strip_prefix("n=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| parse_err(ln, format!("bad order line '{nline}'")))?;
    if n > MAX_ORDER {
        return Err(parse_err(ln, format!("order {n} exceeds {MAX_ORDER}")));
    }
    let (ln, mline) = next("method=")?;
    let method: CoeffMethod = mline
        .strip_prefix("method=")
        .ok_or_else(|| parse_err(ln, format!("bad method line '{mline}'")))?
        .parse()
        .map_err(|e| parse_err(ln, e))?;

    let mut read_values = |tag: &str| -> Result<Vec<ExtComplex>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, line) = next(tag)?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(tag) {
                return Err(parse_err(ln, format!("expected '{tag}' record")));
            }
            let nums: Vec<f64> = parts
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(ln, e.to_string()))?;
            if nums.len() != 4 {
                return Err(parse_err(ln, format!("expected 4 components, found {}", nums.len())));
            }
            out.push(ExtComplex::new(
                ExtReal::from_parts(nums[0], nums[1]),
                ExtReal::from_parts(nums[2], nums[3]),
            ));
        }
        Ok(out)
    };
    let roots = read_values("theta")?;
    let coeffs = read_values("a")?;
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after table".into()));
    }
    RootTable::from_parts(n, roots, coeffs, method)
}

/// Conventional file name of the order-`n` table inside a table directory.
pub fn table_file_name(n: usize) -> String {
    format!("table_n{n:02}.txt")
}

pub fn save_table(table: &RootTable, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_table(table, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_table(path: impl AsRef<Path>) -> Result<RootTable> {
    read_table(fs::File::open(path)?)
}

/// Root-location diagnostics against the known exclusion regions.
#[derive(Clone, Debug, PartialEq)]
pub struct ExclusionReport {
    /// True when no root satisfies `Im^2 < 4 (Re + 1)`.
    pub parabola_ok: bool,
    /// `min_k Im(theta_k)^2 - 4 (Re(theta_k) + 1)`.
    pub parabola_margin: f64,
    /// `max_k | |w e^{1-w}| - 1 |` over normalized roots `w = theta / n`.
    pub szego_max_deviation: f64,
    /// The same deviation for the root nearest the curve.
    pub szego_min_deviation: f64,
}

pub fn check_exclusion_regions(table: &RootTable) -> ExclusionReport {
    let n = table.n as f64;
    let mut margin = f64::INFINITY;
    let mut dmax = 0.0f64;
    let mut dmin = f64::INFINITY;
    for z in table.roots_c64() {
        margin = margin.min(z.im * z.im - 4.0 * (z.re + 1.0));
        let w = z / n;
        let dev = (w.norm() * (1.0 - w.re).exp() - 1.0).abs();
        dmax = dmax.max(dev);
        dmin = dmin.min(dev);
    }
    ExclusionReport {
        parabola_ok: margin >= 0.0,
        parabola_margin: margin,
        szego_max_deviation: dmax,
        szego_min_deviation: dmin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(z: ExtComplex, re: f64, im: f64, tol: f64) -> bool {
        (z - ExtComplex::from_f64(re, im)).norm().to_f64() <= tol
    }

    #[test]
    fn order_two_roots_by_quadratic_formula() {
        let roots = compute_roots(2).unwrap();
        assert_eq!(roots.len(), 2);
        assert!(close(roots[0], -1.0, 1.0, 1e-30));
        assert!(close(roots[1], -1.0, -1.0, 1e-30));
        let r = roots[0].norm().to_f64();
        assert!((r - 2f64.sqrt()).abs() < 1e-15 && (1.0..=2.0).contains(&r));
    }

    #[test]
    fn order_two_weights_by_hand() {
        let roots = compute_roots(2).unwrap();
        for method in [CoeffMethod::ProductFormula, CoeffMethod::PowerFormula, CoeffMethod::DerivativeFormula] {
            let a = compute_coeffs(&roots, method);
            assert!(close(a[0], 0.0, 1.0, 1e-30), "{method}: {:?}", a[0]);
            assert!(close(a[1], 0.0, -1.0, 1e-30), "{method}");
        }
    }

    #[test]
    fn odd_and_out_of_range_orders_rejected() {
        for n in [0, 1, 3, 63, 65, 66] {
            assert!(matches!(build_table(n, CoeffMethod::ProductFormula), Err(Error::OrderOutOfRange(m)) if m == n));
        }
    }

    #[test]
    fn order_four_table() {
        let t = build_table(4, CoeffMethod::ProductFormula).unwrap();
        assert_eq!(t.roots().len(), 4);
        assert!(t.residual() < 1e-10);
        assert_eq!(t.roots()[1], t.roots()[0].conj());
        assert_eq!(t.roots()[3], t.roots()[2].conj());
    }

    #[test]
    fn weights_reproduce_unit_value_at_origin() {
        for n in [2, 6, 12, 24] {
            let t = build_table(n, CoeffMethod::ProductFormula).unwrap();
            let s = t
                .coeffs()
                .iter()
                .zip(t.roots())
                .fold(ExtComplex::ZERO, |acc, (a, th)| acc + *a / *th);
            assert!((s - ExtComplex::ONE).norm().to_f64() < 1e-24, "n={n}");
        }
    }

    #[test]
    fn build_is_bit_deterministic() {
        let a = build_table(20, CoeffMethod::ProductFormula).unwrap();
        let b = build_table(20, CoeffMethod::ProductFormula).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let t = build_table(8, CoeffMethod::ProductFormula).unwrap();
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        let back = read_table(&buf[..]).unwrap();
        assert_eq!(back, t);
        for (a, b) in back.roots().iter().zip(t.roots()) {
            assert_eq!(a.re.hi.to_bits(), b.re.hi.to_bits());
            assert_eq!(a.re.lo.to_bits(), b.re.lo.to_bits());
            assert_eq!(a.im.hi.to_bits(), b.im.hi.to_bits());
            assert_eq!(a.im.lo.to_bits(), b.im.lo.to_bits());
        }
    }

    #[test]
    fn written_components_carry_36_digits() {
        let t = build_table(2, CoeffMethod::ProductFormula).unwrap();
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().find(|l| l.starts_with("theta")).unwrap();
        let first = line.split_whitespace().nth(1).unwrap();
        let mantissa = first.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 36);
    }

    fn tampered(edit: impl Fn(&str) -> String) -> Result<RootTable> {
        let t = build_table(8, CoeffMethod::ProductFormula).unwrap();
        let mut buf = Vec::new();
        write_table(&t, &mut buf).unwrap();
        read_table(edit(&String::from_utf8(buf).unwrap()).as_bytes())
    }

    #[test]
    fn injected_real_root_is_rejected() {
        let err = tampered(|s| {
            let mut out = Vec::new();
            let mut done = false;
            for line in s.lines() {
                if !done && line.starts_with("theta") {
                    let f: Vec<&str> = line.split_whitespace().collect();
                    out.push(format!("theta {} {} 0 0", f[1], f[2]));
                    done = true;
                } else {
                    out.push(line.to_string());
                }
            }
            out.join("\n")
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvariantViolation(_)), "{err}");
    }

    #[test]
    fn wrong_version_is_parse_error() {
        let err = tampered(|s| s.replacen("pfexpm-table v1", "pfexpm-table v2", 1)).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn perturbed_weight_is_rejected() {
        let err = tampered(|s| {
            s.lines()
                .map(|l| {
                    if l.starts_with("a ") {
                        l.replacen("a ", "a 1", 1)
                    } else {
                        l.to_string()
                    }
                })
                .collect::<Vec<_>>()
                .join("\n")
        })
        .unwrap_err();
        assert!(matches!(err, Error::InvariantViolation(_) | Error::Parse { .. }), "{err}");
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let err = tampered(|s| s.lines().take(6).collect::<Vec<_>>().join("\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn parabola_and_szego_diagnostics() {
        let t16 = cached_table(16).unwrap();
        let t64 = cached_table(64).unwrap();
        let r16 = check_exclusion_regions(t16);
        let r64 = check_exclusion_regions(t64);
        assert!(r16.parabola_ok && r64.parabola_ok);
        assert!(r64.szego_min_deviation < r16.szego_min_deviation);
        let r2 = check_exclusion_regions(cached_table(2).unwrap());
        assert!(r2.szego_max_deviation.is_finite());
    }

    #[test]
    fn method_names_round_trip() {
        for m in CoeffMethod::ALL {
            assert_eq!(m.name().parse::<CoeffMethod>().unwrap(), m);
        }
        assert!("quadratic".parse::<CoeffMethod>().is_err());
    }

    fn ext(hi: f64, lo: f64) -> ExtReal {
        ExtReal::from_parts(hi, lo)
    }

    fn rel_gap(z: ExtComplex, re: ExtReal, im: ExtReal) -> f64 {
        let want = ExtComplex::new(re, im);
        ((z - want).norm() / want.norm()).to_f64()
    }

    // Reference values from 60-digit polynomial root finding, split into hi/lo doubles.
    #[test]
    fn extended_precision_reference_values() {
        type Entry = (usize, usize, [(f64, f64); 2], [(f64, f64); 2]);
        let cases: [Entry; 4] = [
            (16, 0,
             [(-5.286317803783073, 2.499882951355917e-16), (0.7569436204826843, 8.221653462159506e-18)],
             [(-30.98340727632989, -9.641669228775477e-16), (36.43121038603476, -1.3116079692835701e-15)]),
            (16, 14,
             [(7.726102196653032, -3.786808813233801e-16), (7.9245918750734985, -3.0321874776557397e-16)],
             [(0.00040435304202420024, -4.070351857324261e-21), (-8.319168660991696e-05, -6.455576070086479e-21)]),
            (32, 0,
             [(-9.8232614422834, 3.6667161107317866e-16), (0.7255018312979763, -4.7685328998838384e-17)],
             [(-3026.422948385253, 1.145189271396811e-13), (3008.931081856959, -1.702493517680806e-13)]),
            (32, 30,
             [(20.505511620161634, -1.4522520765433418e-15), (12.520033493962917, -7.12980316709993e-16)],
             [(4.4900852265322876e-10, 1.3913561614851153e-26), (1.6730952186035977e-09, 6.2916190700270895e-27)]),
        ];
        for (n, idx, theta, a) in cases {
            for method in CoeffMethod::ALL {
                let t = build_table(n, method).unwrap();
                let gr = rel_gap(t.roots()[idx], ext(theta[0].0, theta[0].1), ext(theta[1].0, theta[1].1));
                let ga = rel_gap(t.coeffs()[idx], ext(a[0].0, a[0].1), ext(a[1].0, a[1].1));
                assert!(gr < 1e-28, "n={n} idx={idx} root gap {gr:e}");
                assert!(ga < 1e-27, "n={n} idx={idx} {method} weight gap {ga:e}");
                assert_eq!(t.roots()[idx + 1], t.roots()[idx].conj());
            }
        }
    }
}
