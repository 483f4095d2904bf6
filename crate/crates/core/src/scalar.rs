//! Scalar evaluation of `R_n(z) = 1 / exp_n(-z)`.
//!
//! Two evaluation routes are provided: the reciprocal of the truncated
//! series, and the partial-fraction sum over the roots of `exp_n`. Their
//! difference, together with the distance of each to the true exponential,
//! forms the error budget `(e1, e2, e3)`. The a priori bounds `M1(n) = 2^-n`
//! (truncation, valid on the negative half-line) and `M2(n, D)` (round-off
//! of a `D`-digit table) bracket those errors.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ext::{ExtComplex, ExtReal};
use crate::rootgen::{self, RootTable, GAMMA};

/// `exp_n(z) = sum_{k=0}^n z^k / k!` by the backward recurrence
/// `s <- 1 + s z / k`, `k = n, ..., 1`.
pub fn exp_trunc(n: usize, z: Complex64) -> Complex64 {
    let mut s = Complex64::new(1.0, 0.0);
    for k in (1..=n).rev() {
        s = s * z / k as f64 + 1.0;
    }
    s
}

pub fn exp_trunc_real(n: usize, x: f64) -> f64 {
    let mut s = 1.0;
    for k in (1..=n).rev() {
        s = 1.0 + s * x / k as f64;
    }
    s
}

pub fn exp_trunc_ext(n: usize, z: ExtComplex) -> ExtComplex {
    let mut s = ExtComplex::ONE;
    for k in (1..=n).rev() {
        s = (s * z).div_f64(k as f64) + ExtComplex::ONE;
    }
    s
}

pub fn eval_reciprocal(n: usize, z: Complex64) -> Result<Complex64> {
    let d = exp_trunc(n, -z);
    let r = d.inv();
    if (d.re == 0.0 && d.im == 0.0) || !r.re.is_finite() || !r.im.is_finite() {
        return Err(Error::PoleHit);
    }
    Ok(r)
}

/// `R_n(x)` for real `x`; for even `n` the denominator is positive.
pub fn eval_reciprocal_real(n: usize, x: f64) -> f64 {
    1.0 / exp_trunc_real(n, -x)
}

pub fn eval_reciprocal_ext(n: usize, z: ExtComplex) -> Result<ExtComplex> {
    let d = exp_trunc_ext(n, -z);
    if d.re.hi == 0.0 && d.im.hi == 0.0 {
        return Err(Error::PoleHit);
    }
    Ok(d.recip())
}

/// Partial-fraction sum evaluated entirely in double-double, straight from a table.
pub fn eval_pf_ext(table: &RootTable, z: ExtComplex) -> Result<ExtComplex> {
    let mut sum = ExtComplex::ZERO;
    for (a, theta) in table.coeffs().iter().zip(table.roots()) {
        let den = z + *theta;
        if den.re.hi == 0.0 && den.im.hi == 0.0 {
            return Err(Error::PoleHit);
        }
        sum += *a / den;
    }
    Ok(sum)
}

/// Summation used for the real-argument fast path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Summation {
    /// Sequential, ascending pair index.
    #[default]
    Plain,
    /// Kahan–Babuška (Neumaier) compensated sum, same order.
    Compensated,
}

/// Binary64 working copy of a [`RootTable`].
#[derive(Clone, Debug, PartialEq)]
pub struct PartialFraction {
    n: usize,
    roots: Vec<Complex64>,
    coeffs: Vec<Complex64>,
    pairs: Vec<usize>,
}

impl PartialFraction {
    pub fn from_table(table: &RootTable) -> Result<Self> {
        let n = table.n();
        let pf = Self {
            n,
            roots: table.roots_c64(),
            coeffs: table.coeffs_c64(),
            pairs: (0..n).step_by(2).collect(),
        };
        for &k in &pf.pairs {
            if pf.roots[k + 1] != pf.roots[k].conj() || pf.coeffs[k + 1] != pf.coeffs[k].conj() {
                return Err(Error::InvariantViolation(format!("pair {k} is not conjugate after rounding")));
            }
        }
        let dev = (pf.eval_real(0.0) - 1.0).abs();
        let allowed = pf.origin_tolerance();
        if !(dev <= allowed) {
            return Err(Error::InvariantViolation(format!(
                "R_n(0) = 1 + {dev:e} after rounding, allowed {allowed:e}"
            )));
        }
        Ok(pf)
    }

    /// Working copy of the cached product-formula table of order `n`.
    pub fn for_order(n: usize) -> Result<Self> {
        Self::from_table(rootgen::cached_table(n)?)
    }

    /// Copy with roots and weights rounded to `digits` significant decimal
    /// digits. From 16 digits on the binary64 table is returned unchanged.
    pub fn with_digits(&self, digits: u32) -> Self {
        if digits >= 16 {
            return self.clone();
        }
        let round = |x: f64| -> f64 {
            if x == 0.0 || digits == 0 {
                return x;
            }
            format!("{:.*e}", digits as usize - 1, x).parse().expect("formatted float")
        };
        let round_c = |z: &Complex64| Complex64::new(round(z.re), round(z.im));
        Self {
            n: self.n,
            roots: self.roots.iter().map(round_c).collect(),
            coeffs: self.coeffs.iter().map(round_c).collect(),
            pairs: self.pairs.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Index of the upper-half-plane member of each conjugate pair.
    pub fn pairs(&self) -> &[usize] {
        &self.pairs
    }

    pub fn abs_coeff_sum(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).sum()
    }

    /// Allowed `|R_n(0) - 1|` for the rounded table: `8 n eps`, widened to
    /// the round-off bound `M2(n, 16)` once the weights grow past it.
    pub fn origin_tolerance(&self) -> f64 {
        let tight = 8.0 * self.n as f64 * f64::EPSILON;
        let m2 = DigitModel::default().m2(self.n as u64, self.abs_coeff_sum()).unwrap_or(0.0);
        tight.max(m2)
    }

    /// `sum_k a_k / (z + theta_k)` in ascending index order.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 {
            return Ok(Complex64::new(self.eval_real(z.re), 0.0));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for (a, theta) in self.coeffs.iter().zip(&self.roots) {
            let den = z + theta;
            if den.norm() < f64::MIN_POSITIVE {
                return Err(Error::PoleHit);
            }
            sum += a / den;
        }
        Ok(sum)
    }

    /// Real-argument path: `sum_l 2 Re(a_{2l} / (x + theta_{2l}))`.
    pub fn eval_real(&self, x: f64) -> f64 {
        self.eval_real_with(x, Summation::Plain)
    }

    pub fn eval_real_with(&self, x: f64, summation: Summation) -> f64 {
        let terms = self.pairs.iter().map(|&k| {
            let t = self.coeffs[k] * (self.roots[k] + x).inv();
            2.0 * t.re
        });
        match summation {
            Summation::Plain => terms.fold(0.0, |acc, t| acc + t),
            Summation::Compensated => {
                let (mut sum, mut comp) = (0.0f64, 0.0f64);
                for t in terms {
                    let s = sum + t;
                    comp += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
                    sum = s;
                }
                sum + comp
            }
        }
    }
}

pub fn eval_pf(pf: &PartialFraction, z: Complex64) -> Result<Complex64> {
    pf.eval(z)
}

/// `M1(n) = 2^-n`, exact.
pub fn bound_m1(n: usize) -> f64 {
    assert!(n >= 1 && n <= 1022, "bound_m1 requires 1 <= n <= 1022");
    f64::from_bits(((1023 - n) as u64) << 52)
}

/// `R_n(-rho) - exp(-rho)` for `rho >= 0`, computed as
/// `exp(-rho) * (sum_{k>n} rho^k / k!) / exp_n(rho)` to avoid cancellation.
pub fn truncation_gap(n: usize, rho: f64) -> f64 {
    assert!(rho >= 0.0 && rho.is_finite(), "truncation_gap needs finite rho >= 0");
    if rho == 0.0 {
        return 0.0;
    }
    let mut term = 1.0f64;
    for k in 1..=n + 1 {
        term *= rho / k as f64;
    }
    let mut tail = 0.0;
    let mut k = n + 1;
    while term > f64::EPSILON * 1e-3 * tail || (k as f64) <= rho {
        tail += term;
        k += 1;
        term *= rho / k as f64;
        if term == 0.0 {
            break;
        }
    }
    (-rho).exp() * tail / exp_trunc_real(n, rho)
}

/// Decimal digit model for the round-off bound of a rounded table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DigitModel {
    pub digits: u32,
    pub gamma: f64,
}

impl Default for DigitModel {
    fn default() -> Self {
        Self::new(16)
    }
}

impl DigitModel {
    pub fn new(digits: u32) -> Self {
        Self { digits, gamma: GAMMA }
    }

    /// Relative perturbation of a `D`-digit value: `10^(1-D)`.
    pub fn unit(&self) -> f64 {
        10f64.powi(1 - self.digits as i32)
    }

    /// `gamma > n 10^(1-D)`.
    pub fn check(&self, n: u64) -> Result<()> {
        if self.gamma > n as f64 * self.unit() {
            Ok(())
        } else {
            Err(Error::ConditionViolated { n, digits: self.digits })
        }
    }

    pub fn c1(&self) -> f64 {
        let u = self.unit();
        2.0 * u / (self.gamma * (1.0 - u))
    }

    pub fn c2(&self, n: u64) -> Result<f64> {
        self.check(n)?;
        let nu = n as f64 * self.unit();
        Ok(4.0 * nu / (self.gamma * (self.gamma - nu)))
    }

    /// `(C1 + C2) * sum_k |a_k|`.
    pub fn m2(&self, n: u64, abs_coeff_sum: f64) -> Result<f64> {
        Ok((self.c1() + self.c2(n)?) * abs_coeff_sum)
    }
}

pub fn bound_m2(pf: &PartialFraction, digits: u32) -> Result<f64> {
    DigitModel::new(digits).m2(pf.n() as u64, pf.abs_coeff_sum())
}

/// Decomposition of the error at one real point `x <= 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorBudget {
    pub n: usize,
    pub x: f64,
    pub digits: u32,
    /// `|exp(x) - pf(x)|`
    pub e1: f64,
    /// `|exp(x) - R_n(x)|`
    pub e2: f64,
    /// `|R_n(x) - pf(x)|`
    pub e3: f64,
    pub m1: f64,
    pub m2: f64,
}

pub fn error_budget(pf: &PartialFraction, x: f64, digits: u32) -> Result<ErrorBudget> {
    if !(x <= 0.0) {
        return Err(Error::InvariantViolation(format!("error budget needs x <= 0, got {x}")));
    }
    let n = pf.n();
    let m2 = bound_m2(pf, digits)?;
    let exact = x.exp();
    let rec = eval_reciprocal_real(n, x);
    let part = pf.eval_real(x);
    Ok(ErrorBudget {
        n,
        x,
        digits,
        e1: (exact - part).abs(),
        e2: (exact - rec).abs(),
        e3: (rec - part).abs(),
        m1: bound_m1(n),
        m2,
    })
}

/// Uniform norms `(max e1, max e2, max e3)` over a grid of points `<= 0`.
pub fn uniform_errors(pf: &PartialFraction, grid: &[f64]) -> (f64, f64, f64) {
    let n = pf.n();
    grid.iter().fold((0.0, 0.0, 0.0), |(m1, m2, m3), &x| {
        let exact = x.exp();
        let rec = eval_reciprocal_real(n, x);
        let part = pf.eval_real(x);
        (
            f64::max(m1, (exact - part).abs()),
            f64::max(m2, (exact - rec).abs()),
            f64::max(m3, (rec - part).abs()),
        )
    })
}

/// `count` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let h = (hi - lo) / (count - 1) as f64;
            (0..count)
                .map(|i| if i == count - 1 { hi } else { lo + h * i as f64 })
                .collect()
        }
    }
}

/// Taylor coefficients of `R_n` at the origin.
///
/// `c_m = -sum_{j=1}^{min(m,n)} d_j c_{m-j}` with `d_j = (-1)^j / j!`. Scaled
/// by `m!` this becomes the integer recurrence
/// `lambda_m = -sum_j (-1)^j C(m, j) lambda_{m-j}`, which is run exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesCoefficients {
    pub n: usize,
    /// `c_0 ..= c_K`
    pub c: Vec<f64>,
    /// `lambda_m = m! c_m`, exact
    pub lambda: Vec<BigInt>,
}

impl SeriesCoefficients {
    pub fn lambda_f64(&self, m: usize) -> f64 {
        self.lambda[m].to_f64().unwrap_or(f64::NAN)
    }

    /// True when `m! c_m = 1` for every computed `m <= n`.
    pub fn matches_exp_through_order_n(&self) -> bool {
        self.lambda.iter().take(self.n + 1).all(|l| l.is_one())
    }
}

pub fn series_coefficients(n: usize, k: usize) -> SeriesCoefficients {
    let mut lambda: Vec<BigInt> = Vec::with_capacity(k + 1);
    lambda.push(BigInt::one());
    for m in 1..=k {
        let mut acc = BigInt::zero();
        let mut binom = BigInt::one();
        for j in 1..=m.min(n) {
            binom = binom * BigInt::from(m - j + 1) / BigInt::from(j);
            let term = &binom * &lambda[m - j];
            if j % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        lambda.push(acc);
    }
    let mut fact = BigInt::one();
    let c = lambda
        .iter()
        .enumerate()
        .map(|(m, l)| {
            if m > 0 {
                fact *= BigInt::from(m);
            }
            ratio_to_f64(l, &fact)
        })
        .collect();
    let out = SeriesCoefficients { n, c, lambda };
    assert!(out.matches_exp_through_order_n(), "Pade property failed for n={n}");
    out
}

fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    // Shift so both fit comfortably in binary64 before dividing.
    let shift = den.bits().saturating_sub(900).max(num.bits().saturating_sub(900));
    let a = (num >> shift).to_f64().unwrap_or(f64::NAN);
    let b = (den >> shift).to_f64().unwrap_or(f64::NAN);
    a / b
}

/// `err_n(x) = R_n(x) - exp(x)`, positive for `x < 0`.
pub fn err_n(n: usize, x: f64) -> f64 {
    eval_reciprocal_real(n, x) - x.exp()
}

/// Location and value of the maximum of `err_n` on the negative half-line.
///
/// The maximizer lies in `[-(n+2), -n/2]` and `err_n` is unimodal there, so a
/// golden-section search on that bracket converges to it.
pub fn err_max_location(n: usize, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (-(n as f64 + 2.0), -(n as f64) / 2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (err_n(n, c), err_n(n, d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = err_n(n, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = err_n(n, d);
        }
    }
    let xi = 0.5 * (a + b);
    (xi, err_n(n, xi))
}

/// `f_n(x) = exp_n(x) exp(-x)`.
pub fn f_n(n: usize, x: f64) -> f64 {
    exp_trunc_real(n, x) * (-x).exp()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FnInequalityReport {
    pub n: usize,
    pub f_at_n_plus_1: f64,
    /// `f_n(n+1) < 1/2`
    pub half_ok: bool,
    /// `f_n(x)^2 <= (n+1)/n f_{n-1}(x) f_{n+1}(x)` at every sample
    pub cauchy_schwarz_ok: bool,
    /// Smallest relative margin `(rhs - lhs) / rhs` over the samples.
    pub worst_margin: f64,
    pub failures: Vec<f64>,
}

pub fn check_fn_inequalities(n: usize, xs: &[f64]) -> FnInequalityReport {
    assert!(n >= 1);
    let f_at = f_n(n, n as f64 + 1.0);
    let ratio = (n as f64 + 1.0) / n as f64;
    let mut worst = f64::INFINITY;
    let mut failures = Vec::new();
    for &x in xs {
        let lhs = f_n(n, x).powi(2);
        let rhs = ratio * f_n(n - 1, x) * f_n(n + 1, x);
        let margin = (rhs - lhs) / rhs;
        worst = worst.min(margin);
        if !(lhs <= rhs) {
            failures.push(x);
        }
    }
    FnInequalityReport {
        n,
        f_at_n_plus_1: f_at,
        half_ok: f_at < 0.5,
        cauchy_schwarz_ok: failures.is_empty(),
        worst_margin: worst,
        failures,
    }
}

/// Evaluates both routes in double-double at a real point.
pub fn ext_route_gap(table: &RootTable, x: f64) -> Result<f64> {
    let z = ExtComplex::from_real(ExtReal::from_f64(x));
    let pf = eval_pf_ext(table, z)?;
    let rec = eval_reciprocal_ext(table.n(), z)?;
    Ok((pf - rec).norm().to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_series_hand_values() {
        for n in [0, 1, 5, 40] {
            assert_eq!(exp_trunc(n, Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
        }
        assert_eq!(exp_trunc(2, Complex64::new(-1.0, 0.0)), Complex64::new(0.5, 0.0));
        assert_eq!(exp_trunc(2, Complex64::new(-1.0, 1.0)), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn reciprocal_hand_values() {
        assert_eq!(eval_reciprocal(4, Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(1.0, 0.0));
        let r = eval_reciprocal(4, Complex64::new(-1.0, 0.0)).unwrap();
        assert!((r.re - 24.0 / 65.0).abs() < 1e-16 && r.im == 0.0);
        assert!(matches!(eval_reciprocal(2, Complex64::new(1.0, -1.0)), Err(Error::PoleHit)));
    }

    #[test]
    fn order_two_partial_fraction_at_origin() {
        let pf = PartialFraction::for_order(2).unwrap();
        assert_eq!(pf.pairs(), &[0]);
        assert!((pf.eval_real(0.0) - 1.0).abs() <= 2.0 * f64::EPSILON);
        let general: Complex64 = pf
            .coeffs()
            .iter()
            .zip(pf.roots())
            .map(|(a, t)| a / t)
            .sum();
        assert!((general - 1.0).norm() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn origin_within_eight_n_eps_for_small_orders() {
        for n in (2..=16).step_by(2) {
            let pf = PartialFraction::for_order(n).unwrap();
            assert!((pf.eval_real(0.0) - 1.0).abs() <= 8.0 * n as f64 * f64::EPSILON, "n={n}");
        }
    }

    #[test]
    fn real_argument_gives_exactly_real_result() {
        let pf = PartialFraction::for_order(12).unwrap();
        for x in [-7.5, -1.0, 0.0, 3.0] {
            assert_eq!(pf.eval(Complex64::new(x, 0.0)).unwrap().im, 0.0);
        }
    }

    #[test]
    fn pole_detected_in_general_path() {
        let pf = PartialFraction::for_order(2).unwrap();
        let z = -pf.roots()[0];
        assert!(matches!(pf.eval(z), Err(Error::PoleHit)));
    }

    #[test]
    fn complex_path_agrees_with_reciprocal() {
        let pf = PartialFraction::for_order(10).unwrap();
        let z = Complex64::new(-2.0, 0.7);
        let a = pf.eval(z).unwrap();
        let b = eval_reciprocal(10, z).unwrap();
        assert!((a - b).norm() < 1e-13);
    }

    #[test]
    fn pf_matches_reciprocal_at_minus_five_within_m2() {
        let pf = PartialFraction::for_order(16).unwrap();
        let gap = (pf.eval_real(-5.0) - eval_reciprocal_real(16, -5.0)).abs();
        assert!(gap <= bound_m2(&pf, 16).unwrap());
    }

    #[test]
    fn truncation_gap_reference_values() {
        let cases = [
            (4, 1.0, 0.0013513280593269091737),
            (16, 4.0, 2.0748556714665977778e-8),
            (32, 4.0, 3.2290791312843633657e-21),
            (32, 20.0, 9.7902328704509031196e-12),
            (64, 20.0, 2.7191848282416016828e-24),
        ];
        for (n, rho, want) in cases {
            let got = truncation_gap(n, rho);
            assert!((got / want - 1.0).abs() < 1e-13, "n={n} rho={rho}: {got:e}");
        }
        assert_eq!(truncation_gap(8, 0.0), 0.0);
    }

    #[test]
    fn rounded_table_stays_within_m2() {
        let pf = PartialFraction::for_order(16).unwrap();
        assert_eq!(pf.with_digits(16), pf);
        let coarse = pf.with_digits(8);
        assert_eq!(coarse.roots()[1], coarse.roots()[0].conj());
        let m2 = bound_m2(&pf, 8).unwrap();
        for x in linspace(-40.0, 0.0, 400) {
            assert!((coarse.eval_real(x) - eval_reciprocal_real(16, x)).abs() <= m2);
        }
        assert!((coarse.eval_real(-3.0) - pf.eval_real(-3.0)).abs() > 1e-12);
    }

    #[test]
    fn m1_values() {
        assert_eq!(bound_m1(8), 0.00390625);
        assert_eq!(bound_m1(1), 0.5);
        assert_eq!(bound_m1(32), 2f64.powi(-32));
        assert!((bound_m1(32) - 2.3283e-10).abs() < 1e-14);
    }

    #[test]
    fn c1_hand_value() {
        let c1 = DigitModel::new(16).c1();
        let hand = 2e-15 / (0.29044 * (1.0 - 1e-15));
        assert!((c1 - hand).abs() <= 1e-15 * hand);
        assert!((c1 - 6.8861e-15).abs() < 1e-19);
    }

    #[test]
    fn condition_violated_for_huge_order() {
        let model = DigitModel::new(16);
        assert!(model.check(10_000_000_000).is_ok());
        assert!(matches!(
            model.c2(10_000_000_000_000_000),
            Err(Error::ConditionViolated { digits: 16, .. })
        ));
    }

    #[test]
    fn budget_at_origin_and_minus_one() {
        let pf8 = PartialFraction::for_order(8).unwrap();
        let b = error_budget(&pf8, 0.0, 16).unwrap();
        assert!(b.e2 <= f64::EPSILON);
        assert_eq!(b.m1, 0.00390625);

        let pf4 = PartialFraction::for_order(4).unwrap();
        let b = error_budget(&pf4, -1.0, 16).unwrap();
        let hand = 24.0 / 65.0 - (-1.0f64).exp();
        assert!((b.e2 - hand).abs() < 1e-16);
        assert!((b.e2 - 1.351328e-3).abs() < 1e-9);
        assert!(b.e2 <= b.m1);
        assert!(error_budget(&pf4, 0.5, 16).is_err());
    }

    #[test]
    fn series_order_two_by_hand() {
        let s = series_coefficients(2, 4);
        let expect = [1.0, 1.0, 0.5, 0.0, -0.25];
        for (c, e) in s.c.iter().zip(expect) {
            assert_eq!(*c, e);
        }
        assert_eq!(s.lambda[4], BigInt::from(-6));
    }

    #[test]
    fn series_order_four() {
        let s = series_coefficients(4, 6);
        assert!(s.lambda[5].is_zero());
        assert_eq!(s.lambda[6], BigInt::from(-10));
    }

    #[test]
    fn series_order_eight_matches_exp() {
        let s = series_coefficients(8, 8);
        let mut fact = 1.0;
        for (m, c) in s.c.iter().enumerate() {
            if m > 0 {
                fact *= m as f64;
            }
            assert!((c * fact - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn golden_section_stays_in_bracket() {
        let (xi, e) = err_max_location(4, 1e-10);
        assert!((-6.0..=-2.0).contains(&xi));
        assert!(e > 0.0);
        let (xi, _) = err_max_location(32, 1e-10);
        assert!((-34.0..=-16.0).contains(&xi));
    }

    #[test]
    fn extremum_matches_dense_grid() {
        let (_, e) = err_max_location(4, 1e-12);
        let grid_max = linspace(-20.0, 0.0, 100_000)
            .into_iter()
            .map(|x| err_n(4, x))
            .fold(f64::MIN, f64::max);
        assert!(e >= grid_max - 1e-15);
        assert!(e - grid_max <= 1e-10);
    }

    #[test]
    fn fn_inequalities_hold() {
        assert!(check_fn_inequalities(4, &[]).f_at_n_plus_1 < 0.5);
        let r = check_fn_inequalities(2, &[0.0]);
        assert!(r.half_ok && r.cauchy_schwarz_ok);
        assert!((f_n(2, 0.0) - 1.0).abs() == 0.0);
        let r = check_fn_inequalities(10, &linspace(0.0, 30.0, 100));
        assert!(r.cauchy_schwarz_ok && r.worst_margin > 0.0);
    }

    #[test]
    fn compensated_sum_close_to_plain() {
        let pf = PartialFraction::for_order(24).unwrap();
        for x in linspace(-60.0, 0.0, 50) {
            let p = pf.eval_real_with(x, Summation::Plain);
            let c = pf.eval_real_with(x, Summation::Compensated);
            assert!((p - c).abs() <= bound_m2(&pf, 16).unwrap());
        }
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(-100.0, 0.0, 10_000);
        assert_eq!(g.len(), 10_000);
        assert_eq!(g[0], -100.0);
        assert_eq!(g[9_999], 0.0);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }
}
