//! Double-double arithmetic.
//!
//! [`ExtReal`] stores a value as the unevaluated sum `hi + lo` of two binary64
//! numbers, which gives roughly 32 significant decimal digits. All operations
//! are built from the error-free transformations `two_sum` and `two_prod`
//! and keep the pair normalized: `hi` is the binary64 nearest to `hi + lo`.
//! [`ExtComplex`] is the Cartesian complex type over it.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    let e = (a - (s - v)) + (b - v);
    (s, e)
}

/// Requires `|a| >= |b|` (or `a == 0`).
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExtReal {
    pub hi: f64,
    pub lo: f64,
}

impl ExtReal {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };

    /// Builds a normalized value from an arbitrary pair.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    /// Reassembles stored components without renormalizing.
    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn is_normalized(self) -> bool {
        let (s, _) = two_sum(self.hi, self.lo);
        s == self.hi
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Self::ZERO;
        }
        let x = self.hi.sqrt();
        let xx = Self::from_f64(x).sqr();
        let corr = (self - xx).hi / (2.0 * x);
        let (hi, lo) = quick_two_sum(x, corr);
        Self { hi, lo }
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, b);
        let p2 = p2 + self.lo * b;
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let (p1, p2) = two_prod(q1, b);
        let (s, e) = two_sum(self.hi, -p1);
        let e = e - p2 + self.lo;
        let q2 = (s + e) / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo }
    }

    /// Exact integer factorial while it fits in 106 bits, correctly rounded after.
    pub fn factorial(n: usize) -> Self {
        (2..=n).fold(Self::ONE, |acc, k| acc.mul_f64(k as f64))
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Neg for ExtReal {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for ExtReal {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Self { hi, lo }
    }
}

impl Sub for ExtReal {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for ExtReal {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }
}

impl Div for ExtReal {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs.mul_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs.mul_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 } + Self::from_f64(q3)
    }
}

impl AddAssign for ExtReal {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for ExtReal {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for ExtReal {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExtComplex {
    pub re: ExtReal,
    pub im: ExtReal,
}

impl ExtComplex {
    pub const ZERO: Self = Self {
        re: ExtReal::ZERO,
        im: ExtReal::ZERO,
    };
    pub const ONE: Self = Self {
        re: ExtReal::ONE,
        im: ExtReal::ZERO,
    };

    pub fn new(re: ExtReal, im: ExtReal) -> Self {
        Self { re, im }
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        Self {
            re: ExtReal::from_f64(re),
            im: ExtReal::from_f64(im),
        }
    }

    pub fn from_real(re: ExtReal) -> Self {
        Self {
            re,
            im: ExtReal::ZERO,
        }
    }

    /// Rounds each component to the nearest binary64.
    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn conj(self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn norm_sqr(self) -> ExtReal {
        self.re.sqr() + self.im.sqr()
    }

    pub fn norm(self) -> ExtReal {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: ExtReal) -> Self {
        Self {
            re: self.re * s,
            im: self.im * s,
        }
    }

    pub fn div_real(self, s: ExtReal) -> Self {
        Self {
            re: self.re / s,
            im: self.im / s,
        }
    }

    pub fn div_f64(self, s: f64) -> Self {
        Self {
            re: self.re.div_f64(s),
            im: self.im.div_f64(s),
        }
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn powi(self, k: u32) -> Self {
        let mut acc = Self::ONE;
        let mut base = self;
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl From<Complex64> for ExtComplex {
    fn from(z: Complex64) -> Self {
        Self::from_f64(z.re, z.im)
    }
}

impl Neg for ExtComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Add for ExtComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for ExtComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Mul for ExtComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl Div for ExtComplex {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        // Scale by the larger component to keep |rhs|^2 in range.
        let s = rhs.re.hi.abs().max(rhs.im.hi.abs());
        let c = Self {
            re: rhs.re.div_f64(s),
            im: rhs.im.div_f64(s),
        };
        let den = c.norm_sqr();
        let num = self * c.conj();
        Self {
            re: (num.re / den).div_f64(s),
            im: (num.im / den).div_f64(s),
        }
    }
}

impl AddAssign for ExtComplex {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl SubAssign for ExtComplex {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl MulAssign for ExtComplex {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn third_is_accurate_past_binary64() {
        let third = ExtReal::ONE / ExtReal::from_f64(3.0);
        let back = third.mul_f64(3.0) - ExtReal::ONE;
        assert!(back.to_f64().abs() < 1e-31);
        assert!(third.lo != 0.0);
    }

    #[test]
    fn sqrt_two_squares_back() {
        let r = ExtReal::from_f64(2.0).sqrt();
        let err = (r.sqr() - ExtReal::from_f64(2.0)).to_f64().abs();
        assert!(err < 1e-31, "{err}");
    }

    #[test]
    fn factorial_is_exact_in_range() {
        assert_eq!(ExtReal::factorial(0).to_f64(), 1.0);
        assert_eq!(ExtReal::factorial(5).to_f64(), 120.0);
        // 25! = 15511210043330985984000000 needs 84 bits; hi + lo must be exact.
        let f = ExtReal::factorial(25);
        let rebuilt = f.hi as u128 as i128 + f.lo as i128;
        assert_eq!(rebuilt, 15_511_210_043_330_985_984_000_000);
    }

    #[test]
    fn complex_division_inverts_multiplication() {
        let a = ExtComplex::from_f64(-1.0, 1.0);
        let b = ExtComplex::from_f64(0.3, -7.25);
        let q = (a * b) / b;
        assert!((q - a).norm().to_f64() < 1e-30);
    }

    proptest! {
        #[test]
        fn sums_stay_normalized(a in -1e10f64..1e10, b in -1e10f64..1e10, c in -1.0f64..1.0) {
            let x = ExtReal::new(a, c * 1e-8) + ExtReal::from_f64(b);
            prop_assert!(x.is_normalized());
            prop_assert!(x.lo.abs() <= 0.5 * f64::EPSILON * x.hi.abs() + f64::MIN_POSITIVE);
        }

        #[test]
        fn product_matches_binary64_leading_part(a in -1e5f64..1e5, b in -1e5f64..1e5) {
            let p = ExtReal::from_f64(a) * ExtReal::from_f64(b);
            prop_assert_eq!(p.hi, a * b);
            prop_assert_eq!(p.lo, a.mul_add(b, -(a * b)));
        }
    }
}
