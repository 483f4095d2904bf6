//! Dense complex linear algebra: shifted solves, Hermitian eigendecomposition
//! and the eigendecomposition-based exponential used as reference.

mod eigen;
mod lu;

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use eigen::{eig_hermitian, eigenvalues_hermitian, exp_oracle, exp_oracle_action, HermitianEigen};
pub use lu::{shifted_inverse, shifted_solve, shifted_solve_vec, LuFactorization};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(nrows: usize, ncols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {nrows}x{ncols} matrix",
                data.len()
            )));
        }
        Ok(Self { nrows, ncols, data })
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![ZERO; nrows * ncols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Self { nrows, ncols, data }
    }

    pub fn from_real(nrows: usize, ncols: usize, values: &[f64]) -> Result<Self> {
        Self::new(nrows, ncols, values.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Column matrix holding `v`.
    pub fn column(v: &[C64]) -> Self {
        Self {
            nrows: v.len(),
            ncols: 1,
            data: v.to_vec(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.nrows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.ncols != rhs.nrows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.nrows, self.ncols, rhs.nrows, rhs.ncols
            )));
        }
        let mut out = CMatrix::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            let out_row = &mut out.data[i * rhs.ncols..(i + 1) * rhs.ncols];
            for (k, a) in self.row(i).iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.ncols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.nrows,
                self.ncols,
                v.len()
            )));
        }
        Ok((0..self.nrows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    fn zip_with(&self, rhs: &CMatrix, f: impl Fn(C64, C64) -> C64) -> Result<CMatrix> {
        if self.nrows != rhs.nrows || self.ncols != rhs.ncols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.nrows, self.ncols, rhs.nrows, rhs.ncols
            )));
        }
        Ok(CMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn add(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// `self + s I`
    pub fn shifted(&self, s: C64) -> CMatrix {
        let mut out = self.clone();
        for i in 0..self.nrows.min(self.ncols) {
            out[(i, i)] += s;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        vec_norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// `max_{i,j} |M_ij - conj(M_ji)|`, infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for i in 0..self.nrows {
            for j in i..self.ncols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.ncols + j]
    }
}

/// Enclosure `[lo, hi]` of a Hermitian spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralBounds {
    pub lo: f64,
    pub hi: f64,
    /// Derived from an eigendecomposition rather than a cheap enclosure.
    pub exact: bool,
}

impl SpectralBounds {
    pub fn new(lo: f64, hi: f64, exact: bool) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvariantViolation(format!("spectral bounds [{lo}, {hi}] are inverted")));
        }
        Ok(Self { lo, hi, exact })
    }

    /// Upper bound on the spectral radius.
    pub fn rho(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

pub const DEFAULT_HERMITIAN_TOL: f64 = 1e-12;

/// Square complex matrix checked to be Hermitian within a relative tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    matrix: CMatrix,
    tol_herm: f64,
    bounds: Option<SpectralBounds>,
}

impl HermitianMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, DEFAULT_HERMITIAN_TOL)
    }

    pub fn with_tolerance(matrix: CMatrix, tol_herm: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let deviation = matrix.hermitian_deviation();
        let allowed = tol_herm * matrix.max_abs().max(1.0);
        if !(deviation <= allowed) {
            return Err(Error::NotHermitian { deviation, allowed });
        }
        Ok(Self {
            matrix,
            tol_herm,
            bounds: None,
        })
    }

    pub fn from_real(d: usize, values: &[f64]) -> Result<Self> {
        Self::new(CMatrix::from_real(d, d, values)?)
    }

    /// Attaches known spectral bounds (for instance from an eigendecomposition).
    pub fn with_bounds(mut self, bounds: SpectralBounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn tol_herm(&self) -> f64 {
        self.tol_herm
    }

    pub fn bounds(&self) -> Option<SpectralBounds> {
        self.bounds
    }

    /// Attached bounds if any, Gershgorin otherwise.
    pub fn bounds_or_gershgorin(&self) -> SpectralBounds {
        self.bounds.unwrap_or_else(|| gershgorin_bounds(self))
    }

    pub fn is_real(&self) -> bool {
        self.matrix.is_real()
    }

    /// `A + c I`, still Hermitian for real `c`. Attached bounds are shifted too.
    pub fn shifted(&self, c: f64) -> HermitianMatrix {
        HermitianMatrix {
            matrix: self.matrix.shifted(C64::new(c, 0.0)),
            tol_herm: self.tol_herm,
            bounds: self.bounds.map(|b| SpectralBounds {
                lo: b.lo + c,
                hi: b.hi + c,
                exact: b.exact,
            }),
        }
    }
}

/// `[min_i (A_ii - r_i), max_i (A_ii + r_i)]` with `r_i = sum_{j != i} |A_ij|`.
pub fn gershgorin_bounds(a: &HermitianMatrix) -> SpectralBounds {
    let m = a.matrix();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..a.dim() {
        let r: f64 = m
            .row(i)
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, z)| z.norm())
            .sum();
        let center = m[(i, i)].re;
        lo = lo.min(center - r);
        hi = hi.max(center + r);
    }
    if a.dim() == 0 {
        (lo, hi) = (0.0, 0.0);
    }
    SpectralBounds { lo, hi, exact: false }
}

pub fn vec_norm2(v: &[C64]) -> f64 {
    let scale = v.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let sum: f64 = v.iter().map(|z| (z / scale).norm_sqr()).sum();
    scale * sum.sqrt()
}

/// Spectral norm (largest singular value).
///
/// Exactly Hermitian input uses the largest eigenvalue modulus; anything else
/// goes through the Gram matrix `M^H M`.
pub fn norm2(m: &CMatrix) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0.0);
    }
    if m.ncols() == 1 {
        return Ok(vec_norm2(m.data()));
    }
    if m.is_square() && m.hermitian_deviation() == 0.0 {
        let values = eigenvalues_hermitian(m)?;
        return Ok(values.iter().map(|x| x.abs()).fold(0.0, f64::max));
    }
    let scale = m.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let scaled = m.scale(C64::new(1.0 / scale, 0.0));
    let mut gram = scaled.adjoint().matmul(&scaled)?;
    let d = gram.nrows();
    for i in 0..d {
        gram[(i, i)].im = 0.0;
        for j in i + 1..d {
            gram[(j, i)] = gram[(i, j)].conj();
        }
    }
    let values = eigenvalues_hermitian(&gram)?;
    let top = values.iter().copied().fold(0.0, f64::max);
    Ok(scale * top.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn lap1d(d: usize) -> HermitianMatrix {
        let m = CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(-2.0, 0.0)
            } else if i.abs_diff(j) == 1 {
                ONE
            } else {
                ZERO
            }
        });
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn norm2_examples() {
        assert!((norm2(&CMatrix::identity(7)).unwrap() - 1.0).abs() < 1e-15);
        let d = CMatrix::diag(&[C64::new(-3.0, 0.0), C64::new(2.0, 0.0)]);
        assert!((norm2(&d).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn norm2_of_non_hermitian() {
        // [[0, 2], [0, 0]] has singular values {2, 0}.
        let m = CMatrix::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]).unwrap();
        assert!((norm2(&m).unwrap() - 2.0).abs() < 1e-14);
        let v = CMatrix::column(&[C64::new(3.0, 0.0), C64::new(0.0, 4.0)]);
        assert_eq!(norm2(&v).unwrap(), 5.0);
    }

    #[test]
    fn gershgorin_of_laplacian() {
        let b = gershgorin_bounds(&lap1d(12));
        assert_eq!((b.lo, b.hi), (-4.0, 0.0));
        assert!(!b.exact);
    }

    #[test]
    fn hermitian_check_rejects_asymmetric() {
        let m = CMatrix::from_real(2, 2, &[1.0, 2.0, 2.5, 1.0]).unwrap();
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian { .. })));
        let m = CMatrix::new(2, 2, vec![ONE, C64::new(0.0, 1.0), C64::new(0.0, -1.0), ONE]).unwrap();
        assert!(HermitianMatrix::new(m).is_ok());
        assert!(HermitianMatrix::new(CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn matmul_matches_hand_product() {
        let a = CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(a.matmul(&b).unwrap(), CMatrix::from_real(2, 2, &[2.0, 1.0, 4.0, 3.0]).unwrap());
        assert!(a.matmul(&CMatrix::zeros(3, 1)).is_err());
    }
}
