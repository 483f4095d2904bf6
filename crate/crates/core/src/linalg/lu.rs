use super::{CMatrix, HermitianMatrix, C64, ZERO};
use crate::error::{Error, Result};

#[inline]
fn cabs1(z: C64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// LU factorization with partial pivoting, `P A = L U`, stored in place.
#[derive(Clone, Debug)]
pub struct LuFactorization {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl LuFactorization {
    pub fn new(mut a: CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("LU needs a square matrix".into()));
        }
        let d = a.nrows();
        let mut perm: Vec<usize> = (0..d).collect();
        for k in 0..d {
            let (p, pmax) = (k..d)
                .map(|i| (i, cabs1(a[(i, k)])))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmax >= f64::MIN_POSITIVE) {
                return Err(Error::SingularSystem { index: k });
            }
            if p != k {
                for j in 0..d {
                    a.data.swap(k * d + j, p * d + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[(k, k)];
            let (head, tail) = a.data.split_at_mut((k + 1) * d);
            let pivot_row = &head[k * d..(k + 1) * d];
            for row in tail.chunks_exact_mut(d) {
                if row[k] == ZERO {
                    continue;
                }
                let l = row[k] / pivot;
                row[k] = l;
                for (x, u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                    *x -= l * u;
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    /// Solves `A X = B` for every column of `B`.
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        let d = self.dim();
        if b.nrows() != d {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} rows, system has {d}",
                b.nrows()
            )));
        }
        let m = b.ncols();
        let mut x = CMatrix::zeros(d, m);
        for (i, &p) in self.perm.iter().enumerate() {
            x.row_mut(i).copy_from_slice(b.row(p));
        }
        // Forward substitution with unit lower L.
        for i in 1..d {
            let (done, rest) = x.data.split_at_mut(i * m);
            let xi = &mut rest[..m];
            for k in 0..i {
                let l = self.lu[(i, k)];
                if l == ZERO {
                    continue;
                }
                for (t, s) in xi.iter_mut().zip(&done[k * m..(k + 1) * m]) {
                    *t -= l * s;
                }
            }
        }
        // Back substitution with U.
        for i in (0..d).rev() {
            let (head, tail) = x.data.split_at_mut((i + 1) * m);
            let xi = &mut head[i * m..];
            for k in i + 1..d {
                let u = self.lu[(i, k)];
                if u == ZERO {
                    continue;
                }
                let xk = &tail[(k - i - 1) * m..(k - i) * m];
                for (t, s) in xi.iter_mut().zip(xk) {
                    *t -= u * s;
                }
            }
            let piv = self.lu[(i, i)];
            for t in xi.iter_mut() {
                *t /= piv;
            }
        }
        Ok(x)
    }

    pub fn solve_vec(&self, b: &[C64]) -> Result<Vec<C64>> {
        Ok(self.solve(&CMatrix::column(b))?.into_data())
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.solve(&CMatrix::identity(self.dim()))
    }
}

/// Solves `(A + theta I) Y = V` for every column of `V`.
pub fn shifted_solve(a: &HermitianMatrix, theta: C64, v: &CMatrix) -> Result<CMatrix> {
    LuFactorization::new(a.matrix().shifted(theta))?.solve(v)
}

pub fn shifted_solve_vec(a: &HermitianMatrix, theta: C64, v: &[C64]) -> Result<Vec<C64>> {
    LuFactorization::new(a.matrix().shifted(theta))?.solve_vec(v)
}

/// `(A + theta I)^{-1}`
pub fn shifted_inverse(a: &HermitianMatrix, theta: C64) -> Result<CMatrix> {
    LuFactorization::new(a.matrix().shifted(theta))?.inverse()
}

#[cfg(test)]
mod tests {
    use super::super::{vec_norm2, ONE};
    use super::*;

    fn residual_ok(a: &HermitianMatrix, theta: C64, y: &[C64], v: &[C64]) -> bool {
        let shifted = a.matrix().shifted(theta);
        let r: Vec<C64> = shifted.matvec(y).unwrap().iter().zip(v).map(|(p, q)| p - q).collect();
        let d = a.dim() as f64;
        vec_norm2(&r) <= 10.0 * d * f64::EPSILON * shifted.frobenius_norm() * vec_norm2(y)
    }

    #[test]
    fn scalar_division() {
        let a = HermitianMatrix::new(CMatrix::zeros(1, 1)).unwrap();
        let y = shifted_solve_vec(&a, C64::new(0.0, 1.0), &[ONE]).unwrap();
        assert_eq!(y, vec![C64::new(0.0, -1.0)]);
    }

    #[test]
    fn diagonal_solve_by_hand() {
        let a = HermitianMatrix::from_real(2, &[-1.0, 0.0, 0.0, -2.0]).unwrap();
        let y = shifted_solve_vec(&a, C64::new(-1.0, 1.0), &[ONE, ZERO]).unwrap();
        let expect = ONE / C64::new(-2.0, 1.0);
        assert!((y[0] - expect).norm() < 1e-16);
        assert_eq!(y[1], ZERO);
    }

    #[test]
    fn inverse_examples() {
        let z = HermitianMatrix::new(CMatrix::zeros(2, 2)).unwrap();
        let inv = shifted_inverse(&z, C64::new(0.0, 1.0)).unwrap();
        assert_eq!(inv, CMatrix::identity(2).scale(C64::new(0.0, -1.0)));

        let a = HermitianMatrix::from_real(1, &[-1.0]).unwrap();
        let inv = shifted_inverse(&a, C64::new(-1.0, -1.0)).unwrap();
        assert!((inv[(0, 0)] - ONE / C64::new(-2.0, -1.0)).norm() < 1e-16);
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = super::super::tests::lap1d(30);
        let theta = C64::new(-3.1, 0.8);
        let inv = shifted_inverse(&a, theta).unwrap();
        let prod = a.matrix().shifted(theta).matmul(&inv).unwrap();
        let err = prod.sub(&CMatrix::identity(30)).unwrap().frobenius_norm();
        assert!(err < 300.0 * f64::EPSILON * inv.frobenius_norm() * 3.0, "{err}");
    }

    #[test]
    fn laplacian_residual_bound() {
        let a = super::super::tests::lap1d(50);
        let v: Vec<C64> = (0..50).map(|i| C64::new((i as f64 * 0.37).sin(), 0.0)).collect();
        for theta in crate::scalar::PartialFraction::for_order(16).unwrap().roots() {
            let y = shifted_solve_vec(&a, *theta, &v).unwrap();
            assert!(residual_ok(&a, *theta, &y, &v));
        }
    }

    #[test]
    fn singular_system_reported() {
        let a = HermitianMatrix::from_real(2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            shifted_solve_vec(&a, ZERO, &[ONE, ONE]),
            Err(Error::SingularSystem { index: 1 })
        ));
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = HermitianMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let y = shifted_solve_vec(&a, ZERO, &[C64::new(2.0, 0.0), C64::new(3.0, 0.0)]).unwrap();
        assert_eq!(y, vec![C64::new(3.0, 0.0), C64::new(2.0, 0.0)]);
    }
}
