use super::{CMatrix, HermitianMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// `A = U diag(values) U^H`, eigenvalues ascending, eigenvectors in the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `U diag(f(lambda)) U^H`, returned exactly Hermitian.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.values.len();
        let fl: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        let u = &self.vectors;
        let mut w = u.clone();
        for i in 0..d {
            for (x, s) in w.row_mut(i).iter_mut().zip(&fl) {
                *x *= s;
            }
        }
        let mut out = CMatrix::zeros(d, d);
        for i in 0..d {
            for l in i..d {
                let z: C64 = w.row(i).iter().zip(u.row(l)).map(|(a, b)| a * b.conj()).sum();
                out[(i, l)] = z;
                out[(l, i)] = z.conj();
            }
            out[(i, i)].im = 0.0;
        }
        out
    }

    /// `U diag(f(lambda)) U^H v`
    pub fn apply_fn_vec(&self, f: impl Fn(f64) -> f64, v: &[C64]) -> Result<Vec<C64>> {
        let d = self.values.len();
        if v.len() != d {
            return Err(Error::DimensionMismatch(format!("vector of length {} for dimension {d}", v.len())));
        }
        let u = &self.vectors;
        let mut coef = vec![ZERO; d];
        for (i, vi) in v.iter().enumerate() {
            for (c, x) in coef.iter_mut().zip(u.row(i)) {
                *c += x.conj() * vi;
            }
        }
        for (c, &x) in coef.iter_mut().zip(&self.values) {
            *c *= f(x);
        }
        u.matvec(&coef)
    }
}

struct Reflector {
    k: usize,
    v: Vec<C64>,
    tau: f64,
}

/// Householder reduction of a Hermitian matrix to Hermitian tridiagonal form.
/// Returns the diagonal, subdiagonal and the reflectors `Q = H_0 H_1 ...`.
fn tridiagonalize(mut m: CMatrix, keep: bool) -> (Vec<f64>, Vec<C64>, Vec<Reflector>) {
    let d = m.nrows();
    let mut reflectors = Vec::new();
    for k in 0..d.saturating_sub(2) {
        let tail: f64 = (k + 2..d).map(|i| m[(i, k)].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = m[(k + 1, k)];
        let alpha = (x0.norm_sqr() + tail).sqrt();
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let mut v: Vec<C64> = (k + 1..d).map(|i| m[(i, k)]).collect();
        v[0] = x0 + phase * alpha;
        let tau = 2.0 / (v[0].norm_sqr() + tail);

        let r = d - k - 1;
        let off = k + 1;
        let mut p = vec![ZERO; r];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &m.row(off + i)[off..];
            *pi = row.iter().zip(&v).map(|(a, b)| a * b).sum::<C64>() * tau;
        }
        let vhp: C64 = v.iter().zip(&p).map(|(a, b)| a.conj() * b).sum();
        let kk = 0.5 * tau * vhp.re;
        let w: Vec<C64> = p.iter().zip(&v).map(|(a, b)| a - b * kk).collect();
        for i in 0..r {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut m.row_mut(off + i)[off..];
            for j in 0..r {
                row[j] -= vi * w[j].conj() + wi * v[j].conj();
            }
        }
        let beta = -phase * alpha;
        m[(k + 1, k)] = beta;
        m[(k, k + 1)] = beta.conj();
        for i in k + 2..d {
            m[(i, k)] = ZERO;
            m[(k, i)] = ZERO;
        }
        if keep {
            reflectors.push(Reflector { k, v, tau });
        }
    }
    let diag = (0..d).map(|i| m[(i, i)].re).collect();
    let sub = (0..d.saturating_sub(1)).map(|i| m[(i + 1, i)]).collect();
    (diag, sub, reflectors)
}

/// Implicit QL on a real symmetric tridiagonal matrix. `e[i]` couples `i` and
/// `i + 1`. Rows of `zt` (if given) are rotated alongside, so they end up as
/// eigenvectors of the tridiagonal matrix.
fn tql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut [Vec<f64>]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::ConvergenceFailure(MAX_QL_SWEEPS));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = zt.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut(i + 1);
                    let (zi, zi1) = (&mut lo[i], &mut hi[0]);
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let f = *b;
                        *b = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Makes the tridiagonal real by a diagonal unitary similarity; returns the
/// phases `ph` with `T = P T' P^H` and the real subdiagonal of `T'`.
fn real_subdiagonal(sub: &[C64]) -> (Vec<C64>, Vec<f64>) {
    let mut ph = Vec::with_capacity(sub.len() + 1);
    ph.push(ONE);
    let mut e = Vec::with_capacity(sub.len() + 1);
    for (i, s) in sub.iter().enumerate() {
        let a = s.norm();
        ph.push(if a > 0.0 { ph[i] * (s / a) } else { ph[i] });
        e.push(a);
    }
    e.push(0.0);
    (ph, e)
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!("{}x{} is not square", m.nrows(), m.ncols())))
    }
}

/// Eigenvalues (ascending) of a matrix assumed Hermitian.
pub fn eigenvalues_hermitian(m: &CMatrix) -> Result<Vec<f64>> {
    check_square(m)?;
    let (mut diag, sub, _) = tridiagonalize(m.clone(), false);
    let (_, mut e) = real_subdiagonal(&sub);
    tql(&mut diag, &mut e, None)?;
    diag.sort_by(f64::total_cmp);
    Ok(diag)
}

pub fn eig_hermitian(a: &HermitianMatrix) -> Result<HermitianEigen> {
    let m = a.matrix();
    let d = m.nrows();
    let (mut diag, sub, reflectors) = tridiagonalize(m.clone(), true);
    let (ph, mut e) = real_subdiagonal(&sub);
    let mut zt: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut row = vec![0.0; d];
            row[i] = 1.0;
            row
        })
        .collect();
    tql(&mut diag, &mut e, Some(&mut zt))?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();

    // U = Q P Z
    let mut u = CMatrix::from_fn(d, d, |i, j| ph[i] * zt[order[j]][i]);
    for r in reflectors.iter().rev() {
        let off = r.k + 1;
        let mut w = vec![ZERO; d];
        for (i, vi) in r.v.iter().enumerate() {
            let vc = vi.conj();
            for (acc, x) in w.iter_mut().zip(u.row(off + i)) {
                *acc += vc * x;
            }
        }
        for (i, vi) in r.v.iter().enumerate() {
            let s = vi * r.tau;
            for (x, wj) in u.row_mut(off + i).iter_mut().zip(&w) {
                *x -= s * wj;
            }
        }
    }
    Ok(HermitianEigen { values, vectors: u })
}

/// `exp(A)` through the eigendecomposition.
pub fn exp_oracle(a: &HermitianMatrix) -> Result<CMatrix> {
    Ok(eig_hermitian(a)?.apply_fn(f64::exp))
}

/// `exp(A) v` through the eigendecomposition.
pub fn exp_oracle_action(a: &HermitianMatrix, v: &[C64]) -> Result<Vec<C64>> {
    eig_hermitian(a)?.apply_fn_vec(f64::exp, v)
}
