//! Dense linear algebra helpers on top of `faer`.

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{LabError, Result};

pub type CMat = Mat<C64>;
pub type RMat = Mat<f64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn to_complex(a: &RMat) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| C64::new(a[(i, j)], 0.0))
}

pub fn diag_complex(values: &[f64]) -> CMat {
    let n = values.len();
    CMat::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO })
}

pub fn identity(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

/// Largest entry of |A - A*|.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn frobenius(a: &CMat) -> f64 {
    a.norm_l2()
}

/// Replace A by (A + A*)/2.
pub fn symmetrize(a: &mut CMat) {
    let n = a.nrows();
    for j in 0..n {
        for i in 0..=j {
            let v = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = v;
            a[(j, i)] = v.conj();
        }
    }
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Largest singular value.
pub fn spectral_norm(a: &CMat) -> Result<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(0.0);
    }
    let sv = a
        .singular_values()
        .map_err(|e| LabError::LinearAlgebra(format!("singular values: {e:?}")))?;
    Ok(sv.iter().cloned().fold(0.0, f64::max))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigenvalues_hermitian(a: &CMat) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| LabError::LinearAlgebra(format!("Hermitian eigenvalues: {e:?}")))
}

pub fn min_eigenvalue_hermitian(a: &CMat) -> Result<f64> {
    Ok(eigenvalues_hermitian(a)?.first().cloned().unwrap_or(0.0))
}

/// Eigendecomposition of a real symmetric matrix: (ascending eigenvalues, orthogonal V).
pub fn eigh_real(a: &RMat) -> Result<(Vec<f64>, RMat)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), RMat::zeros(0, 0)));
    }
    let ev = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| LabError::LinearAlgebra(format!("symmetric eigendecomposition: {e:?}")))?;
    let s = ev.S().column_vector();
    let vals = (0..n).map(|i| s[i]).collect();
    Ok((vals, ev.U().to_owned()))
}

/// Eigendecomposition of a Hermitian matrix: (ascending eigenvalues, unitary U).
pub fn eigh_complex(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let ev = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| LabError::LinearAlgebra(format!("Hermitian eigendecomposition: {e:?}")))?;
    let s = ev.S().column_vector();
    let vals = (0..n).map(|i| s[i].re).collect();
    Ok((vals, ev.U().to_owned()))
}

/// U diag(g) U*.
pub fn reconstruct(u: &CMat, g: &[C64]) -> CMat {
    let n = u.nrows();
    let scaled = CMat::from_fn(n, g.len(), |i, j| u[(i, j)] * g[j]);
    &scaled * u.adjoint()
}

/// Hermitian tridiagonal form A = Q T Q*.
///
/// `diag[k] = T[k,k]`, `sub[k] = T[k+1,k]` and T[k,k+1] = conj(sub[k]).
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub sub: Vec<C64>,
    pub q: CMat,
}

/// Householder reduction of a Hermitian matrix.
pub fn tridiagonalize(a: &CMat) -> Result<Tridiagonal> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(LabError::DimensionMismatch(format!("{}x{} is not square", n, a.ncols())));
    }
    let mut m: Vec<C64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
    let idx = |i: usize, j: usize| i * n + j;
    let mut q: Vec<C64> = (0..n * n).map(|k| if k / n == k % n { ONE } else { ZERO }).collect();
    let mut v = vec![ZERO; n];
    let mut w = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let sigma: f64 = ((k + 1)..n).map(|i| m[idx(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let x0 = m[idx(k + 1, k)];
        if sigma == 0.0 {
            continue;
        }
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * sigma;
        for i in 0..n {
            v[i] = if i > k { m[idx(i, k)] } else { ZERO };
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // M <- H M H with H = I - beta v v*
        for i in 0..n {
            let mut acc = ZERO;
            for j in (k + 1)..n {
                acc += m[idx(i, j)] * v[j];
            }
            w[i] = acc * beta;
        }
        for i in 0..n {
            for j in (k + 1)..n {
                m[idx(i, j)] -= w[i] * v[j].conj();
            }
        }
        for j in 0..n {
            let mut acc = ZERO;
            for i in (k + 1)..n {
                acc += v[i].conj() * m[idx(i, j)];
            }
            w[j] = acc * beta;
        }
        for i in (k + 1)..n {
            for j in 0..n {
                m[idx(i, j)] -= v[i] * w[j];
            }
        }
        // Q <- Q H
        for i in 0..n {
            let mut acc = ZERO;
            for j in (k + 1)..n {
                acc += q[idx(i, j)] * v[j];
            }
            let acc = acc * beta;
            for j in (k + 1)..n {
                q[idx(i, j)] -= acc * v[j].conj();
            }
        }
    }
    let diag = (0..n).map(|i| m[idx(i, i)].re).collect();
    let sub = (0..n.saturating_sub(1)).map(|i| m[idx(i + 1, i)]).collect();
    Ok(Tridiagonal {
        diag,
        sub,
        q: CMat::from_fn(n, n, |i, j| q[idx(i, j)]),
    })
}

/// LU factorization with partial pivoting of `z - T` for a Hermitian tridiagonal T.
pub struct TridiagonalLu {
    dl: Vec<C64>,
    d: Vec<C64>,
    du: Vec<C64>,
    du2: Vec<C64>,
    swap: Vec<bool>,
}

impl TridiagonalLu {
    pub fn shifted(t: &Tridiagonal, z: C64) -> Result<Self> {
        let n = t.diag.len();
        let mut d: Vec<C64> = t.diag.iter().map(|&a| z - a).collect();
        let mut dl: Vec<C64> = t.sub.iter().map(|&s| -s).collect();
        let mut du: Vec<C64> = t.sub.iter().map(|&s| -s.conj()).collect();
        let mut du2 = vec![ZERO; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].norm() >= dl[i].norm() {
                if d[i].norm() == 0.0 {
                    return Err(LabError::LinearAlgebra("singular shifted tridiagonal".into()));
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        if n > 0 && d[n - 1].norm() == 0.0 {
            return Err(LabError::LinearAlgebra("singular shifted tridiagonal".into()));
        }
        Ok(TridiagonalLu { dl, d, du, du2, swap })
    }

    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] = b[i + 1] - self.dl[i] * b[i];
            }
        }
        if n == 0 {
            return;
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}
