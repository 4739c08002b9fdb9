use num_complex::Complex64 as C64;

use super::HermitianOperator;
use crate::cutoff::{weighted_norm, AnalyticExtension};
use crate::error::{LabError, Result};
use crate::linalg::{tridiagonalize, CMat, TridiagonalLu};
use crate::quad::{integrate_half_line, integrate_panels, QuadOptions, QuadResult, QuadValue};

#[derive(Clone, Copy, Debug)]
pub struct HsOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for HsOptions {
    fn default() -> Self {
        HsOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 400,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HsResult {
    pub operator: CMat,
    pub error_estimate: f64,
    pub evaluations: usize,
}

fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// int df~(z) F(z) dx dy over the plane, for matrix-valued F.
///
/// With `conjugate_symmetric` the lower half-plane is taken as the adjoint of
/// the upper one, which holds when F(conj z) = F(z)* (e.g. resolvent powers).
pub fn hs_integrate(
    ext: &AnalyticExtension,
    breakpoints: &[f64],
    integrand: &(dyn Fn(C64) -> CMat + Sync),
    dim: usize,
    conjugate_symmetric: bool,
    opts: &HsOptions,
) -> Result<HsResult> {
    let outer_opts = QuadOptions {
        abs_tol: opts.abs_tol,
        rel_tol: opts.rel_tol,
        max_subdivisions: opts.max_subdivisions,
    };
    let inner_opts = QuadOptions {
        abs_tol: opts.abs_tol * 1e-2,
        rel_tol: opts.rel_tol * 1e-1,
        max_subdivisions: opts.max_subdivisions,
    };
    let mut inner_err = 0.0f64;
    let mut evaluations = 0usize;
    let mut column = |x: f64, sign: f64| -> CMat {
        let b = bracket(x);
        let r: QuadResult<CMat> = integrate_panels(
            |y: f64| {
                let z = C64::new(x, sign * y);
                let w = ext.density(z);
                if w == C64::new(0.0, 0.0) {
                    return CMat::zeros(dim, dim);
                }
                let m = integrand(z);
                CMat::from_fn(dim, dim, |i, j| m[(i, j)] * w)
            },
            &[0.0, b, 2.0 * b],
            &inner_opts,
        );
        inner_err = inner_err.max(r.error);
        evaluations += r.evaluations;
        r.value
    };
    let mut pts = breakpoints.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let lo = pts[0];
    let hi = *pts.last().unwrap();
    let width = (hi - lo).max(1.0);
    let mut half = |sign: f64| -> Result<(CMat, f64)> {
        let mid = integrate_panels(|x| column(x, sign), &pts, &outer_opts);
        let right = integrate_half_line(|x| column(x, sign), hi, 1.0, width, &outer_opts)?;
        let left = integrate_half_line(|x| column(x, sign), lo, -1.0, width, &outer_opts)?;
        if !(mid.converged && right.converged && left.converged) {
            return Err(LabError::Quadrature(format!(
                "resolvent integral error estimates {:.3e}, {:.3e}, {:.3e} above tolerance",
                mid.error, right.error, left.error
            )));
        }
        let mut v = mid.value;
        v.add_scaled(1.0, &right.value);
        v.add_scaled(1.0, &left.value);
        Ok((v, mid.error + right.error + left.error))
    };
    let (upper, e_up) = half(1.0)?;
    let (total, err) = if conjugate_symmetric {
        let adj = upper.adjoint().to_owned();
        (&upper + &adj, 2.0 * e_up)
    } else {
        let (lower, e_lo) = half(-1.0)?;
        (&upper + &lower, e_up + e_lo)
    };
    let span = (hi - lo) + 4.0 * width;
    Ok(HsResult {
        operator: total,
        error_estimate: err + 2.0 * span * inner_err,
        evaluations,
    })
}

/// f^(p)(A) / p! from resolvent powers integrated against df~.
///
/// A is reduced once to tridiagonal form; each quadrature node costs one
/// banded factorization of z - T.
pub fn hs_apply(a: &HermitianOperator, ext: &AnalyticExtension, p: usize, opts: &HsOptions) -> Result<HsResult> {
    if p > ext.nu() {
        return Err(LabError::param(
            "p",
            format!("derivative order {p} exceeds the extension order {}", ext.nu()),
        ));
    }
    // Absolute convergence of the representation.
    weighted_norm(ext.profile(), p, ext.nu())?;
    let dim = a.dim();
    let tri = tridiagonalize(a.matrix())?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..dim {
        let mut r = 0.0;
        if i > 0 {
            r += tri.sub[i - 1].norm();
        }
        if i + 1 < dim {
            r += tri.sub[i].norm();
        }
        lo = lo.min(tri.diag[i] - r);
        hi = hi.max(tri.diag[i] + r);
    }
    let mut pts = ext.profile().breakpoints();
    let panels = (dim / 2).max(8);
    for k in 0..=panels {
        pts.push(lo + (hi - lo) * k as f64 / panels as f64);
    }
    let integrand = |z: C64| -> CMat {
        let lu = match TridiagonalLu::shifted(&tri, z) {
            Ok(lu) => lu,
            Err(_) => return CMat::from_fn(dim, dim, |_, _| C64::new(f64::NAN, f64::NAN)),
        };
        let mut out = CMat::zeros(dim, dim);
        let mut col = vec![C64::new(0.0, 0.0); dim];
        for j in 0..dim {
            col.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
            col[j] = C64::new(1.0, 0.0);
            for _ in 0..=p {
                lu.solve_in_place(&mut col);
            }
            for i in 0..dim {
                out[(i, j)] = col[i];
            }
        }
        out
    };
    let r = hs_integrate(ext, &pts, &integrand, dim, true, opts)?;
    let rotated = &tri.q * &r.operator * tri.q.adjoint();
    Ok(HsResult {
        operator: rotated,
        error_estimate: r.error_estimate,
        evaluations: r.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::{make_cutoff, GaussianProfile, SmoothProfile};
    use crate::linalg::{eigh_complex, reconstruct};
    use std::sync::Arc;

    fn sample_matrix(n: usize) -> HermitianOperator {
        let m = CMat::from_fn(n, n, |i, j| {
            let a = ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.5;
            let b = ((i * 5 + j * 2) % 7) as f64 / 7.0 - 0.5;
            C64::new(a + ((j * 7 + i * 3) % 11) as f64 / 11.0 - 0.5, b - (((j * 5 + i * 2) % 7) as f64 / 7.0 - 0.5))
        });
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn gaussian_matches_spectral_calculus() {
        let a = sample_matrix(6);
        let g = GaussianProfile::new(0.2, 0.8);
        let ext = AnalyticExtension::new(Arc::new(g), 3).unwrap();
        let (vals, u) = eigh_complex(a.matrix()).unwrap();
        for p in 0..2 {
            let r = hs_apply(&a, &ext, p, &HsOptions::default()).unwrap();
            // p! = 1 for p <= 1
            let gv: Vec<C64> = vals.iter().map(|&l| C64::new(g.derivative(p, l), 0.0)).collect();
            let exact = reconstruct(&u, &gv);
            let err = (&r.operator - &exact).norm_l2() / exact.norm_l2();
            assert!(err < 1e-7, "p={p} err={err}");
        }
    }

    #[test]
    fn cutoff_at_order_zero_is_divergent() {
        let a = sample_matrix(4);
        let ext = AnalyticExtension::new(Arc::new(make_cutoff(0.5, 2).unwrap()), 3).unwrap();
        assert!(matches!(hs_apply(&a, &ext, 0, &HsOptions::default()), Err(LabError::Divergent(_))));
    }
}
