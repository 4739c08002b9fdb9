use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::astlo::{AstloFamily, Reference};
use super::HermitianOperator;
use crate::cutoff::SmoothProfile;
use crate::error::{LabError, Result};
use crate::kernelop::NonlocalOperator;
use crate::lattice::{Boundary, RealField};
use crate::linalg::{spectral_norm, CMat};

/// ad^k_phi(A) by the recursion ad^k = [ad^(k-1), phi], ad^0 = A.
pub fn iterated_commutator(a: &CMat, phi: &Reference, k: usize) -> Result<CMat> {
    if a.nrows() != phi.dim() {
        return Err(LabError::DimensionMismatch(format!(
            "operator dim {} vs reference dim {}",
            a.nrows(),
            phi.dim()
        )));
    }
    let mut m = a.clone();
    match phi {
        Reference::Field(f) => {
            let v = &f.values;
            for _ in 0..k {
                // M Phi - Phi M
                let right = CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * v[j]);
                let left = CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * v[i]);
                m = right - left;
            }
        }
        Reference::Dense(_) => {
            let p = phi.matrix();
            for _ in 0..k {
                m = &m * &p - &p * &m;
            }
        }
    }
    Ok(m)
}

/// Closed-form kernel of ad^k_phi(H_0), built from the kernel profile directly.
///
/// Off-diagonal entries are -(phi(y) - phi(x))^k K(x,y) h^d and the diagonal vanishes for k >= 1.
pub fn kernel_commutator(op: &NonlocalOperator, phi: &RealField, k: usize) -> Result<CMat> {
    let lat = &op.lattice;
    let n = lat.site_count();
    if phi.len() != n {
        return Err(LabError::DimensionMismatch(format!("field has {} entries, lattice {n}", phi.len())));
    }
    let w = lat.cell_volume();
    let periodic = lat.boundary() == Boundary::Periodic;
    let cut = lat.half_width() * (1.0 + 1e-12);
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let r = lat.distance(i, j);
            if periodic && r > cut {
                continue;
            }
            let kw = op.kernel.profile(r) * w;
            diag += kw;
            m[(i, j)] = C64::new(-(phi.values[j] - phi.values[i]).powi(k as i32) * kw, 0.0);
        }
        if k == 0 {
            m[(i, i)] = C64::new(diag, 0.0);
        }
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionSide {
    Left,
    Right,
}

/// Norms of the expansion of [H, A_s(t, f)] to order n.
#[derive(Clone, Debug, Serialize)]
pub struct ExpansionReport {
    pub order: usize,
    pub side: ExpansionSide,
    pub term_norms: Vec<f64>,
    pub remainder_norm: f64,
    /// c ||B_(n+1)||, or null when no constant was supplied.
    pub ceiling: Option<f64>,
    pub s: f64,
    pub b_next_norm: f64,
    #[serde(skip)]
    pub remainder: CMat,
    #[serde(skip)]
    pub residual_norm: f64,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Expand [H, A_s(t, f)] in iterated commutators B_k = ad^k_phi(H).
///
/// Right: sum_k s^-k/k! A_s(f^(k)) B_k + s^-(n+1) R.
/// Left:  sum_k (-1)^(k+1) s^-k/k! B_k A_s(f^(k)) + (-1)^n s^-(n+1) R.
///
/// `ceiling_constant`, when given, is the constant c in ||R|| <= c ||B_(n+1)||.
pub fn commutator_expansion(
    h: &HermitianOperator,
    family: &AstloFamily,
    f: &dyn SmoothProfile,
    t: f64,
    n: usize,
    side: ExpansionSide,
    ceiling_constant: Option<f64>,
) -> Result<ExpansionReport> {
    if n == 0 {
        return Err(LabError::param("n", "expansion order must be at least 1"));
    }
    if f.smoothness() < n + 1 {
        return Err(LabError::param("n", "profile is not smooth enough for this order"));
    }
    let s = family.scale;
    let hm = h.matrix();
    let mut b = Vec::with_capacity(n + 2);
    b.push(hm.clone());
    for k in 1..=n + 1 {
        b.push(iterated_commutator(&b[k - 1], &family.reference, 1)?);
    }
    let a0 = family.with_profile(f, 0, t);
    let full = a0.commutator_with(hm);
    let mut sum = CMat::zeros(hm.nrows(), hm.ncols());
    let mut term_norms = Vec::with_capacity(n);
    for k in 1..=n {
        let ak = family.with_profile(f, k, t);
        let coeff = s.powi(-(k as i32)) / factorial(k);
        let term = match side {
            ExpansionSide::Right => ak.mul_right(&b[k]),
            ExpansionSide::Left => ak.mul_left(&b[k]),
        };
        let sign = match side {
            ExpansionSide::Right => 1.0,
            ExpansionSide::Left => {
                if k % 2 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        let scaled = CMat::from_fn(term.nrows(), term.ncols(), |i, j| term[(i, j)] * (sign * coeff));
        term_norms.push(spectral_norm(&scaled)?);
        sum = sum + scaled;
    }
    let diff = &full - &sum;
    let residual_norm = spectral_norm(&diff)?;
    let remainder_sign = match side {
        ExpansionSide::Right => 1.0,
        ExpansionSide::Left => {
            if n % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        }
    };
    let factor = remainder_sign * s.powi(n as i32 + 1);
    let remainder = CMat::from_fn(diff.nrows(), diff.ncols(), |i, j| diff[(i, j)] * factor);
    let b_next_norm = spectral_norm(&b[n + 1])?;
    Ok(ExpansionReport {
        order: n,
        side,
        term_norms,
        remainder_norm: residual_norm * s.powi(n as i32 + 1),
        ceiling: ceiling_constant.map(|c| c * b_next_norm),
        s,
        b_next_norm,
        remainder,
        residual_norm,
    })
}

/// i[H, A_s(t, chi)] split into first order, orders 2..n and remainder, each symmetrized.
#[derive(Clone, Debug)]
pub struct SymmetrizedTerms {
    pub first: CMat,
    pub middle: CMat,
    pub remainder: CMat,
    pub exact: CMat,
}

pub fn symmetrized_expansion(h: &HermitianOperator, family: &AstloFamily, t: f64, n: usize) -> Result<SymmetrizedTerms> {
    let chi = family.chi.clone();
    let rep = commutator_expansion(h, family, chi.as_ref(), t, n, ExpansionSide::Right, None)?;
    let s = family.scale;
    let i = C64::new(0.0, 1.0);
    let hm = h.matrix();
    let herm = |x: &CMat| -> CMat {
        let xa = x.adjoint().to_owned();
        CMat::from_fn(x.nrows(), x.ncols(), |a, b| (x[(a, b)] + xa[(a, b)]) * 0.5)
    };
    let mut bk = hm.clone();
    let dim = hm.nrows();
    let mut first = CMat::zeros(dim, dim);
    let mut middle = CMat::zeros(dim, dim);
    for k in 1..=n {
        bk = iterated_commutator(&bk, &family.reference, 1)?;
        let ak = family.with_profile(chi.as_ref(), k, t);
        let coeff = s.powi(-(k as i32)) / factorial(k);
        let term = ak.mul_right(&bk);
        let scaled = CMat::from_fn(dim, dim, |a, b| term[(a, b)] * i * coeff);
        if k == 1 {
            first = herm(&scaled);
        } else {
            middle = middle + herm(&scaled);
        }
    }
    let rs = s.powi(-(n as i32 + 1));
    let r = CMat::from_fn(dim, dim, |a, b| rep.remainder[(a, b)] * i * rs);
    let remainder = herm(&r);
    let full = family.astlo(t).commutator_with(hm);
    let exact = CMat::from_fn(dim, dim, |a, b| full[(a, b)] * i);
    Ok(SymmetrizedTerms {
        first,
        middle,
        remainder,
        exact,
    })
}

/// (||[V, A_s(t, chi)]||, s^-1 ||[phi, V]|| sup|chi'|).
pub fn potential_commutator_bound(v: &HermitianOperator, family: &AstloFamily, t: f64) -> Result<(f64, f64)> {
    let a = family.astlo(t);
    let lhs = spectral_norm(&a.commutator_with(v.matrix()))?;
    let phi = family.reference.matrix();
    let pv = &phi * v.matrix() - v.matrix() * &phi;
    let chi = &family.chi;
    let d = chi.delta();
    let sup = (0..=2000)
        .map(|k| chi.derivative(1, d * k as f64 / 2000.0).abs())
        .fold(0.0, f64::max);
    Ok((lhs, spectral_norm(&pv)? * sup / family.scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::make_cutoff;
    use crate::kernelop::{assemble_operator, KernelSpec};
    use crate::lattice::{distance_function, Lattice, RegionSet};
    use std::sync::Arc;

    fn setup() -> (NonlocalOperator, RealField) {
        let lat = Lattice::new(1, 8.0, 32, Boundary::Periodic).unwrap();
        let op = assemble_operator(&lat, &KernelSpec::power_law(5.0)).unwrap();
        let x = RegionSet::interval(&lat, -1.0, 1.0);
        (op, distance_function(&lat, &x).unwrap())
    }

    #[test]
    fn recursion_matches_kernel_form() {
        let (op, phi) = setup();
        let h = op.to_complex();
        for k in 0..4 {
            let a = iterated_commutator(&h, &Reference::Field(phi.clone()), k).unwrap();
            let b = kernel_commutator(&op, &phi, k).unwrap();
            let rel = (&a - &b).norm_l2() / b.norm_l2().max(1e-300);
            assert!(rel < 1e-12, "k={k} rel={rel}");
        }
    }

    #[test]
    fn expansion_reconstructs_commutator() {
        let (op, phi) = setup();
        let h = HermitianOperator::new(op.to_complex()).unwrap();
        let chi = Arc::new(make_cutoff(0.5, 2).unwrap());
        let fam = AstloFamily::new(Reference::Field(phi), chi.clone(), 0.5, 6.0).unwrap();
        for side in [ExpansionSide::Left, ExpansionSide::Right] {
            let lo = commutator_expansion(&h, &fam, chi.as_ref(), 1.0, 2, side, None).unwrap();
            let fam2 = fam.with_scale(12.0).unwrap();
            let hi = commutator_expansion(&h, &fam2, chi.as_ref(), 1.0, 2, side, None).unwrap();
            assert!(hi.residual_norm < lo.residual_norm, "{side:?}");
        }
    }

    #[test]
    fn symmetrized_terms_sum_to_commutator() {
        let (op, phi) = setup();
        let h = HermitianOperator::new(op.to_complex()).unwrap();
        let chi = Arc::new(make_cutoff(0.5, 3).unwrap());
        let fam = AstloFamily::new(Reference::Field(phi), chi, 0.5, 4.0).unwrap();
        let t = symmetrized_expansion(&h, &fam, 2.0, 3).unwrap();
        let sum = &t.first + &t.middle + &t.remainder;
        assert!((&sum - &t.exact).norm_max() < 1e-13 * (1.0 + t.exact.norm_max()));
    }
}
