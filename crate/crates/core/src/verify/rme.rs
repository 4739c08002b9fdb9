use super::{first_speed, heisenberg, scaled, unitaries, InequalityReport};
use crate::cutoff::{combine_cutoffs, CutoffFunction};
use crate::error::{LabError, Result};
use crate::kernelop::{NonlocalOperator, SpeedBounds};
use crate::linalg::{eigenvalues_hermitian, spectral_norm, symmetrize, CMat};
use crate::opcalc::{AstloFamily, Reference};
use crate::propagate::{PotentialSample, PotentialSpec};

#[derive(Clone, Copy, Debug)]
pub struct RmeOptions {
    /// Finite-difference step as a fraction of s.
    pub fd_step: f64,
    /// Stepping size when V is present; the propagator default otherwise.
    pub dt: Option<f64>,
    /// Relative eigenvalue tolerance.
    pub tolerance: f64,
}

impl Default for RmeOptions {
    fn default() -> Self {
        RmeOptions {
            fd_step: 1e-4,
            dt: None,
            tolerance: 1e-8,
        }
    }
}

/// xi_k = (1 + kappa_k) chi for k = 2..=n.
pub fn default_rme_xi(chi: &CutoffFunction, bounds: &SpeedBounds, n: usize) -> Result<Vec<CutoffFunction>> {
    (2..=n)
        .map(|k| {
            let kk = bounds.kappa(k as u32)?;
            if kk > 0.0 {
                combine_cutoffs(chi, chi, kk)
            } else {
                Ok(chi.clone())
            }
        })
        .collect()
}

/// ||[phi, V]|| for one sample of the potential.
pub fn potential_commutator_norm(reference: &Reference, v: &PotentialSample) -> Result<f64> {
    match (reference, v) {
        (Reference::Field(_), PotentialSample::Field(_)) => Ok(0.0),
        (_, PotentialSample::Field(w)) => {
            let p = reference.matrix();
            let vm = crate::linalg::diag_complex(w);
            spectral_norm(&(&p * &vm - &vm * &p))
        }
        (_, PotentialSample::Operator(m)) => {
            let p = reference.matrix();
            spectral_norm(&(&p * m - m * &p))
        }
    }
}

/// Derivative nodes and weights: central when t - 2h >= 0, one-sided otherwise.
fn fd_stencil(t: f64, h: f64) -> Vec<(f64, f64)> {
    if t - h >= 0.0 {
        vec![(t + h, 0.5 / h), (t - h, -0.5 / h)]
    } else {
        vec![(t, -1.5 / h), (t + h, 2.0 / h), (t + 2.0 * h, -0.5 / h)]
    }
}

/// Recursive monotonicity estimate at each sample time.
///
/// D = -d/dt alpha_t(A_s(t,chi)) - (c - kappa) s^-1 alpha_t(A_s(t,chi'))
///     + sum_k s^-k alpha_t(A_s(t,xi_k')) + C (s^-(n+1) + s^-1 G(t)),
/// with the time derivative from a Richardson-extrapolated difference of
/// step `fd_step * s`. The reported constant is the smallest C with D >= -tol.
pub fn rme_check(
    op: &NonlocalOperator,
    potential: &PotentialSpec,
    family: &AstloFamily,
    xi: &[CutoffFunction],
    n: usize,
    times: &[f64],
    opts: &RmeOptions,
) -> Result<InequalityReport> {
    if n == 0 {
        return Err(LabError::param("n", "order must be at least 1"));
    }
    if xi.len() != n - 1 && !(xi.len() == 1 && n > 1) {
        return Err(LabError::param("xi", format!("expected {} auxiliary cutoffs, got {}", n - 1, xi.len())));
    }
    if times.iter().any(|t| !(*t >= 0.0)) {
        return Err(LabError::param("times", "sample times must be nonnegative"));
    }
    let kappa = first_speed(op, &family.reference)?;
    let c = family.speed;
    if !(c > kappa) {
        return Err(LabError::Hypothesis(format!("speed c = {c} must exceed kappa = {kappa}")));
    }
    let gap = c - kappa;
    let s = family.scale;
    let h = opts.fd_step * s;

    let mut nodes: Vec<f64> = Vec::new();
    for &t in times {
        nodes.push(t);
        for step in [h, 0.5 * h] {
            nodes.extend(fd_stencil(t, step).into_iter().map(|(x, _)| x));
        }
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nodes.dedup();
    let us = unitaries(op, potential, &nodes, opts.dt)?;
    let u_at = |x: f64| -> &CMat {
        let k = nodes.iter().position(|&y| y == x).expect("node was scheduled");
        &us[k]
    };
    let evolved = |x: f64| heisenberg(u_at(x), &family.astlo(x));

    let chi = family.chi.clone();
    let mut raw = Vec::with_capacity(times.len());
    let mut gains = Vec::with_capacity(times.len());
    let mut tols = Vec::with_capacity(times.len());
    let mut g_series = Vec::with_capacity(times.len());
    let mut fd_gap = 0.0f64;
    for &t in times {
        let fd = |step: f64| -> CMat {
            let mut acc: Option<CMat> = None;
            for (x, w) in fd_stencil(t, step) {
                let term = scaled(&evolved(x), w);
                acc = Some(match acc {
                    None => term,
                    Some(a) => a + term,
                });
            }
            acc.unwrap()
        };
        let d_h = fd(h);
        let d_half = fd(0.5 * h);
        fd_gap = fd_gap.max((&d_h - &d_half).norm_max());
        let deriv = scaled(&d_half, 4.0 / 3.0) - scaled(&d_h, 1.0 / 3.0);

        let u = u_at(t);
        let ch = chi.clone();
        let first = heisenberg(u, &family.realize(t, move |mu| ch.derivative(1, mu)));
        let mut d0 = scaled(&deriv, -1.0) - scaled(&first, gap / s);
        for k in 2..=n {
            let x = xi.get(k - 2).unwrap_or(&xi[0]).clone();
            let term = heisenberg(u, &family.realize(t, move |mu| x.derivative(1, mu)));
            d0 = d0 + scaled(&term, s.powi(-(k as i32)));
        }
        symmetrize(&mut d0);
        let eig = eigenvalues_hermitian(&d0)?;
        let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = eig.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let g = match potential.sample(t) {
            None => 0.0,
            Some(v) => potential_commutator_norm(&family.reference, &v)?,
        };
        raw.push(lo);
        gains.push(s.powi(-(n as i32 + 1)) + g / s);
        tols.push(opts.tolerance * hi.max(f64::MIN_POSITIVE));
        g_series.push(g);
    }
    let tol = tols.iter().cloned().fold(0.0, f64::max);
    let constant = raw
        .iter()
        .zip(&gains)
        .map(|(&lo, &g)| if lo >= -0.5 * tol { 0.0 } else { (-lo - 0.5 * tol) / g })
        .fold(0.0, f64::max);
    let margins: Vec<f64> = raw.iter().zip(&gains).map(|(&lo, &g)| lo + constant * g).collect();
    let mut report = InequalityReport::new("rme", times.to_vec(), margins, tol).with_constant(constant);
    report.extra("kappa", kappa);
    report.extra("c", c);
    report.extra("s", s);
    report.extra("fd_step", h);
    report.extra("fd_discrepancy", fd_gap);
    report.series.insert("min_eig_without_constant".into(), raw);
    report.series.insert("commutator_with_potential".into(), g_series);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::make_cutoff;
    use crate::kernelop::{assemble_operator, KernelSpec};
    use crate::lattice::{distance_function, Boundary, FieldUnits, Lattice, RealField, RegionSet};
    use std::sync::Arc;

    #[test]
    fn zero_kernel_passes_with_zero_constant() {
        let lat = Lattice::new(1, 8.0, 24, Boundary::Truncated).unwrap();
        let op = assemble_operator(&lat, &KernelSpec::zero()).unwrap();
        let phi = distance_function(&lat, &RegionSet::interval(&lat, -1.0, 1.0)).unwrap();
        let chi = Arc::new(make_cutoff(0.5, 2).unwrap());
        let fam = AstloFamily::new(Reference::Field(phi), chi.clone(), 1.0, 4.0).unwrap();
        let xi = vec![chi.as_ref().clone()];
        let r = rme_check(&op, &PotentialSpec::None, &fam, &xi, 2, &[0.5, 1.0, 2.0], &RmeOptions::default()).unwrap();
        assert_eq!(r.smallest_c, Some(0.0));
        assert!(r.passed);
    }

    #[test]
    fn constant_reference_passes_with_zero_constant() {
        let lat = Lattice::new(1, 8.0, 24, Boundary::Truncated).unwrap();
        let op = assemble_operator(&lat, &KernelSpec::power_law(5.0)).unwrap();
        let phi = RealField::new(vec![1.0; 24], FieldUnits::Length);
        let chi = Arc::new(make_cutoff(0.5, 2).unwrap());
        let fam = AstloFamily::new(Reference::Field(phi), chi.clone(), 1.0, 4.0).unwrap();
        let xi = vec![chi.as_ref().clone()];
        let r = rme_check(&op, &PotentialSpec::None, &fam, &xi, 2, &[1.0, 2.0], &RmeOptions::default()).unwrap();
        assert!(r.smallest_c.unwrap() < 1e-6, "{:?}", r.smallest_c);
    }

    #[test]
    fn slow_speed_is_rejected() {
        let lat = Lattice::new(1, 8.0, 24, Boundary::Truncated).unwrap();
        let op = assemble_operator(&lat, &KernelSpec::power_law(5.0)).unwrap();
        let phi = distance_function(&lat, &RegionSet::interval(&lat, -1.0, 1.0)).unwrap();
        let chi = Arc::new(make_cutoff(0.5, 2).unwrap());
        let fam = AstloFamily::new(Reference::Field(phi), chi.clone(), 1e-3, 4.0).unwrap();
        let xi = vec![chi.as_ref().clone()];
        let r = rme_check(&op, &PotentialSpec::None, &fam, &xi, 2, &[1.0], &RmeOptions::default());
        assert!(matches!(r, Err(LabError::Hypothesis(_))));
    }
}
