use super::InequalityReport;
use crate::cutoff::CutoffFunction;
use crate::error::{LabError, Result};
use crate::lattice::Lattice;
use crate::opcalc::AstloFamily;
use crate::propagate::{expectation, StateTrajectory};

/// <A_s(t,chi)>_t <= <A_s(0,chi)>_0 + s^-1 <A_s(0,xi)>_0 + C (|t| s^-(n+1) + s^-1 C_V) ||psi_0||^2.
///
/// The trajectory must start at t = 0. The report's constant is the smallest
/// C satisfying every sample to within the tolerance; margins are the slack at that C.
pub fn envelope_check(
    traj: &StateTrajectory,
    lattice: &Lattice,
    family: &AstloFamily,
    xi: &CutoffFunction,
    n: usize,
    c_v: f64,
) -> Result<InequalityReport> {
    if traj.is_empty() || traj.times[0] != 0.0 {
        return Err(LabError::param("traj", "trajectory must start at t = 0"));
    }
    if traj.states[0].len() != lattice.site_count() || family.reference.dim() != lattice.site_count() {
        return Err(LabError::DimensionMismatch("trajectory, family and lattice sizes differ".into()));
    }
    if !(c_v >= 0.0) {
        return Err(LabError::param("c_v", "potential constant must be nonnegative"));
    }
    let s = family.scale;
    let psi0 = &traj.states[0];
    let mass = psi0.norm_sqr(lattice);
    let xi0 = {
        let x = xi.clone();
        family.realize(0.0, move |mu| x.value(mu))
    };
    let base = expectation(psi0, &family.astlo(0.0), lattice) + expectation(psi0, &xi0, lattice) / s;
    let mut lhs = Vec::with_capacity(traj.len());
    let mut weights = Vec::with_capacity(traj.len());
    for (&t, psi) in traj.times.iter().zip(&traj.states) {
        lhs.push(expectation(psi, &family.astlo(t), lattice));
        weights.push((t.abs() * s.powi(-(n as i32 + 1)) + c_v / s) * mass);
    }
    let tol = 1e-8 * base.abs().max(lhs.iter().fold(0.0f64, |m, v| m.max(v.abs()))).max(f64::MIN_POSITIVE);
    let mut constant = 0.0f64;
    for (&l, &w) in lhs.iter().zip(&weights) {
        let excess = l - base - 0.5 * tol;
        if excess > 0.0 {
            constant = constant.max(if w > 0.0 {
                excess / w
            } else {
                f64::INFINITY
            });
        }
    }
    let margins: Vec<f64> = lhs
        .iter()
        .zip(&weights)
        .map(|(&l, &w)| {
            let bonus = if w > 0.0 { constant * w } else { 0.0 };
            base + bonus - l
        })
        .collect();
    let mut report = InequalityReport::new("envelope", traj.times.clone(), margins, tol).with_constant(constant);
    report.extra("s", s);
    report.extra("base", base);
    report.series.insert("lhs".into(), lhs);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::make_cutoff;
    use crate::kernelop::{assemble_operator, KernelSpec};
    use crate::lattice::{distance_function, Boundary, RegionSet, State};
    use crate::opcalc::Reference;
    use crate::propagate::evolve_autonomous;
    use num_complex::Complex64 as C64;
    use std::sync::Arc;

    #[test]
    fn frozen_state_inside_region_has_zero_lhs() {
        let lat = Lattice::new(1, 8.0, 32, Boundary::Truncated).unwrap();
        let x = RegionSet::interval(&lat, -1.0, 1.0);
        let phi = distance_function(&lat, &x).unwrap();
        let psi = State::from_fn(&lat, |p| if p[0].abs() <= 1.0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        let op = assemble_operator(&lat, &KernelSpec::zero()).unwrap();
        let traj = evolve_autonomous(&op, &psi, &[0.0, 1.0, 2.0]).unwrap();
        let chi = Arc::new(make_cutoff(0.5, 2).unwrap());
        let fam = AstloFamily::new(Reference::Field(phi), chi.clone(), 1.0, 4.0).unwrap();
        let r = envelope_check(&traj, &lat, &fam, &chi, 2, 0.0).unwrap();
        assert!(r.passed);
        assert_eq!(r.smallest_c, Some(0.0));
        assert!(r.series["lhs"].iter().all(|v| *v == 0.0));
    }
}
