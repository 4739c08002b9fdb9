use super::InequalityReport;
use crate::cutoff::CutoffFunction;
use crate::error::{LabError, Result};
use crate::lattice::RealField;

/// Entrywise check of eta(phi/s)/|eta| <= P_0 and P_f(t) <= eta((phi - c'|t|)/s)/|eta|
/// with s = (f(t) - c'|t|)/delta, for every eta in `etas`.
///
/// `delta` must bound the transition width of every eta. Margins are the
/// minimum entrywise slack over both inequalities and all cutoffs.
pub fn geometric_sandwich_check(
    phi: &RealField,
    etas: &[&CutoffFunction],
    f_height: &dyn Fn(f64) -> f64,
    c_prime: f64,
    delta: f64,
    times: &[f64],
) -> Result<InequalityReport> {
    if etas.is_empty() {
        return Err(LabError::param("etas", "at least one cutoff is required"));
    }
    for eta in etas {
        if eta.delta() > delta * (1.0 + 1e-15) {
            return Err(LabError::param(
                "delta",
                format!("cutoff transition width {} exceeds delta = {delta}", eta.delta()),
            ));
        }
        if eta.value(0.0) != 0.0 {
            return Err(LabError::Hypothesis("cutoff does not vanish on (-inf, 0]".into()));
        }
    }
    let mut margins = Vec::with_capacity(times.len());
    let mut scales = Vec::with_capacity(times.len());
    for &t in times {
        let f = f_height(t);
        let gap = f - c_prime * t.abs();
        if !(gap > 0.0) {
            return Err(LabError::Hypothesis(format!(
                "f(t) = {f} does not exceed c'|t| = {} at t = {t}",
                c_prime * t.abs()
            )));
        }
        let s = gap / delta;
        scales.push(s);
        let mut worst = f64::INFINITY;
        for eta in etas {
            let norm = eta.sup_norm();
            for &x in &phi.values {
                let p0 = if x > 0.0 { 1.0 } else { 0.0 };
                let pf = if x > f { 1.0 } else { 0.0 };
                let lower = eta.value(x / s) / norm;
                let upper = eta.value((x - c_prime * t.abs()) / s) / norm;
                worst = worst.min(p0 - lower).min(upper - pf);
            }
        }
        margins.push(worst);
    }
    let mut r = InequalityReport::new("geometric_sandwich", times.to_vec(), margins, 1e-14);
    r.series.insert("s".into(), scales);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::make_cutoff;
    use crate::lattice::{distance_function, Boundary, Lattice, RegionSet};

    #[test]
    fn passes_for_distance_function() {
        let lat = Lattice::new(1, 10.0, 64, Boundary::Truncated).unwrap();
        let phi = distance_function(&lat, &RegionSet::interval(&lat, -1.0, 1.0)).unwrap();
        let chi = make_cutoff(0.3, 2).unwrap();
        let f = |t: f64| 1.0 + 1.2 * t.abs();
        let r = geometric_sandwich_check(&phi, &[&chi], &f, 1.0, 0.3, &[0.0, 1.0, 3.0]).unwrap();
        assert!(r.passed, "{:?}", r.margins);
    }

    #[test]
    fn rejects_nonpositive_scale() {
        let phi = RealField::new(vec![0.0; 16], crate::lattice::FieldUnits::Length);
        let chi = make_cutoff(0.3, 2).unwrap();
        let f = |t: f64| 0.5 * t.abs();
        assert!(geometric_sandwich_check(&phi, &[&chi], &f, 1.0, 0.3, &[2.0]).is_err());
    }
}
