//! Numerical checks of the localization inequalities: the geometric sandwich,
//! the recursive monotonicity estimate, the monotone envelope, the operator
//! light-cone bound, tail diagnostics and the soliton speed test.
//!
//! Operator inequalities are checked as min-eig(RHS - LHS) >= -tol; scalar ones
//! by direct comparison. Where the theory only asserts that some constant
//! exists, the report carries the smallest constant that makes the samples pass.

mod decay;
mod envelope;
mod main_ineq;
mod rme;
mod sandwich;
mod soliton;

pub use decay::{
    fit_decay, lightcone_decay_fit, markov_tail_measure, strichartz_from_series, strichartz_norm, tail_mass_series,
    DecayFit, FitStatus, MarkovSeries, StrichartzEstimate, ROUND_OFF_FLOOR,
};
pub use envelope::envelope_check;
pub use main_ineq::{main_inequality_check, smallest_constant_for, MainInequalityOptions, ReferenceVariant};
pub use rme::{default_rme_xi, potential_commutator_norm, rme_check, RmeOptions};
pub use sandwich::geometric_sandwich_check;
pub use soliton::{
    nls_front_speed, soliton_speed_test, synthetic_crossing, FrontSpeed, SolitonOptions, SyntheticCrossing,
};

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Result;
use crate::kernelop::{schur_kappa, NonlocalOperator};
use crate::linalg::{spectral_norm, CMat};
use crate::opcalc::{Realized, Reference};
use crate::propagate::{propagate_unitary, PotentialSpec, SpectralPropagator};

/// Per-sample margins of one inequality.
#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub samples: Vec<f64>,
    /// min eigenvalue of RHS - LHS, or the scalar slack.
    pub margins: Vec<f64>,
    pub smallest_c: Option<f64>,
    pub passed: bool,
    pub tolerance: f64,
    pub extras: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub notes: Vec<String>,
}

impl InequalityReport {
    pub fn new(name: impl Into<String>, samples: Vec<f64>, margins: Vec<f64>, tolerance: f64) -> Self {
        let passed = margins.iter().all(|m| *m >= -tolerance);
        InequalityReport {
            name: name.into(),
            samples,
            margins,
            smallest_c: None,
            passed,
            tolerance,
            extras: BTreeMap::new(),
            series: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        if !c.is_finite() {
            self.passed = false;
            self.notes.push("fitted constant is not finite".into());
        }
        self.smallest_c = Some(c);
        self
    }

    pub fn extra(&mut self, key: &str, value: f64) {
        self.extras.insert(key.to_string(), value);
    }

    pub fn fail(&mut self, note: impl Into<String>) {
        self.passed = false;
        self.notes.push(note.into());
    }

    pub fn min_margin(&self) -> f64 {
        self.margins.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// CSV with columns sample, margin.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["sample", "margin"])?;
        for (s, m) in self.samples.iter().zip(&self.margins) {
            w.write_record([s.to_string(), m.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// |b - a| / |a|, with 0 when both vanish.
pub fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if a == 0.0 {
        f64::INFINITY
    } else {
        (b - a).abs() / a.abs()
    }
}

/// Marks `report` failed unless its constant agrees with `other` within `tol`.
pub fn require_stable(report: &mut InequalityReport, other: f64, tol: f64, label: &str) {
    let c = report.smallest_c.unwrap_or(f64::NAN);
    let change = relative_change(c, other);
    report.extra(&format!("stability_{label}"), change);
    if !(change <= tol) {
        report.fail(format!("constant {c:.4e} vs {other:.4e} under {label}: change {change:.3}"));
    }
}

/// U* A U.
pub(crate) fn heisenberg(u: &CMat, a: &Realized) -> CMat {
    let au = a.mul_right(u);
    u.adjoint() * au
}

/// Propagators U(t, 0) for a list of nonnegative times.
pub fn unitaries(
    op: &NonlocalOperator,
    potential: &PotentialSpec,
    times: &[f64],
    dt: Option<f64>,
) -> Result<Vec<CMat>> {
    if potential.is_none() {
        let prop = SpectralPropagator::new(op)?;
        return Ok(times.iter().map(|&t| prop.unitary(t)).collect());
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&k| times[k]).collect();
    let step = dt.unwrap_or_else(|| crate::propagate::default_dt(op));
    let us = propagate_unitary(op, potential, &sorted, step)?;
    let mut out = vec![CMat::zeros(0, 0); times.len()];
    for (u, k) in us.into_iter().zip(order) {
        out[k] = u;
    }
    Ok(out)
}

/// kappa = ||[H_0, phi]|| bound: the Schur bound for multiplication operators.
pub(crate) fn first_speed(op: &NonlocalOperator, reference: &Reference) -> Result<f64> {
    match reference {
        Reference::Field(f) => schur_kappa(op, f, 1),
        Reference::Dense(_) => {
            let h = op.to_complex();
            let p = reference.matrix();
            spectral_norm(&(&h * &p - &p * &h))
        }
    }
}

pub(crate) fn scaled(a: &CMat, s: f64) -> CMat {
    let c = C64::new(s, 0.0);
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * c)
}
