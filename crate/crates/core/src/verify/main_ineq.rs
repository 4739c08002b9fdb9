use serde::{Deserialize, Serialize};

use super::{unitaries, InequalityReport};
use crate::error::{LabError, Result};
use crate::kernelop::{schur_kappa, NonlocalOperator};
use crate::lattice::{RealField, State};
use crate::linalg::{eigenvalues_hermitian, CMat};
use crate::propagate::PotentialSpec;

/// Reference used in place of phi: phi itself, -phi, or phi - b.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceVariant {
    Plain,
    Reflected,
    Shifted { b: f64 },
}

impl ReferenceVariant {
    pub fn apply(&self, phi: &RealField) -> RealField {
        match self {
            ReferenceVariant::Plain => phi.clone(),
            ReferenceVariant::Reflected => phi.map(|x| -x),
            ReferenceVariant::Shifted { b } => phi.map(|x| x - b),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ReferenceVariant::Plain => "plain".into(),
            ReferenceVariant::Reflected => "reflected".into(),
            ReferenceVariant::Shifted { b } => format!("shifted_{b}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MainInequalityOptions {
    /// The first variant fixes the reported constant; the rest are checked against a joint fit.
    pub variants: Vec<ReferenceVariant>,
    pub c_v: f64,
    /// Absolute eigenvalue tolerance.
    pub tolerance: f64,
    pub dt: Option<f64>,
    /// Initial states supported in {phi <= 0} for the state-level check.
    pub batch: Vec<State>,
    /// Verify the fitted constant with a dense eigenvalue computation of RHS - LHS.
    pub dense_check: bool,
}

impl Default for MainInequalityOptions {
    fn default() -> Self {
        MainInequalityOptions {
            variants: vec![ReferenceVariant::Plain],
            c_v: 0.0,
            tolerance: 1e-8,
            dt: None,
            batch: Vec::new(),
            dense_check: true,
        }
    }
}

/// Smallest C with (1 - e)/alpha + e/beta <= 1, where alpha = 1 + C A and beta = C B,
/// A = (1 + C_V)/t + t^-n and B = C_V/t + t^-n.
///
/// `e_max` is the largest eigenvalue of the {rho <= 0} block of U* P_(ct) U.
pub fn smallest_constant_for(e_max: f64, t: f64, n: usize, c_v: f64) -> f64 {
    let e = e_max.clamp(0.0, 1.0);
    if e == 0.0 {
        return 0.0;
    }
    let tn = t.powi(-(n as i32));
    let a = (1.0 + c_v) / t + tn;
    let b = c_v / t + tn;
    // A B C^2 - (e/t) C - e = 0
    let lin = e / t;
    (lin + (lin * lin + 4.0 * a * b * e).sqrt()) / (2.0 * a * b)
}

struct Masks {
    upper: Vec<usize>,
    lower: Vec<usize>,
    positive: Vec<bool>,
}

fn masks(rho: &RealField, level: f64) -> Masks {
    Masks {
        upper: (0..rho.len()).filter(|&i| rho.values[i] > level).collect(),
        lower: (0..rho.len()).filter(|&i| rho.values[i] <= 0.0).collect(),
        positive: rho.values.iter().map(|&x| x > 0.0).collect(),
    }
}

/// Largest eigenvalue of the lower block of U* P U.
fn block_max(u: &CMat, m: &Masks) -> Result<f64> {
    if m.upper.is_empty() || m.lower.is_empty() {
        return Ok(0.0);
    }
    let w = CMat::from_fn(m.upper.len(), m.lower.len(), |a, b| u[(m.upper[a], m.lower[b])]);
    let block = w.adjoint() * &w;
    let eig = eigenvalues_hermitian(&block)?;
    Ok(eig.iter().cloned().fold(0.0, f64::max))
}

/// min eig(RHS - U* P U) for the given constant.
fn dense_margin(u: &CMat, m: &Masks, constant: f64, t: f64, n: usize, c_v: f64) -> Result<f64> {
    let dim = u.nrows();
    let w = CMat::from_fn(m.upper.len(), dim, |a, j| u[(m.upper[a], j)]);
    let lhs = w.adjoint() * &w;
    let tn = t.powi(-(n as i32));
    let mut d = CMat::from_fn(dim, dim, |i, j| -lhs[(i, j)]);
    for i in 0..dim {
        let p0 = if m.positive[i] { 1.0 } else { 0.0 };
        d[(i, i)] += p0 + constant * (p0 + c_v) / t + constant * tn;
    }
    crate::linalg::symmetrize(&mut d);
    let eig = eigenvalues_hermitian(&d)?;
    Ok(eig.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// alpha_t(P_(c|t|)) <= P_0 + C (P_0 + C_V)|t|^-1 + C |t|^-n over the sample times.
///
/// The constant is fitted per sample from the exact block reduction and then
/// the joint constant is verified densely. Report extras hold the constant
/// each variant needs on its own and the state-level constant of the batch.
pub fn main_inequality_check(
    op: &NonlocalOperator,
    potential: &PotentialSpec,
    phi: &RealField,
    c: f64,
    n: usize,
    times: &[f64],
    opts: &MainInequalityOptions,
) -> Result<InequalityReport> {
    if phi.len() != op.dim() {
        return Err(LabError::DimensionMismatch("reference field and operator sizes differ".into()));
    }
    if times.iter().any(|t| !(*t > 0.0)) {
        return Err(LabError::param("times", "sample times must be positive"));
    }
    if opts.variants.is_empty() {
        return Err(LabError::param("variants", "at least one reference variant is required"));
    }
    let kappa = schur_kappa(op, phi, 1)?;
    if !(c > kappa) {
        return Err(LabError::Hypothesis(format!("speed c = {c} must exceed kappa = {kappa}")));
    }
    let lat = &op.lattice;
    let us = unitaries(op, potential, times, opts.dt)?;

    let mut per_variant = Vec::new();
    let mut all_masks = Vec::new();
    for variant in &opts.variants {
        let rho = variant.apply(phi);
        let mut needs = Vec::with_capacity(times.len());
        let mut ms = Vec::with_capacity(times.len());
        for (k, &t) in times.iter().enumerate() {
            let m = masks(&rho, c * t);
            let e = block_max(&us[k], &m)?;
            needs.push(smallest_constant_for(e, t, n, opts.c_v));
            ms.push(m);
        }
        per_variant.push(needs);
        all_masks.push(ms);
    }
    let variant_c: Vec<f64> = per_variant.iter().map(|v| v.iter().cloned().fold(0.0, f64::max)).collect();
    let joint = variant_c.iter().cloned().fold(0.0, f64::max);

    let mut samples = Vec::new();
    let mut variant_index = Vec::new();
    let mut margins = Vec::new();
    for (vi, ms) in all_masks.iter().enumerate() {
        for (k, &t) in times.iter().enumerate() {
            let margin = if opts.dense_check {
                dense_margin(&us[k], &ms[k], joint, t, n, opts.c_v)?
            } else {
                let m = &ms[k];
                let e = block_max(&us[k], m)?;
                let tn = t.powi(-(n as i32));
                let alpha = 1.0 + joint * ((1.0 + opts.c_v) / t + tn);
                let beta = joint * (opts.c_v / t + tn);
                if e == 0.0 {
                    1.0 - 1.0 / alpha
                } else {
                    1.0 - ((1.0 - e) / alpha + e / beta)
                }
            };
            samples.push(t);
            variant_index.push(vi as f64);
            margins.push(margin);
        }
    }
    let mut report =
        InequalityReport::new("main_inequality", samples, margins, opts.tolerance).with_constant(joint);
    report.extra("kappa", kappa);
    report.extra("c", c);
    for (variant, (cv, needs)) in opts.variants.iter().zip(variant_c.iter().zip(&per_variant)) {
        report.extra(&format!("c_{}", variant.label()), *cv);
        report.series.insert(format!("needed_{}", variant.label()), needs.clone());
    }
    report.series.insert("variant".into(), variant_index);

    if !opts.batch.is_empty() {
        let rho = opts.variants[0].apply(phi);
        let w = lat.cell_volume();
        let mut scalar = 0.0f64;
        for psi0 in &opts.batch {
            if psi0.len() != op.dim() {
                return Err(LabError::DimensionMismatch("batch state size differs from operator".into()));
            }
            if psi0.amplitudes.iter().zip(&rho.values).any(|(a, &r)| r > 0.0 && a.norm_sqr() > 0.0) {
                return Err(LabError::Hypothesis("batch state is not supported in {phi <= 0}".into()));
            }
            let mass = psi0.norm_sqr(lat);
            let col = CMat::from_fn(op.dim(), 1, |i, _| psi0.amplitudes[i]);
            for (k, &t) in times.iter().enumerate() {
                let y = &us[k] * &col;
                let tail = w * (0..op.dim())
                    .filter(|&i| rho.values[i] > c * t)
                    .map(|i| y[(i, 0)].norm_sqr())
                    .sum::<f64>();
                let weight = (opts.c_v / t + t.powi(-(n as i32))) * mass;
                scalar = scalar.max(tail / weight);
            }
        }
        report.extra("scalar_c", scalar);
        if scalar > variant_c[0] * (1.0 + 1e-8) + 1e-12 {
            report.fail(format!(
                "state-level constant {scalar:.6e} exceeds the operator constant {:.6e}",
                variant_c[0]
            ));
        }
    }
    Ok(report)
}
