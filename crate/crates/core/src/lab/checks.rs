use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{CheckConfig, CheckKind, ScenarioConfig};
use super::plot;
use super::prepare::Prepared;
use super::random::{random_hermitian, random_lipschitz_field, rng_for};
use super::run::Artifacts;
use crate::cutoff::{
    combine_cutoffs, default_exponent, make_cutoff, make_cutoff_family, remainder_integral, AnalyticExtension,
    BumpFamily, CutoffFunction, GaussianProfile, SmoothProfile,
};
use crate::error::{LabError, Result};
use crate::kernelop::{lattice_moment, schur_kappa};
use crate::lattice::lipschitz_constant;
use crate::linalg::{eigh_complex, min_eigenvalue_hermitian, reconstruct, spectral_norm, CMat};
use crate::opcalc::{
    commutator_expansion, hs_apply, iterated_commutator, kernel_commutator, AstloFamily, HermitianOperator,
    HsOptions, Reference,
};
use crate::propagate::{expectation, NlsSpec, SpectralPropagator, StateTrajectory};
use crate::verify::{
    default_rme_xi, envelope_check, geometric_sandwich_check, heisenberg, lightcone_decay_fit,
    main_inequality_check, markov_tail_measure, potential_commutator_norm, require_stable, rme_check,
    soliton_speed_test, strichartz_norm, unitaries, FitStatus, InequalityReport, MainInequalityOptions, RmeOptions,
    SolitonOptions,
};

/// Checks whose speeds are measured against d_X rather than the configured reference.
fn uses_region(kind: &CheckKind) -> bool {
    matches!(
        kind,
        CheckKind::DecayFit { .. }
            | CheckKind::Strichartz { .. }
            | CheckKind::Markov { .. }
            | CheckKind::Soliton { .. }
            | CheckKind::Unitarity { .. }
    )
}

/// (c, kappa) for checks that take a light-cone speed.
pub fn resolved_speed(p: &Prepared, kind: &CheckKind) -> Option<(f64, f64)> {
    let kappa = p.kappa_for(uses_region(kind));
    kind.speed().map(|c| (c.resolve(kappa), kappa))
}

/// Every speed must exceed its kappa; checked before any propagation.
pub fn validate_speeds(p: &Prepared, cfg: &ScenarioConfig) -> Result<()> {
    for (i, check) in cfg.checks.iter().enumerate() {
        if let Some((c, kappa)) = resolved_speed(p, &check.kind) {
            if !(c > kappa) {
                return Err(LabError::config(
                    format!("checks[{i}].c"),
                    format!("speed c = {c} must exceed kappa = {kappa}"),
                ));
            }
        }
        if let Some(delta) = cutoff_width(p, &check.kind) {
            if let Some((c, kappa)) = resolved_speed(p, &check.kind) {
                if !(delta < c - kappa) {
                    return Err(LabError::config(
                        format!("checks[{i}].delta"),
                        format!("cutoff width {delta} must be below c - kappa = {}", c - kappa),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Cutoff width: the override or (c - kappa)/3.
fn cutoff_width(p: &Prepared, kind: &CheckKind) -> Option<f64> {
    let (c, kappa) = resolved_speed(p, kind)?;
    let over = match kind {
        CheckKind::Rme { delta, .. } | CheckKind::Envelope { delta, .. } => *delta,
        CheckKind::Sandwich { .. } | CheckKind::Unitarity { .. } => None,
        _ => return None,
    };
    Some(over.unwrap_or((c - kappa) / 3.0))
}

/// The cutoff chi a check uses, if any.
pub fn check_cutoff(p: &Prepared, kind: &CheckKind) -> Result<Option<CutoffFunction>> {
    match kind {
        CheckKind::ExpansionSlope { n, delta, exponent, .. } => Ok(Some(make_cutoff_family(
            *delta,
            *n,
            BumpFamily::Polynomial {
                exponent: exponent.unwrap_or(default_exponent(*n)),
            },
        )?)),
        CheckKind::Sandwich { n, .. } | CheckKind::Rme { n, .. } | CheckKind::Envelope { n, .. } => {
            Ok(Some(make_cutoff(cutoff_width(p, kind).unwrap(), *n)?))
        }
        CheckKind::Unitarity { .. } => Ok(Some(make_cutoff(cutoff_width(p, kind).unwrap(), 2)?)),
        _ => Ok(None),
    }
}

/// Fixed-horizon scale s = (c - c') t_max / delta with c' = kappa + delta.
fn horizon_scale(c: f64, kappa: f64, delta: f64, t_max: f64) -> Result<f64> {
    let s = (c - kappa - delta) * t_max / delta;
    if !(s > 0.0) {
        return Err(LabError::Hypothesis(format!("scale {s} from c = {c}, kappa = {kappa}, delta = {delta} is not positive")));
    }
    Ok(s)
}

fn t_max(p: &Prepared) -> f64 {
    p.times.last().cloned().unwrap_or(0.0)
}

fn relative_frobenius(a: &CMat, b: &CMat) -> f64 {
    let diff = (a - b).norm_l2();
    let scale = b.norm_l2();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

fn sup_potential_commutator(p: &Prepared, reference: &Reference) -> Result<f64> {
    let mut g = 0.0f64;
    for &t in &p.times {
        if let Some(v) = p.potential.sample(t) {
            g = g.max(potential_commutator_norm(reference, &v)?);
        }
    }
    Ok(g)
}

#[derive(Serialize)]
struct SlopeRow {
    s: f64,
    residual_norm: f64,
    remainder_norm: f64,
    ceiling: f64,
}

fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, v)| **v > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

/// Residual decay for [H, A_s(chi)] in s, with the bound-normalized remainder.
pub fn expansion_slope_report(
    p: &Prepared,
    chi: &CutoffFunction,
    n: usize,
    scales: &[f64],
    side: crate::opcalc::ExpansionSide,
    t: f64,
) -> Result<InequalityReport> {
    let h = HermitianOperator::new(p.op.to_complex())?;
    let ext = AnalyticExtension::new(Arc::new(chi.clone()) as Arc<dyn SmoothProfile>, n + 1)?;
    let ceiling_c = remainder_integral(&ext, n + 1)?.value;
    let family = AstloFamily::new(Reference::Field(p.phi.clone()), Arc::new(chi.clone()), 1.0, scales[0])?;
    let rows: Vec<SlopeRow> = scales
        .par_iter()
        .map(|&s| {
            let fam = family.with_scale(s)?;
            let r = commutator_expansion(&h, &fam, chi, t, n, side, Some(ceiling_c))?;
            Ok(SlopeRow {
                s,
                residual_norm: r.residual_norm,
                remainder_norm: r.remainder_norm,
                ceiling: r.ceiling.unwrap_or(f64::NAN),
            })
        })
        .collect::<Result<_>>()?;
    let residuals: Vec<f64> = rows.iter().map(|r| r.residual_norm).collect();
    let normalized: Vec<f64> = rows
        .iter()
        .map(|r| if r.ceiling > 0.0 { r.remainder_norm / r.ceiling } else { 0.0 })
        .collect();
    let target = -((n + 1) as f64);
    let (slope_margin, slope) = match log_log_slope(scales, &residuals) {
        Some(g) => (0.2 - (g - target).abs(), g),
        None => (0.0, f64::NAN),
    };
    let hi = normalized.iter().cloned().fold(0.0, f64::max);
    let lo = normalized.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = if hi == 0.0 { 1.0 } else { hi / lo };
    let mut r = InequalityReport::new("expansion_slope", vec![0.0, 1.0], vec![slope_margin, 10.0 - ratio], 0.0);
    r.extra("slope", slope);
    r.extra("normalized_remainder_ratio", ratio);
    r.extra("ceiling_constant", ceiling_c);
    if slope.is_nan() {
        r.notes.push("residual vanishes at every scale".into());
    }
    r.series.insert("s".into(), scales.to_vec());
    r.series.insert("residual_norm".into(), residuals);
    r.series.insert("remainder_norm".into(), rows.iter().map(|r| r.remainder_norm).collect());
    r.series.insert("normalized_remainder".into(), normalized);
    Ok(r)
}

/// Recursive and kernel-form commutators on random references; margin 1e-12 minus relative error.
pub fn commutator_oracle_report(p: &Prepared, seed: u64, stream: u64, n: usize, instances: usize) -> Result<InequalityReport> {
    let h = p.op.to_complex();
    let errs: Vec<Vec<f64>> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let phi = random_lipschitz_field(&p.lattice, &mut rng_for(seed, stream + i as u64));
            let reference = Reference::Field(phi.clone());
            (1..=n + 1)
                .map(|k| {
                    let a = iterated_commutator(&h, &reference, k)?;
                    let b = kernel_commutator(&p.op, &phi, k)?;
                    Ok(relative_frobenius(&a, &b))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let flat: Vec<f64> = errs.into_iter().flatten().collect();
    let margins: Vec<f64> = flat.iter().map(|e| 1e-12 - e).collect();
    let mut r = InequalityReport::new("commutator_oracle", (0..flat.len()).map(|k| k as f64).collect(), margins, 0.0);
    r.extra("max_relative_error", flat.iter().cloned().fold(0.0, f64::max));
    r.series.insert("relative_error".into(), flat);
    Ok(r)
}

/// ||ad^k|| <= kappa_k <= L^k M_k, margins relative to each larger side.
pub fn norm_chain_report(p: &Prepared, seed: u64, stream: u64, n: usize, instances: usize) -> Result<InequalityReport> {
    let rows: Vec<Vec<(f64, f64, f64)>> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let phi = random_lipschitz_field(&p.lattice, &mut rng_for(seed, stream + i as u64));
            let lip = lipschitz_constant(&p.lattice, &phi);
            (1..=n + 1)
                .map(|k| {
                    let ad = kernel_commutator(&p.op, &phi, k)?;
                    let norm = spectral_norm(&ad)?;
                    let kappa = schur_kappa(&p.op, &phi, k as u32)?;
                    let chain = lip.powi(k as i32) * lattice_moment(&p.op, k as u32);
                    Ok((norm, kappa, chain))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let flat: Vec<(f64, f64, f64)> = rows.into_iter().flatten().collect();
    let rel = |big: f64, small: f64| if big > 0.0 { (big - small) / big } else { -small };
    let margins: Vec<f64> = flat.iter().map(|&(a, k, c)| rel(k, a).min(rel(c, k))).collect();
    let mut r = InequalityReport::new("norm_chain", (0..flat.len()).map(|k| k as f64).collect(), margins, 1e-10);
    r.series.insert("spectral_norm".into(), flat.iter().map(|x| x.0).collect());
    r.series.insert("schur_kappa".into(), flat.iter().map(|x| x.1).collect());
    r.series.insert("lipschitz_moment".into(), flat.iter().map(|x| x.2).collect());
    Ok(r)
}

/// Resolvent quadrature vs spectral calculus for a Gaussian on random Hermitian matrices.
pub fn hs_cross_check_report(seed: u64, stream: u64, instances: usize, max_dim: usize, p_max: usize) -> Result<InequalityReport> {
    let g = GaussianProfile::new(0.2, 0.8);
    let ext = AnalyticExtension::new(Arc::new(g), 3)?;
    let opts = HsOptions {
        abs_tol: 1e-9,
        rel_tol: 1e-8,
        ..HsOptions::default()
    };
    let rows: Vec<Vec<(f64, f64)>> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, stream + i as u64);
            let dim = 2 + (rand::Rng::random_range(&mut rng, 0..max_dim - 1));
            let a = random_hermitian(dim, &mut rng);
            let (vals, u) = eigh_complex(a.matrix())?;
            (0..=p_max)
                .map(|p| {
                    let fact: f64 = (1..=p).map(|k| k as f64).product();
                    let gv: Vec<_> = vals
                        .iter()
                        .map(|&l| num_complex::Complex64::new(g.derivative(p, l) / fact, 0.0))
                        .collect();
                    let exact = reconstruct(&u, &gv);
                    let r = hs_apply(&a, &ext, p, &opts)?;
                    Ok((spectral_norm(&(&r.operator - &exact))?, r.error_estimate))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let flat: Vec<(f64, f64)> = rows.into_iter().flatten().collect();
    let consistent = flat.iter().filter(|(err, est)| est >= err).count();
    let fraction = consistent as f64 / flat.len() as f64;
    let margins: Vec<f64> = flat.iter().map(|(e, _)| 1e-6 - e).collect();
    let mut r = InequalityReport::new("hs_cross_check", (0..flat.len()).map(|k| k as f64).collect(), margins, 0.0);
    r.extra("max_error", flat.iter().map(|x| x.0).fold(0.0, f64::max));
    r.extra("estimate_covers_error_fraction", fraction);
    r.series.insert("error".into(), flat.iter().map(|x| x.0).collect());
    r.series.insert("error_estimate".into(), flat.iter().map(|x| x.1).collect());
    if fraction < 0.9 {
        r.fail(format!("error estimate covers the observed error in only {consistent} of {} cases", flat.len()));
    }
    Ok(r)
}

/// Sandwich over random references; margin per time is the minimum over draws.
#[allow(clippy::too_many_arguments)]
pub fn sandwich_report(
    p: &Prepared,
    chi: &CutoffFunction,
    c: f64,
    kappa: f64,
    seed: u64,
    stream: u64,
    draws: usize,
    time_samples: usize,
) -> Result<InequalityReport> {
    let delta = chi.delta();
    let xi = combine_cutoffs(chi, chi, 1.0)?;
    let tm = t_max(p);
    let times: Vec<f64> = (1..=time_samples).map(|k| tm * k as f64 / time_samples as f64).collect();
    let c_prime = kappa + delta;
    let per_draw: Vec<Vec<f64>> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let phi = random_lipschitz_field(&p.lattice, &mut rng_for(seed, stream + i as u64));
            let r = geometric_sandwich_check(&phi, &[chi, &xi], &|t: f64| c * t.abs(), c_prime, delta, &times)?;
            Ok(r.margins)
        })
        .collect::<Result<_>>()?;
    let margins: Vec<f64> = (0..times.len())
        .map(|k| per_draw.iter().map(|m| m[k]).fold(f64::INFINITY, f64::min))
        .collect();
    let violations = per_draw.iter().flatten().filter(|m| **m < -1e-14).count();
    let mut r = InequalityReport::new("geometric_sandwich", times, margins, 1e-14);
    r.extra("draws", draws as f64);
    r.extra("violations", violations as f64);
    Ok(r)
}

fn sub_trajectory(traj: &StateTrajectory, t_end: f64) -> StateTrajectory {
    let keep: Vec<usize> = (0..traj.len()).filter(|&k| traj.times[k] <= t_end).collect();
    StateTrajectory {
        times: keep.iter().map(|&k| traj.times[k]).collect(),
        states: keep.iter().map(|&k| traj.states[k].clone()).collect(),
        dt: traj.dt,
        method: traj.method,
    }
}

/// Evenly thinned indices, first and last included.
fn thin(len: usize, max: usize) -> Vec<usize> {
    if len <= max {
        return (0..len).collect();
    }
    let mut out: Vec<usize> = (0..max).map(|k| k * (len - 1) / (max - 1)).collect();
    out.dedup();
    out
}

/// Norm drift, Heisenberg duality and positivity preservation along a trajectory.
pub fn unitarity_report(
    p: &Prepared,
    traj: &StateTrajectory,
    chi: &CutoffFunction,
    c: f64,
    dt: Option<f64>,
) -> Result<InequalityReport> {
    let lat = &p.lattice;
    let norms = traj.norms(lat);
    let n0 = norms[0];
    let mut samples = Vec::new();
    let mut margins = Vec::new();
    let mut drift = Vec::new();
    for (&t, &nt) in traj.times.iter().zip(&norms) {
        let d = (nt - n0).abs();
        samples.push(t);
        margins.push(1e-8 * (1.0 + t.abs()) - d);
        drift.push(d);
    }
    let scale = 2.0 * t_max(p).max(1.0);
    let family = AstloFamily::new(Reference::Field(p.distance.clone()), Arc::new(chi.clone()), c, scale)?;
    let picks = thin(traj.len(), 12);
    let pick_times: Vec<f64> = picks.iter().map(|&k| traj.times[k]).collect();
    let mass = traj.states[0].norm_sqr(lat);
    let spectral = if p.potential.is_none() { Some(SpectralPropagator::new(&p.op)?) } else { None };
    let stepped = match spectral {
        Some(_) => Vec::new(),
        None => unitaries(&p.op, &p.potential, &pick_times, dt)?,
    };
    let mut duality = Vec::new();
    let mut positivity = Vec::new();
    for (j, &k) in picks.iter().enumerate() {
        let t = traj.times[k];
        let u = match &spectral {
            Some(prop) => prop.unitary(t),
            None => stepped[j].clone(),
        };
        let a = family.astlo(t);
        let evolved = heisenberg(&u, &a);
        let lhs = expectation(&traj.states[0], &crate::opcalc::Realized::Dense(evolved.clone()), lat);
        let rhs = expectation(&traj.states[k], &a, lat);
        let gap = (lhs - rhs).abs();
        samples.push(t);
        margins.push(1e-10 * mass.max(1.0) - gap);
        duality.push(gap);
        if j % 3 == 0 {
            let mut sym = evolved;
            crate::linalg::symmetrize(&mut sym);
            let lo = min_eigenvalue_hermitian(&sym)?;
            samples.push(t);
            margins.push(lo + 1e-10);
            positivity.push(lo);
        }
    }
    let mut r = InequalityReport::new("unitarity", samples, margins, 0.0);
    r.extra("max_norm_drift", drift.iter().cloned().fold(0.0, f64::max));
    r.extra("max_duality_gap", duality.iter().cloned().fold(0.0, f64::max));
    r.extra("min_evolved_eigenvalue", positivity.iter().cloned().fold(f64::INFINITY, f64::min));
    r.series.insert("norm_drift".into(), drift);
    r.series.insert("duality_gap".into(), duality);
    Ok(r)
}

fn default_main_times(p: &Prepared) -> Vec<f64> {
    let pos: Vec<f64> = p.times.iter().cloned().filter(|t| *t >= 1.0).collect();
    thin(pos.len(), 10).into_iter().map(|k| pos[k]).collect()
}

/// Run one check, writing its artifacts, and return its report.
#[allow(clippy::too_many_arguments)]
pub fn run_check(
    p: &Prepared,
    cfg: &ScenarioConfig,
    index: usize,
    check: &CheckConfig,
    chi: Option<&CutoffFunction>,
    traj: Option<&StateTrajectory>,
    art: &mut Artifacts,
) -> Result<InequalityReport> {
    let name = check.name.as_str();
    let stream = (index as u64) << 32;
    let seed = cfg.seed;
    let dt = cfg.dynamics.dt;
    let speed = resolved_speed(p, &check.kind);
    let traj_or = || traj.ok_or_else(|| LabError::config(name.to_string(), "check needs a trajectory"));
    let mut report = match &check.kind {
        CheckKind::CommutatorOracle { n, instances } => commutator_oracle_report(p, seed, stream, *n, *instances)?,
        CheckKind::NormChain { n, instances } => norm_chain_report(p, seed, stream, *n, *instances)?,
        CheckKind::HsCrossCheck {
            instances,
            max_dim,
            p_max,
        } => hs_cross_check_report(seed, stream, *instances, *max_dim, *p_max)?,
        CheckKind::ExpansionSlope { n, scales, side, t, .. } => {
            let r = expansion_slope_report(p, chi.unwrap(), *n, scales, *side, *t)?;
            let rows = (0..scales.len()).map(|k| {
                vec![
                    r.series["s"][k].to_string(),
                    r.series["residual_norm"][k].to_string(),
                    r.series["remainder_norm"][k].to_string(),
                    r.series["normalized_remainder"][k].to_string(),
                ]
            });
            art.csv(&format!("{name}_scales.csv"), &["s", "residual_norm", "remainder_norm", "normalized_remainder"], rows)?;
            r
        }
        CheckKind::Sandwich {
            draws, time_samples, ..
        } => {
            let (c, kappa) = speed.unwrap();
            sandwich_report(p, chi.unwrap(), c, kappa, seed, stream, *draws, *time_samples)?
        }
        CheckKind::Rme {
            n,
            scale,
            times,
            fd_step,
            halve_fd_step,
            ..
        } => {
            let (c, kappa) = speed.unwrap();
            let chi = chi.unwrap();
            let tm = t_max(p);
            let s = match scale {
                Some(s) => *s,
                None => horizon_scale(c, kappa, chi.delta(), tm)?,
            };
            let family = AstloFamily::new(Reference::Field(p.phi.clone()), Arc::new(chi.clone()), c, s)?;
            let xi = default_rme_xi(chi, &p.bounds(*n)?, *n)?;
            let times = times.clone().unwrap_or_else(|| vec![0.0, 0.25 * tm, 0.5 * tm, tm]);
            let opts = RmeOptions {
                fd_step: *fd_step,
                dt,
                tolerance: 1e-8,
            };
            let mut r = rme_check(&p.op, &p.potential, &family, &xi, *n, &times, &opts)?;
            if *halve_fd_step {
                let half = RmeOptions {
                    fd_step: 0.5 * fd_step,
                    ..opts
                };
                let r2 = rme_check(&p.op, &p.potential, &family, &xi, *n, &times, &half)?;
                require_stable(&mut r, r2.smallest_c.unwrap_or(f64::NAN), 0.2, "fd_step_halving");
            }
            r
        }
        CheckKind::Envelope {
            n, c_v, double_scale, ..
        } => {
            let traj = traj_or()?;
            let (c, kappa) = speed.unwrap();
            let chi = chi.unwrap();
            let s = horizon_scale(c, kappa, chi.delta(), t_max(p))?;
            let reference = Reference::Field(p.phi.clone());
            let family = AstloFamily::new(reference.clone(), Arc::new(chi.clone()), c, s)?;
            let xi = default_rme_xi(chi, &p.bounds(*n)?, *n)?.into_iter().next().unwrap_or_else(|| chi.clone());
            let c_v = match c_v {
                Some(v) => *v,
                None => sup_potential_commutator(p, &reference)?,
            };
            let mut r = envelope_check(traj, &p.lattice, &family, &xi, *n, c_v)?;
            r.extra("c_v", c_v);
            if *double_scale {
                let r2 = envelope_check(traj, &p.lattice, &family.with_scale(2.0 * s)?, &xi, *n, c_v)?;
                let c2 = r2.smallest_c.unwrap_or(f64::NAN);
                r.extra("c_at_double_scale", c2);
                require_stable(&mut r, c2, 0.2, "scale_doubling");
            }
            let lhs = r.series["lhs"].clone();
            let rhs: Vec<f64> = lhs.iter().zip(&r.margins).map(|(l, m)| l + m).collect();
            art.csv(
                &format!("{name}_envelope.csv"),
                &["time", "lhs", "envelope"],
                (0..lhs.len()).map(|k| vec![traj.times[k].to_string(), lhs[k].to_string(), rhs[k].to_string()]),
            )?;
            art.svg(&format!("{name}_envelope.svg"), || plot::envelope(name, &traj.times, &lhs, &rhs))?;
            r
        }
        CheckKind::MainInequality {
            n,
            times,
            variants,
            c_v,
            batch,
            ..
        } => {
            let (c, _) = speed.unwrap();
            let times = times.clone().unwrap_or_else(|| default_main_times(p));
            let c_v = match c_v {
                Some(v) => *v,
                None => sup_potential_commutator(p, &Reference::Field(p.phi.clone()))?,
            };
            let mut opts = MainInequalityOptions {
                variants: variants.clone(),
                c_v,
                dt,
                ..Default::default()
            };
            let supported = p.initial_supported_in(&variants[0].apply(&p.phi));
            if *batch && supported {
                opts.batch = vec![p.psi0.clone()];
            }
            let mut r = main_inequality_check(&p.op, &p.potential, &p.phi, c, *n, &times, &opts)?;
            if *batch && !supported {
                r.notes.push("initial state is not supported in {phi <= 0}; state-level check skipped".into());
            }
            r
        }
        CheckKind::DecayFit { n, window, .. } => {
            let traj = traj_or()?;
            let (c, _) = speed.unwrap();
            let fit = lightcone_decay_fit(traj, &p.lattice, &p.region, c, *n, *window)?;
            let target = -(*n as f64) + 0.3;
            let mut r = match fit.status {
                FitStatus::Fitted => {
                    let mut r = InequalityReport::new("decay_fit", vec![0.0], vec![target - fit.fitted_exponent.unwrap()], 0.0);
                    r.extra("fitted_exponent", fit.fitted_exponent.unwrap());
                    r.extra("residual", fit.residual.unwrap());
                    r
                }
                FitStatus::ExactZero => {
                    let mut r = InequalityReport::new("decay_fit", vec![0.0], vec![0.0], 0.0);
                    r.notes.push("tail vanishes exactly on the window".into());
                    r
                }
                FitStatus::Inconclusive => {
                    let mut r = InequalityReport::new("decay_fit", vec![0.0], vec![0.0], 0.0);
                    r.fail("tail is below the round-off floor on the window: inconclusive");
                    r
                }
            }
            .with_constant(fit.sup_weighted_all);
            r.extra("sup_weighted_window", fit.sup_weighted);
            r.extra("points_used", fit.points_used as f64);
            art.with_path(&format!("{name}_tail.csv"), |path| fit.write_csv(path))?;
            art.json(&format!("{name}_fit.json"), &fit)?;
            art.svg(&format!("{name}_tail.svg"), || plot::tail_loglog(name, &fit.times, &fit.values, *n))?;
            r
        }
        CheckKind::Strichartz {
            n,
            p_exp,
            window,
            window_doubling,
            ..
        } => {
            let traj = traj_or()?;
            let (c, _) = speed.unwrap();
            let full = strichartz_norm(traj, &p.lattice, &p.region, c, *p_exp, *n, *window)?;
            let mut r = InequalityReport::new("strichartz", vec![0.0], vec![if full.finite { 1.0 } else { -1.0 }], 0.0)
                .with_constant(full.value);
            r.extra("window_part", full.window_part);
            r.extra("tail_part", full.tail_part);
            if *window_doubling {
                let half_end = 0.5 * t_max(p);
                let half_window = [window[0], window[1].min(half_end)];
                if half_window[1] > half_window[0] {
                    let sub = sub_trajectory(traj, half_end);
                    let half = strichartz_norm(&sub, &p.lattice, &p.region, c, *p_exp, *n, half_window)?;
                    r.extra("half_run_value", half.value);
                    require_stable(&mut r, half.value, 0.2, "window_doubling");
                } else {
                    r.notes.push("fit window does not fit in the first half of the run".into());
                }
            }
            r
        }
        CheckKind::Markov { n, .. } => {
            let traj = traj_or()?;
            let (c, _) = speed.unwrap();
            let m = markov_tail_measure(traj, &p.lattice, &p.region, c, *n)?;
            let margins: Vec<f64> = (0..m.times.len()).map(|k| m.bound[k] + m.slack[k] - m.measure[k]).collect();
            let mut r = InequalityReport::new("markov_tail", m.times.clone(), margins, 0.0);
            r.extra("violations", m.violations as f64);
            r.extra("sup_measure", m.measure.iter().cloned().fold(0.0, f64::max));
            r.series.insert("measure".into(), m.measure.clone());
            r.series.insert("bound".into(), m.bound.clone());
            r
        }
        CheckKind::Soliton {
            n,
            beta,
            g,
            t_max,
            samples,
            dt,
            ..
        } => {
            let (c, kappa) = speed.unwrap();
            let opts = SolitonOptions {
                c,
                n: *n,
                t_max: *t_max,
                samples: *samples,
                dt: *dt,
                ..Default::default()
            };
            let nls = NlsSpec::cubic(p.lattice.site_count(), *g);
            soliton_speed_test(&p.op, &p.psi0, &p.region, &[beta.resolve(kappa)], &nls, &p.psi0, &opts)?
        }
        CheckKind::Unitarity { .. } => {
            let traj = traj_or()?;
            let (c, _) = speed.unwrap();
            unitarity_report(p, traj, chi.unwrap(), c, dt)?
        }
    };
    report.name = name.to_string();
    art.report(name, &report)?;
    Ok(report)
}
