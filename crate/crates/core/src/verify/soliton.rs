use num_complex::Complex64 as C64;
use serde::Serialize;

use super::decay::{tail_mass_series, ROUND_OFF_FLOOR};
use super::InequalityReport;
use crate::error::{LabError, Result};
use crate::kernelop::{schur_kappa, NonlocalOperator};
use crate::lattice::{distance_function, Boundary, Lattice, RegionSet, State};
use crate::propagate::{evolve_nls, NlsSpec};

/// Mass of a rigidly translated profile outside the light cone X_(ct).
#[derive(Clone, Debug, Serialize)]
pub struct SyntheticCrossing {
    pub times: Vec<f64>,
    pub outside_mass: Vec<f64>,
    pub half_mass: f64,
    /// First sample after which more than half the mass stays outside X_(ct).
    pub flagged_at: Option<f64>,
    /// Geometric crossover (x_edge - median) / (|beta| - c) in one dimension.
    pub predicted: Option<f64>,
}

fn translate(lattice: &Lattice, psi: &State, cells: [i64; 2]) -> State {
    let n = lattice.points_per_axis() as i64;
    let d = lattice.dim();
    let periodic = lattice.boundary() == Boundary::Periodic;
    let mut out = vec![C64::new(0.0, 0.0); psi.len()];
    for (site, a) in psi.amplitudes.iter().enumerate() {
        let idx = lattice.axis_indices(site);
        let mut target = 0i64;
        let mut stride = 1i64;
        let mut inside = true;
        for axis in 0..d {
            let mut k = idx[axis] as i64 + cells[axis];
            if periodic {
                k = k.rem_euclid(n);
            } else if k < 0 || k >= n {
                inside = false;
            }
            target += k * stride;
            stride *= n;
        }
        if inside {
            out[target as usize] = *a;
        }
    }
    State::new(out, psi.time)
}

/// Point at which the mass of `psi` to its right (along axis 0) first drops to half.
fn mass_median(lattice: &Lattice, psi: &State) -> f64 {
    let total: f64 = psi.amplitudes.iter().map(|a| a.norm_sqr()).sum();
    let mut order: Vec<usize> = (0..psi.len()).collect();
    order.sort_by(|&a, &b| lattice.coords(a)[0].partial_cmp(&lattice.coords(b)[0]).unwrap());
    let mut acc = 0.0;
    for &i in &order {
        acc += psi.amplitudes[i].norm_sqr();
        if acc >= 0.5 * total {
            return lattice.coords(i)[0];
        }
    }
    lattice.coords(*order.last().unwrap())[0]
}

/// Translate `profile` by beta t (rounded to whole cells) and track the mass outside X_(ct).
pub fn synthetic_crossing(
    lattice: &Lattice,
    profile: &State,
    x: &RegionSet,
    beta: &[f64],
    c: f64,
    times: &[f64],
) -> Result<SyntheticCrossing> {
    if profile.len() != lattice.site_count() || x.len() != lattice.site_count() {
        return Err(LabError::DimensionMismatch("profile, region and lattice sizes differ".into()));
    }
    if beta.len() != lattice.dim() || beta.iter().any(|b| !b.is_finite()) {
        return Err(LabError::param("beta", "velocity must be finite with one entry per axis"));
    }
    let d = distance_function(lattice, x)?;
    let w = lattice.cell_volume();
    let total = profile.norm_sqr(lattice);
    let half = 0.5 * total;
    let outside0: f64 = w * profile
        .amplitudes
        .iter()
        .zip(x.mask())
        .filter(|(_, &m)| !m)
        .map(|(a, _)| a.norm_sqr())
        .sum::<f64>();
    if !(outside0 < half) {
        return Err(LabError::Hypothesis("profile carries at least half its mass outside X".into()));
    }
    let h = lattice.spacing();
    let mut outside = Vec::with_capacity(times.len());
    for &t in times {
        let mut cells = [0i64; 2];
        for (axis, b) in beta.iter().enumerate() {
            cells[axis] = (b * t / h).round() as i64;
        }
        let moved = translate(lattice, profile, cells);
        let r = c * t.abs();
        outside.push(
            w * moved
                .amplitudes
                .iter()
                .zip(&d.values)
                .filter(|(_, &dist)| dist > r)
                .map(|(a, _)| a.norm_sqr())
                .sum::<f64>(),
        );
    }
    let mut flagged_at = None;
    for (k, &t) in times.iter().enumerate().rev() {
        if outside[k] > half {
            flagged_at = Some(t);
        } else {
            break;
        }
    }
    let speed = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
    let predicted = if lattice.dim() == 1 && speed > c {
        let median = mass_median(lattice, profile);
        let coords: Vec<f64> = x.sites().map(|i| lattice.coords(i)[0]).collect();
        let edge = if beta[0] > 0.0 {
            coords.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - median
        } else {
            median - coords.iter().cloned().fold(f64::INFINITY, f64::min)
        };
        Some(edge.max(0.0) / (speed - c))
    } else {
        None
    };
    Ok(SyntheticCrossing {
        times: times.to_vec(),
        outside_mass: outside,
        half_mass: half,
        flagged_at,
        predicted,
    })
}

/// Front speed of a nonlinear run: the smallest c' on a grid beyond which
/// |t|^n times the tail mass outside X_(c't) stops growing.
#[derive(Clone, Debug, Serialize)]
pub struct FrontSpeed {
    pub c_grid: Vec<f64>,
    pub non_growing: Vec<bool>,
    pub speed: Option<f64>,
    pub kappa: f64,
}

/// Late-half maximum of |t|^n tail no larger than the early-half maximum.
fn non_growing(times: &[f64], tail: &[f64], n: usize) -> bool {
    let pts: Vec<f64> = times
        .iter()
        .zip(tail)
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, v)| t.powi(n as i32) * v)
        .collect();
    let late_tail: Vec<f64> = times
        .iter()
        .zip(tail)
        .filter(|(t, _)| **t > 0.0)
        .map(|(_, v)| *v)
        .collect();
    if pts.len() < 2 {
        return true;
    }
    let mid = pts.len() / 2;
    if late_tail[mid..].iter().all(|v| *v <= ROUND_OFF_FLOOR) {
        return true;
    }
    let early = pts[..mid].iter().cloned().fold(0.0, f64::max);
    let late = pts[mid..].iter().cloned().fold(0.0, f64::max);
    late <= early
}

pub fn nls_front_speed(
    op: &NonlocalOperator,
    nls: &NlsSpec,
    psi0: &State,
    x: &RegionSet,
    n: usize,
    times: &[f64],
    dt: f64,
    c_grid: &[f64],
) -> Result<FrontSpeed> {
    let lattice = &op.lattice;
    let phi = distance_function(lattice, x)?;
    let kappa = schur_kappa(op, &phi, 1)?;
    let traj = evolve_nls(op, nls, psi0, times, dt)?;
    let mut grid = c_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut flags = Vec::with_capacity(grid.len());
    for &cp in &grid {
        let tail = tail_mass_series(&traj, lattice, x, cp)?;
        flags.push(non_growing(&traj.times, &tail, n));
    }
    let mut speed = None;
    for k in (0..grid.len()).rev() {
        if flags[k] {
            speed = Some(grid[k]);
        } else {
            break;
        }
    }
    Ok(FrontSpeed {
        c_grid: grid,
        non_growing: flags,
        speed,
        kappa,
    })
}

#[derive(Clone, Debug)]
pub struct SolitonOptions {
    /// Light-cone speed for the synthetic test; must exceed kappa.
    pub c: f64,
    pub n: usize,
    pub t_max: f64,
    pub samples: usize,
    pub dt: f64,
    /// Grid of trial front speeds as multiples of kappa.
    pub c_grid: Vec<f64>,
    /// Allowed front speed as a multiple of kappa.
    pub speed_factor: f64,
}

impl Default for SolitonOptions {
    fn default() -> Self {
        SolitonOptions {
            c: 0.0,
            n: 2,
            t_max: 20.0,
            samples: 200,
            dt: 1e-2,
            c_grid: (5..=40).map(|k| k as f64 * 0.05).collect(),
            speed_factor: 1.1,
        }
    }
}

/// Both soliton sub-tests. Margin 0 is the synthetic consistency (+1 when the
/// translate is flagged exactly when |beta| > c), margin 1 is two grid cells
/// minus the distance travelled between the predicted and the flagged
/// crossover, margin 2 is speed_factor * kappa minus the measured front speed.
pub fn soliton_speed_test(
    op: &NonlocalOperator,
    profile: &State,
    x: &RegionSet,
    beta: &[f64],
    nls: &NlsSpec,
    psi0: &State,
    opts: &SolitonOptions,
) -> Result<InequalityReport> {
    let lattice = &op.lattice;
    let phi = distance_function(lattice, x)?;
    let kappa = schur_kappa(op, &phi, 1)?;
    let c = if opts.c > 0.0 { opts.c } else { 1.5 * kappa };
    if !(c > kappa) {
        return Err(LabError::Hypothesis(format!("speed c = {c} must exceed kappa = {kappa}")));
    }
    let times: Vec<f64> = (0..=opts.samples)
        .map(|k| opts.t_max * k as f64 / opts.samples as f64)
        .collect();
    let syn = synthetic_crossing(lattice, profile, x, beta, c, &times)?;
    let speed = beta.iter().map(|b| b * b).sum::<f64>().sqrt();
    let consistent = if speed > c {
        syn.flagged_at.is_some()
    } else {
        speed > kappa || syn.flagged_at.is_none()
    };
    let grid: Vec<f64> = opts.c_grid.iter().map(|m| m * kappa).collect();
    let front = nls_front_speed(op, nls, psi0, x, opts.n, &times, opts.dt, &grid)?;
    let dyn_margin = match front.speed {
        Some(v) => opts.speed_factor * kappa - v,
        None => f64::NEG_INFINITY,
    };
    let cells = 2.0 * lattice.spacing();
    let offset_margin = match (syn.flagged_at, syn.predicted) {
        (Some(f), Some(p)) => cells - (f - p).abs() * (speed - c),
        (None, Some(_)) => f64::NEG_INFINITY,
        _ => cells,
    };
    let margins = vec![if consistent { 1.0 } else { -1.0 }, offset_margin, dyn_margin];
    let mut r = InequalityReport::new("soliton_speed", vec![0.0, 1.0, 2.0], margins, 0.0);
    r.extra("kappa", kappa);
    r.extra("c", c);
    r.extra("beta", speed);
    if let Some(t) = syn.flagged_at {
        r.extra("flagged_at", t);
    }
    if let Some(t) = syn.predicted {
        r.extra("predicted_crossover", t);
    }
    if let Some(v) = front.speed {
        r.extra("front_speed", v);
    }
    r.series.insert("outside_mass".into(), syn.outside_mass);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resting_profile_is_never_flagged() {
        let lat = Lattice::new(1, 20.0, 80, Boundary::Truncated).unwrap();
        let x = RegionSet::interval(&lat, -2.0, 2.0);
        let u = State::gaussian(&lat, &[0.0], 0.5, &[0.0]);
        let t: Vec<f64> = (0..50).map(|k| k as f64 * 0.2).collect();
        let s = synthetic_crossing(&lat, &u, &x, &[0.0], 1.0, &t).unwrap();
        assert!(s.flagged_at.is_none());
        assert!(s.predicted.is_none());
    }

    #[test]
    fn fast_translate_is_flagged_near_prediction() {
        let lat = Lattice::new(1, 40.0, 320, Boundary::Truncated).unwrap();
        let x = RegionSet::interval(&lat, -2.0, 2.0);
        let u = State::gaussian(&lat, &[0.0], 0.5, &[0.0]);
        let t: Vec<f64> = (0..400).map(|k| k as f64 * 0.02).collect();
        let s = synthetic_crossing(&lat, &u, &x, &[2.0], 1.0, &t).unwrap();
        let (f, p) = (s.flagged_at.unwrap(), s.predicted.unwrap());
        assert!((f - p).abs() * (2.0 - 1.0) <= 2.0 * lat.spacing(), "{f} vs {p}");
    }
}
