use std::path::Path;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::lattice::{distance_function, Lattice, RegionSet};
use crate::propagate::StateTrajectory;

/// Tail masses at or below this level are treated as round-off.
pub const ROUND_OFF_FLOOR: f64 = 1e-14;
const MIN_FIT_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Fitted,
    /// Every value in the window is exactly zero.
    ExactZero,
    /// Too few values above the round-off floor to fit.
    Inconclusive,
}

/// Least-squares fit of log(value) = log(A) + gamma log(t) on a window.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub n: usize,
    pub fit_window: [f64; 2],
    pub status: FitStatus,
    pub fitted_exponent: Option<f64>,
    pub prefactor: Option<f64>,
    /// RMS of the log residuals.
    pub residual: Option<f64>,
    pub points_used: usize,
    /// sup over the window of |t|^n value.
    pub sup_weighted: f64,
    /// sup over all t != 0 of |t|^n value.
    pub sup_weighted_all: f64,
}

impl DecayFit {
    /// CSV with columns time, value, weighted (= |t|^n value).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["time", "value", "weighted"])?;
        for (t, v) in self.times.iter().zip(&self.values) {
            w.write_record([t.to_string(), v.to_string(), (t.abs().powi(self.n as i32) * v).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn fit_decay(times: &[f64], values: &[f64], window: [f64; 2], n: usize) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(LabError::DimensionMismatch("times and values differ in length".into()));
    }
    if !(window[0] > 0.0 && window[1] > window[0]) {
        return Err(LabError::param("fit_window", format!("need 0 < t_min < t_max, got {window:?}")));
    }
    let in_window: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= window[0] && **t <= window[1])
        .map(|(&t, &v)| (t, v))
        .collect();
    let weight = |t: f64, v: f64| t.abs().powi(n as i32) * v;
    let sup_weighted = in_window.iter().map(|&(t, v)| weight(t, v)).fold(0.0, f64::max);
    let sup_weighted_all = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t != 0.0)
        .map(|(&t, &v)| weight(t, v))
        .fold(0.0, f64::max);
    let usable: Vec<(f64, f64)> = in_window
        .iter()
        .filter(|(_, v)| *v > ROUND_OFF_FLOOR)
        .map(|&(t, v)| (t.ln(), v.ln()))
        .collect();
    let mut fit = DecayFit {
        times: times.to_vec(),
        values: values.to_vec(),
        n,
        fit_window: window,
        status: FitStatus::Inconclusive,
        fitted_exponent: None,
        prefactor: None,
        residual: None,
        points_used: usable.len(),
        sup_weighted,
        sup_weighted_all,
    };
    if !in_window.is_empty() && in_window.iter().all(|(_, v)| *v == 0.0) {
        fit.status = FitStatus::ExactZero;
        return Ok(fit);
    }
    if usable.len() < MIN_FIT_POINTS {
        return Ok(fit);
    }
    let m = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / m;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = usable.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Ok(fit);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = usable.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    fit.status = FitStatus::Fitted;
    fit.fitted_exponent = Some(slope);
    fit.prefactor = Some(intercept.exp());
    fit.residual = Some((rss / m).sqrt());
    Ok(fit)
}

/// ||1_(X^c_(c|t|)) psi_t||^2 along the trajectory.
pub fn tail_mass_series(traj: &StateTrajectory, lattice: &Lattice, x: &RegionSet, c: f64) -> Result<Vec<f64>> {
    if !(c >= 0.0) {
        return Err(LabError::param("c", "speed must be nonnegative"));
    }
    let d = distance_function(lattice, x)?;
    let w = lattice.cell_volume();
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, psi)| {
            if psi.len() != d.len() {
                return Err(LabError::DimensionMismatch("state and lattice sizes differ".into()));
            }
            let r = c * t.abs();
            Ok(w * psi
                .amplitudes
                .iter()
                .zip(&d.values)
                .filter(|(_, &dist)| dist > r)
                .map(|(a, _)| a.norm_sqr())
                .sum::<f64>())
        })
        .collect()
}

fn check_initial_support(traj: &StateTrajectory, x: &RegionSet) -> Result<()> {
    if let (Some(&t0), Some(psi0)) = (traj.times.first(), traj.states.first()) {
        if t0 == 0.0 && psi0.amplitudes.iter().zip(x.mask()).any(|(a, &inside)| !inside && a.norm_sqr() > 0.0) {
            return Err(LabError::Hypothesis("initial state is not supported in X".into()));
        }
    }
    Ok(())
}

/// Decay of the mass outside the light cone X_(c|t|) on `window`.
pub fn lightcone_decay_fit(
    traj: &StateTrajectory,
    lattice: &Lattice,
    x: &RegionSet,
    c: f64,
    n: usize,
    window: [f64; 2],
) -> Result<DecayFit> {
    check_initial_support(traj, x)?;
    let tail = tail_mass_series(traj, lattice, x, c)?;
    fit_decay(&traj.times, &tail, window, n)
}

/// (int tail(t)^p dt)^(1/p): trapezoid over the samples plus the fitted power-law tail beyond them.
#[derive(Clone, Debug, Serialize)]
pub struct StrichartzEstimate {
    pub p: f64,
    pub window_part: f64,
    pub tail_part: f64,
    pub value: f64,
    pub finite: bool,
}

pub fn strichartz_from_series(
    times: &[f64],
    tail: &[f64],
    p: f64,
    n: usize,
    extrapolation: Option<&DecayFit>,
) -> Result<StrichartzEstimate> {
    if !(p > 1.0 / n as f64) {
        return Err(LabError::param("p_exp", format!("exponent {p} must exceed 1/n = {}", 1.0 / n as f64)));
    }
    if times.len() != tail.len() || times.len() < 2 {
        return Err(LabError::param("times", "need at least two samples with matching values"));
    }
    let window_part: f64 = times
        .windows(2)
        .zip(tail.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0].max(0.0).powf(p) + v[1].max(0.0).powf(p)))
        .sum();
    let end = *times.last().unwrap();
    let tail_part = match extrapolation {
        None => 0.0,
        Some(fit) => match fit.status {
            FitStatus::ExactZero => 0.0,
            FitStatus::Inconclusive => f64::NAN,
            FitStatus::Fitted => {
                let g = fit.fitted_exponent.unwrap();
                let a = fit.prefactor.unwrap();
                let q = p * g + 1.0;
                if q < 0.0 {
                    a.powf(p) * end.powf(q) / -q
                } else {
                    f64::INFINITY
                }
            }
        },
    };
    let total = window_part + tail_part;
    let value = total.powf(1.0 / p);
    Ok(StrichartzEstimate {
        p,
        window_part,
        tail_part,
        value,
        finite: value.is_finite(),
    })
}

/// Strichartz-type norm of the tail mass outside X_(c|t|) over the trajectory.
pub fn strichartz_norm(
    traj: &StateTrajectory,
    lattice: &Lattice,
    x: &RegionSet,
    c: f64,
    p: f64,
    n: usize,
    fit_window: [f64; 2],
) -> Result<StrichartzEstimate> {
    if !(p > 1.0 / n as f64) {
        return Err(LabError::param("p_exp", format!("exponent {p} must exceed 1/n = {}", 1.0 / n as f64)));
    }
    check_initial_support(traj, x)?;
    let tail = tail_mass_series(traj, lattice, x, c)?;
    let fit = fit_decay(&traj.times, &tail, fit_window, n)?;
    strichartz_from_series(&traj.times, &tail, p, n, Some(&fit))
}

/// h^d #{x outside X_(c|t|) : |psi_t(x)|^2 >= |t|^-n} against its Markov bound |t|^n tail_mass(t).
#[derive(Clone, Debug, Serialize)]
pub struct MarkovSeries {
    pub times: Vec<f64>,
    pub measure: Vec<f64>,
    pub bound: Vec<f64>,
    /// Round-off allowance added to the bound.
    pub slack: Vec<f64>,
    pub violations: usize,
}

pub fn markov_tail_measure(
    traj: &StateTrajectory,
    lattice: &Lattice,
    x: &RegionSet,
    c: f64,
    n: usize,
) -> Result<MarkovSeries> {
    let d = distance_function(lattice, x)?;
    let w = lattice.cell_volume();
    let mut out = MarkovSeries {
        times: Vec::new(),
        measure: Vec::new(),
        bound: Vec::new(),
        slack: Vec::new(),
        violations: 0,
    };
    for (&t, psi) in traj.times.iter().zip(&traj.states) {
        if t == 0.0 {
            continue;
        }
        let r = c * t.abs();
        let level = t.abs().powi(-(n as i32));
        let mut count = 0usize;
        let mut mass = 0.0;
        for (a, &dist) in psi.amplitudes.iter().zip(&d.values) {
            if dist > r {
                let q = a.norm_sqr();
                mass += q;
                if q >= level {
                    count += 1;
                }
            }
        }
        let measure = w * count as f64;
        let bound = t.abs().powi(n as i32) * w * mass;
        // Summation may round each of the `count` terms down by one ulp.
        let slack = 4.0 * f64::EPSILON * (count as f64 + 1.0) * measure;
        if measure > bound + slack {
            out.violations += 1;
        }
        out.times.push(t);
        out.measure.push(measure);
        out.bound.push(bound);
        out.slack.push(slack);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let t: Vec<f64> = (1..=100).map(|k| k as f64 * 0.5).collect();
        let v: Vec<f64> = t.iter().map(|x| 3.0 * x.powf(-2.5)).collect();
        let f = fit_decay(&t, &v, [5.0, 50.0], 2).unwrap();
        assert_eq!(f.status, FitStatus::Fitted);
        assert!((f.fitted_exponent.unwrap() + 2.5).abs() < 1e-12);
        assert!((f.prefactor.unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn zero_and_floor_are_distinguished() {
        let t: Vec<f64> = (1..=20).map(|k| k as f64).collect();
        let z = vec![0.0; 20];
        assert_eq!(fit_decay(&t, &z, [1.0, 20.0], 2).unwrap().status, FitStatus::ExactZero);
        let tiny = vec![1e-16; 20];
        assert_eq!(fit_decay(&t, &tiny, [1.0, 20.0], 2).unwrap().status, FitStatus::Inconclusive);
    }

    #[test]
    fn strichartz_closed_form() {
        let n = 2;
        let t: Vec<f64> = (0..=4900).map(|k| 1.0 + k as f64 * 0.01).collect();
        let v: Vec<f64> = t.iter().map(|x| x.powi(-(n as i32))).collect();
        let fit = fit_decay(&t, &v, [1.0, 50.0], n).unwrap();
        let p = 2.0 / n as f64;
        let s = strichartz_from_series(&t, &v, p, n, Some(&fit)).unwrap();
        let exact = (1.0 / (p * n as f64 - 1.0)).powf(1.0 / p);
        assert!((s.value - exact).abs() < 1e-4, "{}", s.value);
        assert!(strichartz_from_series(&t, &v, 0.5, n, None).is_err());
    }
}
