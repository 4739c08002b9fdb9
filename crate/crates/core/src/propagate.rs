//! Time evolution: spectral propagation for H_0, midpoint exponential stepping for
//! H_0 + V(t), and Strang splitting for the nonlinear equation.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{LabError, Result};
use crate::kernelop::NonlocalOperator;
use crate::lattice::{Lattice, RealField, State};
use crate::linalg::{eigh_real, hermitian_defect, max_abs, CMat, RMat};
use crate::opcalc::Realized;

/// V(t) sampled at one time.
#[derive(Clone, Debug)]
pub enum PotentialSample {
    Field(Vec<f64>),
    /// Dense matrix; checked for hermiticity before use.
    Operator(CMat),
}

pub type PotentialSampler = Arc<dyn Fn(f64) -> PotentialSample + Send + Sync>;

#[derive(Clone)]
pub enum PotentialSpec {
    None,
    Static(RealField),
    TimeDependent {
        sampler: PotentialSampler,
        /// Declared sup_t ||V(t)||; measured on the step grid when absent.
        bound: Option<f64>,
    },
}

impl std::fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PotentialSpec::None => write!(f, "None"),
            PotentialSpec::Static(_) => write!(f, "Static"),
            PotentialSpec::TimeDependent { bound, .. } => write!(f, "TimeDependent(bound={bound:?})"),
        }
    }
}

impl PotentialSpec {
    pub fn is_none(&self) -> bool {
        matches!(self, PotentialSpec::None)
    }

    pub fn sample(&self, t: f64) -> Option<PotentialSample> {
        match self {
            PotentialSpec::None => None,
            PotentialSpec::Static(f) => Some(PotentialSample::Field(f.values.clone())),
            PotentialSpec::TimeDependent { sampler, .. } => Some(sampler(t)),
        }
    }

    /// sup ||V(t)||: the declared bound or the largest sampled norm on `times`.
    pub fn bound(&self, times: &[f64]) -> f64 {
        match self {
            PotentialSpec::None => 0.0,
            PotentialSpec::Static(f) => f.values.iter().fold(0.0, |m, v| m.max(v.abs())),
            PotentialSpec::TimeDependent { bound: Some(b), .. } => *b,
            PotentialSpec::TimeDependent { sampler, .. } => times
                .iter()
                .map(|&t| sample_norm_bound(&sampler(t)))
                .fold(0.0, f64::max),
        }
    }
}

fn sample_norm_bound(s: &PotentialSample) -> f64 {
    match s {
        PotentialSample::Field(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        PotentialSample::Operator(m) => {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm()).sum::<f64>())
                .fold(0.0, f64::max)
        }
    }
}

/// States at requested sample times.
#[derive(Clone, Debug)]
pub struct StateTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub dt: Option<f64>,
    pub method: &'static str,
}

impl StateTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn norms(&self, lattice: &Lattice) -> Vec<f64> {
        self.states.iter().map(|s| s.norm_sqr(lattice).sqrt()).collect()
    }

    /// CSV with columns time, norm.
    pub fn write_csv(&self, lattice: &Lattice, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["time", "norm"])?;
        for (t, n) in self.times.iter().zip(self.norms(lattice)) {
            w.write_record([t.to_string(), n.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }
}

/// Default step min(1e-2, 0.1 / ||H_0||).
pub fn default_dt(op: &NonlocalOperator) -> f64 {
    let n = op.norm_estimate();
    if n > 0.0 {
        (0.1 / n).min(1e-2)
    } else {
        1e-2
    }
}

/// a * b for real a and complex b, via two real products.
pub fn real_times_complex(a: faer::MatRef<'_, f64>, b: &CMat) -> CMat {
    let re = RMat::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)].re);
    let im = RMat::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)].im);
    let pr = a * &re;
    let pi = a * &im;
    CMat::from_fn(pr.nrows(), pr.ncols(), |i, j| C64::new(pr[(i, j)], pi[(i, j)]))
}

fn column_of(psi: &[C64]) -> CMat {
    CMat::from_fn(psi.len(), 1, |i, _| psi[i])
}

/// Eigendecomposition of the real symmetric H_0, reused for every time.
#[derive(Clone, Debug)]
pub struct SpectralPropagator {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: RMat,
}

impl SpectralPropagator {
    pub fn new(op: &NonlocalOperator) -> Result<Self> {
        let (eigenvalues, eigenvectors) = eigh_real(&op.matrix)?;
        Ok(SpectralPropagator {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// e^{-itH} applied to the columns of `psi`.
    pub fn evolve_columns(&self, psi: &CMat, t: f64) -> CMat {
        let coeffs = real_times_complex(self.eigenvectors.transpose(), psi);
        let phased = CMat::from_fn(coeffs.nrows(), coeffs.ncols(), |i, j| {
            coeffs[(i, j)] * C64::from_polar(1.0, -self.eigenvalues[i] * t)
        });
        real_times_complex(self.eigenvectors.as_ref(), &phased)
    }

    pub fn evolve(&self, psi: &[C64], t: f64) -> Vec<C64> {
        let out = self.evolve_columns(&column_of(psi), t);
        (0..out.nrows()).map(|i| out[(i, 0)]).collect()
    }

    /// U(t) = V e^{-it Lambda} V^T as a dense matrix.
    pub fn unitary(&self, t: f64) -> CMat {
        let n = self.dim();
        let phased = CMat::from_fn(n, n, |i, j| {
            C64::from_polar(self.eigenvectors[(j, i)], 0.0) * C64::from_polar(1.0, -self.eigenvalues[i] * t)
        });
        real_times_complex(self.eigenvectors.as_ref(), &phased)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(LabError::param("times", "sample times must be finite and nonnegative"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(LabError::param("times", "sample times must be nondecreasing"));
    }
    Ok(())
}

/// psi_t = e^{-itH_0} psi_0 at each requested time.
pub fn evolve_autonomous(op: &NonlocalOperator, psi0: &State, times: &[f64]) -> Result<StateTrajectory> {
    let prop = SpectralPropagator::new(op)?;
    evolve_with_spectral(&prop, psi0, times)
}

pub fn evolve_with_spectral(prop: &SpectralPropagator, psi0: &State, times: &[f64]) -> Result<StateTrajectory> {
    if psi0.len() != prop.dim() {
        return Err(LabError::DimensionMismatch(format!("state {} vs operator {}", psi0.len(), prop.dim())));
    }
    let states = times
        .iter()
        .map(|&t| {
            if t == psi0.time {
                State::new(psi0.amplitudes.clone(), t)
            } else {
                State::new(prop.evolve(&psi0.amplitudes, t - psi0.time), t)
            }
        })
        .collect();
    Ok(StateTrajectory {
        times: times.to_vec(),
        states,
        dt: None,
        method: "spectral",
    })
}

/// H(t) = H_0 + V(t), applied to column blocks.
struct Generator<'a> {
    h0: &'a RMat,
    potential: Option<PotentialSample>,
}

impl Generator<'_> {
    fn apply(&self, x: &CMat) -> CMat {
        let mut y = real_times_complex(self.h0.as_ref(), x);
        match &self.potential {
            None => {}
            Some(PotentialSample::Field(v)) => {
                for j in 0..x.ncols() {
                    for i in 0..x.nrows() {
                        y[(i, j)] += x[(i, j)] * v[i];
                    }
                }
            }
            Some(PotentialSample::Operator(m)) => {
                y = y + m * x;
            }
        }
        y
    }

    fn norm_bound(&self, h0_norm: f64) -> f64 {
        h0_norm + self.potential.as_ref().map(sample_norm_bound).unwrap_or(0.0)
    }
}

fn check_potential(sample: &PotentialSample, n: usize, t: f64) -> Result<()> {
    match sample {
        PotentialSample::Field(v) => {
            if v.len() != n {
                return Err(LabError::DimensionMismatch(format!("potential has {} entries, expected {n}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(LabError::BlowUp {
                    time: t,
                    reason: "potential is not finite".into(),
                });
            }
        }
        PotentialSample::Operator(m) => {
            if m.nrows() != n || m.ncols() != n {
                return Err(LabError::DimensionMismatch(format!("potential has dim {}, expected {n}", m.nrows())));
            }
            let d = hermitian_defect(m);
            if d > 1e-12 * max_abs(m).max(1e-300) {
                return Err(LabError::NonHermitian(format!("V({t}) has |V - V*| = {d:.3e}")));
            }
        }
    }
    Ok(())
}

/// e^{-i dt H} x by a Taylor series, sub-stepped so each piece has ||H dt|| <= 1/2.
fn taylor_step(gen: &Generator<'_>, x: &CMat, dt: f64, h0_norm: f64) -> CMat {
    let norm = gen.norm_bound(h0_norm) * dt.abs();
    let pieces = (norm / 0.5).ceil().max(1.0) as usize;
    let tau = dt / pieces as f64;
    let mut y = x.clone();
    for _ in 0..pieces {
        let mut term = y.clone();
        let mut acc = y.clone();
        let scale = y.norm_l2().max(1e-300);
        for k in 1..60 {
            let applied = gen.apply(&term);
            let f = C64::new(0.0, -tau / k as f64);
            term = CMat::from_fn(applied.nrows(), applied.ncols(), |i, j| applied[(i, j)] * f);
            acc = acc + &term;
            if term.norm_l2() <= 1e-17 * scale {
                break;
            }
        }
        y = acc;
    }
    y
}

/// Midpoint exponential stepping of the columns of `x0` from t = 0, sampling at `times`.
fn step_columns(
    op: &NonlocalOperator,
    potential: &PotentialSpec,
    x0: &CMat,
    times: &[f64],
    dt: f64,
    mut on_sample: impl FnMut(f64, &CMat) -> Result<()>,
) -> Result<()> {
    check_times(times)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(LabError::param("dt", format!("step must be positive, got {dt}")));
    }
    let n = op.dim();
    let h0_norm = op.norm_estimate();
    let mut x = x0.clone();
    let mut t = 0.0;
    for &target in times {
        let span = target - t;
        let steps = (span / dt - 1e-9).ceil().max(0.0) as usize;
        let h = if steps > 0 { span / steps as f64 } else { 0.0 };
        for k in 0..steps {
            let mid = t + (k as f64 + 0.5) * h;
            let sample = potential.sample(mid);
            if let Some(s) = &sample {
                check_potential(s, n, mid)?;
            }
            let gen = Generator {
                h0: &op.matrix,
                potential: sample,
            };
            x = taylor_step(&gen, &x, h, h0_norm);
        }
        t = target;
        if x.norm_l2().is_nan() {
            return Err(LabError::BlowUp {
                time: t,
                reason: "state is not finite".into(),
            });
        }
        on_sample(t, &x)?;
    }
    Ok(())
}

/// Evolve under H_0 + V(t) with step `dt`, sampling at `times`.
pub fn evolve_nonautonomous(
    op: &NonlocalOperator,
    potential: &PotentialSpec,
    psi0: &State,
    times: &[f64],
    dt: f64,
) -> Result<StateTrajectory> {
    if psi0.len() != op.dim() {
        return Err(LabError::DimensionMismatch(format!("state {} vs operator {}", psi0.len(), op.dim())));
    }
    let mut states = Vec::with_capacity(times.len());
    step_columns(op, potential, &column_of(&psi0.amplitudes), times, dt, |t, x| {
        states.push(State::new((0..x.nrows()).map(|i| x[(i, 0)]).collect(), t));
        Ok(())
    })?;
    Ok(StateTrajectory {
        times: times.to_vec(),
        states,
        dt: Some(dt),
        method: "midpoint-exponential",
    })
}

/// U(t, 0) at each sample time, by the same stepping applied to the identity.
pub fn propagate_unitary(op: &NonlocalOperator, potential: &PotentialSpec, times: &[f64], dt: f64) -> Result<Vec<CMat>> {
    let n = op.dim();
    let id = crate::linalg::identity(n);
    let mut out = Vec::with_capacity(times.len());
    step_columns(op, potential, &id, times, dt, |_, x| {
        out.push(x.clone());
        Ok(())
    })?;
    Ok(out)
}

/// i d/dt psi = H_0 psi + W psi + f(|psi|^2) psi.
#[derive(Clone)]
pub struct NlsSpec {
    pub w: Vec<f64>,
    pub nonlinearity: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl NlsSpec {
    /// W = 0 and f(r) = g r.
    pub fn cubic(sites: usize, g: f64) -> Self {
        NlsSpec {
            w: vec![0.0; sites],
            nonlinearity: Arc::new(move |r| g * r),
        }
    }
}

/// Strang splitting: half nonlinear phase, full e^{-i dt H_0}, half nonlinear phase.
pub fn evolve_nls(op: &NonlocalOperator, nls: &NlsSpec, psi0: &State, times: &[f64], dt: f64) -> Result<StateTrajectory> {
    check_times(times)?;
    let n = op.dim();
    if psi0.len() != n || nls.w.len() != n {
        return Err(LabError::DimensionMismatch("state, W and operator sizes differ".into()));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(LabError::param("dt", format!("step must be positive, got {dt}")));
    }
    let prop = SpectralPropagator::new(op)?;
    let mut psi = psi0.amplitudes.clone();
    let mut t = 0.0;
    let mut states = Vec::with_capacity(times.len());
    let half_phase = |psi: &mut Vec<C64>, h: f64, t: f64| -> Result<()> {
        for (k, a) in psi.iter_mut().enumerate() {
            let v = nls.w[k] + (nls.nonlinearity)(a.norm_sqr());
            if !v.is_finite() {
                return Err(LabError::BlowUp {
                    time: t,
                    reason: format!("nonlinear potential not finite at site {k}"),
                });
            }
            *a *= C64::from_polar(1.0, -0.5 * h * v);
        }
        Ok(())
    };
    for &target in times {
        let span = target - t;
        let steps = (span / dt - 1e-9).ceil().max(0.0) as usize;
        let h = if steps > 0 { span / steps as f64 } else { 0.0 };
        for k in 0..steps {
            let tk = t + k as f64 * h;
            half_phase(&mut psi, h, tk)?;
            psi = prop.evolve(&psi, h);
            half_phase(&mut psi, h, tk + h)?;
            if psi.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
                return Err(LabError::BlowUp {
                    time: tk + h,
                    reason: "amplitude is not finite".into(),
                });
            }
        }
        t = target;
        states.push(State::new(psi.clone(), t));
    }
    Ok(StateTrajectory {
        times: times.to_vec(),
        states,
        dt: Some(dt),
        method: "strang-splitting",
    })
}

/// <psi, A psi> with the lattice weight.
pub fn expectation(psi: &State, obs: &Realized, lattice: &Lattice) -> f64 {
    let w = lattice.cell_volume();
    match obs {
        Realized::Diagonal(v) => w * psi.amplitudes.iter().zip(v).map(|(a, x)| a.norm_sqr() * x).sum::<f64>(),
        Realized::Dense(m) => {
            let col = column_of(&psi.amplitudes);
            let y = m * &col;
            w * psi
                .amplitudes
                .iter()
                .enumerate()
                .map(|(i, a)| (a.conj() * y[(i, 0)]).re)
                .sum::<f64>()
        }
    }
}

/// t -> <psi_t, A(t) psi_t> along a trajectory.
pub fn heisenberg_expectation(traj: &StateTrajectory, lattice: &Lattice, obs: impl Fn(f64) -> Realized) -> Vec<f64> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| expectation(s, &obs(t), lattice))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernelop::{assemble_operator, KernelSpec};
    use crate::lattice::{Boundary, FieldUnits};

    fn setup() -> (Lattice, NonlocalOperator, State) {
        let lat = Lattice::new(1, 8.0, 32, Boundary::Periodic).unwrap();
        let op = assemble_operator(&lat, &KernelSpec::power_law(5.0)).unwrap();
        let psi = State::gaussian(&lat, &[0.0], 1.0, &[0.0]);
        (lat, op, psi)
    }

    #[test]
    fn spectral_preserves_norm_and_reverses() {
        let (lat, op, psi) = setup();
        let prop = SpectralPropagator::new(&op).unwrap();
        let fwd = prop.evolve(&psi.amplitudes, 3.7);
        let s = State::new(fwd.clone(), 3.7);
        assert!((s.norm_sqr(&lat) - 1.0).abs() < 1e-12);
        let back = prop.evolve(&fwd, -3.7);
        let d: f64 = back.iter().zip(&psi.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(d < 1e-12);
    }

    #[test]
    fn stepping_matches_spectral_without_potential() {
        let (_lat, op, psi) = setup();
        let times = [0.5, 1.0, 2.0];
        let a = evolve_autonomous(&op, &psi, &times).unwrap();
        let b = evolve_nonautonomous(&op, &PotentialSpec::None, &psi, &times, 0.05).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            let d: f64 = x.amplitudes.iter().zip(&y.amplitudes).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            assert!(d < 1e-11, "{d}");
        }
    }

    #[test]
    fn static_potential_norm_is_conserved() {
        let (lat, op, psi) = setup();
        let v = RealField::from_fn(&lat, FieldUnits::Energy, |x| 0.3 * (x[0] * 0.4).cos());
        let traj = evolve_nonautonomous(&op, &PotentialSpec::Static(v), &psi, &[1.0, 4.0], 0.02).unwrap();
        for (t, n) in traj.times.iter().zip(traj.norms(&lat)) {
            assert!((n * n - 1.0).abs() <= 1e-8 * (1.0 + t));
        }
    }

    #[test]
    fn non_hermitian_potential_rejected() {
        let (_lat, op, psi) = setup();
        let n = op.dim();
        let sampler: PotentialSampler = Arc::new(move |_| {
            let mut m = CMat::zeros(n, n);
            m[(0, 1)] = C64::new(1.0, 0.0);
            PotentialSample::Operator(m)
        });
        let spec = PotentialSpec::TimeDependent { sampler, bound: None };
        let r = evolve_nonautonomous(&op, &spec, &psi, &[0.1], 0.05);
        assert!(matches!(r, Err(LabError::NonHermitian(_))));
    }

    #[test]
    fn nls_blow_up_is_reported() {
        let (_lat, op, psi) = setup();
        let nls = NlsSpec {
            w: vec![0.0; op.dim()],
            nonlinearity: Arc::new(|r| if r > 0.0 { f64::INFINITY } else { 0.0 }),
        };
        let r = evolve_nls(&op, &nls, &psi, &[0.1], 0.01);
        assert!(matches!(r, Err(LabError::BlowUp { .. })));
    }
}
