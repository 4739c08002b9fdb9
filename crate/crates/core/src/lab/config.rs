use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::kernelop::KernelSpec;
use crate::lattice::{Boundary, Lattice};
use crate::opcalc::ExpansionSide;
use crate::verify::ReferenceVariant;

/// One scenario: lattice, kernel, reference set, dynamics, checks and output.
///
/// The TOML and JSON encodings share this schema; see `scenarios/` for the
/// shipped presets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Seed for randomized checks.
    #[serde(default)]
    pub seed: u64,
    /// Worker threads for parameter sweeps; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
    pub lattice: LatticeConfig,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub reference: ReferenceConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub checks: Vec<CheckConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Half width L of the box [-L, L)^d.
    pub half_width: f64,
    /// Sites per axis.
    pub points: usize,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
}

fn default_dim() -> usize {
    1
}

fn default_boundary() -> Boundary {
    Boundary::Truncated
}

impl LatticeConfig {
    pub fn build(&self) -> Result<Lattice> {
        Lattice::new(self.dim, self.half_width, self.points, self.boundary).map_err(|e| prefix("lattice", e))
    }
}

/// The initial region X; phi defaults to its distance function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    #[serde(default)]
    pub region: RegionConfig,
    /// Explicit reference values, one per site, replacing d_X in the operator checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<f64>>,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig {
            region: RegionConfig::default(),
            phi: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionConfig {
    /// lo <= x_0 <= hi.
    Interval { lo: f64, hi: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    All,
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig::Interval { lo: -1.0, hi: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    #[serde(default)]
    pub potential: PotentialConfig,
    /// Step for stepping propagators; a norm-based default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    /// Number of uniform intervals on [0, t_max].
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Explicit sample times replacing the uniform grid; must start at 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub initial: InitialConfig,
}

fn default_t_max() -> f64 {
    10.0
}

fn default_samples() -> usize {
    100
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            potential: PotentialConfig::None,
            dt: None,
            t_max: default_t_max(),
            samples: default_samples(),
            times: None,
            initial: InitialConfig::default(),
        }
    }
}

impl DynamicsConfig {
    pub fn sample_times(&self) -> Vec<f64> {
        match &self.times {
            Some(t) => t.clone(),
            None => (0..=self.samples)
                .map(|k| self.t_max * k as f64 / self.samples as f64)
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    #[default]
    None,
    /// W(x) = -depth exp(-|x - center|^2 / width^2).
    StaticWell { depth: f64, center: Vec<f64>, width: f64 },
    /// V(t, x) = amplitude cos(frequency t) exp(-|x - center|^2 / width^2).
    Driven {
        amplitude: f64,
        frequency: f64,
        center: Vec<f64>,
        width: f64,
    },
    /// V(t) = amplitude cos(frequency t) |g><g| for the normalized Gaussian g.
    DrivenProjector {
        amplitude: f64,
        frequency: f64,
        center: Vec<f64>,
        width: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default = "origin")]
    pub center: Vec<f64>,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "origin")]
    pub momentum: Vec<f64>,
    /// Zero the Gaussian outside X before normalizing.
    #[serde(default = "yes")]
    pub restrict_to_region: bool,
}

fn origin() -> Vec<f64> {
    vec![0.0]
}

fn default_width() -> f64 {
    0.5
}

fn yes() -> bool {
    true
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            center: origin(),
            width: default_width(),
            momentum: origin(),
            restrict_to_region: true,
        }
    }
}

/// A speed either in lattice units or as a multiple of kappa.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Speed {
    Absolute(f64),
    Relative { times_kappa: f64 },
}

impl Speed {
    pub fn resolve(&self, kappa: f64) -> f64 {
        match *self {
            Speed::Absolute(c) => c,
            Speed::Relative { times_kappa } => times_kappa * kappa,
        }
    }
}

fn default_speed() -> Speed {
    Speed::Relative { times_kappa: 1.5 }
}

fn default_n() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    /// Unique name; also the stem of the check's output files.
    pub name: String,
    #[serde(flatten)]
    pub kind: CheckKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckKind {
    /// Recursive and kernel-form iterated commutators on random Lipschitz references.
    CommutatorOracle {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "thirty")]
        instances: usize,
    },
    /// ||ad^k|| <= kappa_k <= L^k M_k on random Lipschitz references.
    NormChain {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "thirty")]
        instances: usize,
    },
    /// Resolvent quadrature against the spectral calculus on random Hermitian matrices.
    HsCrossCheck {
        #[serde(default = "ten")]
        instances: usize,
        #[serde(default = "thirty")]
        max_dim: usize,
        #[serde(default = "one")]
        p_max: usize,
    },
    /// Decay of the order-n expansion residual of [H, A_s(chi)] in s.
    ExpansionSlope {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "dyadic_scales")]
        scales: Vec<f64>,
        #[serde(default = "default_slope_delta")]
        delta: f64,
        /// Bump exponent m; the default exponent for n when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exponent: Option<usize>,
        #[serde(default = "right")]
        side: ExpansionSide,
        #[serde(default)]
        t: f64,
    },
    /// Entrywise sandwich of the spectral projections by the observables.
    Sandwich {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_speed")]
        c: Speed,
        #[serde(default = "thousand")]
        draws: usize,
        #[serde(default = "twenty")]
        time_samples: usize,
    },
    Rme {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_speed")]
        c: Speed,
        /// Cutoff width; (c - kappa)/3 when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
        /// Scale s; the fixed-horizon choice when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
        /// Sample times; 0, t_max/4, t_max/2 and t_max when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        times: Option<Vec<f64>>,
        #[serde(default = "default_fd_step")]
        fd_step: f64,
        /// Refit with half the difference step and require agreement within 20%.
        #[serde(default)]
        halve_fd_step: bool,
    },
    Envelope {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_speed")]
        c: Speed,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
        /// sup_t ||[phi, V(t)]|| when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_v: Option<f64>,
        /// Refit at 2s and require agreement within 20%.
        #[serde(default)]
        double_scale: bool,
    },
    MainInequality {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_speed")]
        c: Speed,
        /// Positive sample times; up to ten dynamics samples in [1, t_max] when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        times: Option<Vec<f64>>,
        #[serde(default = "default_variants")]
        variants: Vec<ReferenceVariant>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_v: Option<f64>,
        /// Also run the state-level check on the initial state.
        #[serde(default = "yes")]
        batch: bool,
    },
    DecayFit {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_speed")]
        c: Speed,
        window: [f64; 2],
    },
    Strichartz {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_speed")]
        c: Speed,
        p_exp: f64,
        window: [f64; 2],
        /// Compare against the first half of the run.
        #[serde(default = "yes")]
        window_doubling: bool,
    },
    Markov {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_speed")]
        c: Speed,
    },
    Soliton {
        #[serde(default = "default_n")]
        n: usize,
        #[serde(default = "default_speed")]
        c: Speed,
        /// Translation speed along the first axis.
        beta: Speed,
        /// Cubic coupling g in f(r) = g r.
        #[serde(default = "unit")]
        g: f64,
        #[serde(default = "default_soliton_t_max")]
        t_max: f64,
        #[serde(default = "default_soliton_samples")]
        samples: usize,
        #[serde(default = "default_soliton_dt")]
        dt: f64,
    },
    /// Norm drift and Heisenberg duality along the trajectory.
    Unitarity {
        #[serde(default = "default_speed")]
        c: Speed,
    },
}

fn one() -> usize {
    1
}
fn ten() -> usize {
    10
}
fn twenty() -> usize {
    20
}
fn thirty() -> usize {
    30
}
fn thousand() -> usize {
    1000
}
fn unit() -> f64 {
    1.0
}
fn dyadic_scales() -> Vec<f64> {
    (2..=10).map(|k| f64::powi(2.0, k)).collect()
}
fn default_slope_delta() -> f64 {
    0.9
}
fn right() -> ExpansionSide {
    ExpansionSide::Right
}
fn default_fd_step() -> f64 {
    1e-4
}
fn default_variants() -> Vec<ReferenceVariant> {
    vec![
        ReferenceVariant::Plain,
        ReferenceVariant::Reflected,
        ReferenceVariant::Shifted { b: 1.0 },
    ]
}
fn default_soliton_t_max() -> f64 {
    20.0
}
fn default_soliton_samples() -> usize {
    400
}
fn default_soliton_dt() -> f64 {
    1e-2
}

impl CheckKind {
    pub fn label(&self) -> &'static str {
        match self {
            CheckKind::CommutatorOracle { .. } => "commutator_oracle",
            CheckKind::NormChain { .. } => "norm_chain",
            CheckKind::HsCrossCheck { .. } => "hs_cross_check",
            CheckKind::ExpansionSlope { .. } => "expansion_slope",
            CheckKind::Sandwich { .. } => "sandwich",
            CheckKind::Rme { .. } => "rme",
            CheckKind::Envelope { .. } => "envelope",
            CheckKind::MainInequality { .. } => "main_inequality",
            CheckKind::DecayFit { .. } => "decay_fit",
            CheckKind::Strichartz { .. } => "strichartz",
            CheckKind::Markov { .. } => "markov",
            CheckKind::Soliton { .. } => "soliton",
            CheckKind::Unitarity { .. } => "unitarity",
        }
    }

    /// The light-cone speed, for checks that take one.
    pub fn speed(&self) -> Option<Speed> {
        match self {
            CheckKind::Sandwich { c, .. }
            | CheckKind::Rme { c, .. }
            | CheckKind::Envelope { c, .. }
            | CheckKind::MainInequality { c, .. }
            | CheckKind::DecayFit { c, .. }
            | CheckKind::Strichartz { c, .. }
            | CheckKind::Markov { c, .. }
            | CheckKind::Soliton { c, .. }
            | CheckKind::Unitarity { c } => Some(*c),
            _ => None,
        }
    }

    /// True when the check reads the shared trajectory.
    pub fn needs_trajectory(&self) -> bool {
        matches!(
            self,
            CheckKind::Envelope { .. }
                | CheckKind::DecayFit { .. }
                | CheckKind::Strichartz { .. }
                | CheckKind::Markov { .. }
                | CheckKind::Unitarity { .. }
        )
    }

    /// Expansion order n, for checks that take one.
    pub fn order(&self) -> Option<usize> {
        match self {
            CheckKind::CommutatorOracle { n, .. }
            | CheckKind::NormChain { n, .. }
            | CheckKind::ExpansionSlope { n, .. }
            | CheckKind::Sandwich { n, .. }
            | CheckKind::Rme { n, .. }
            | CheckKind::Envelope { n, .. }
            | CheckKind::MainInequality { n, .. }
            | CheckKind::DecayFit { n, .. }
            | CheckKind::Strichartz { n, .. }
            | CheckKind::Markov { n, .. }
            | CheckKind::Soliton { n, .. } => Some(*n),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; overridden by the command line and the environment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default = "yes")]
    pub plots: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            formats: default_formats(),
            plots: true,
        }
    }
}

fn prefix(field: &str, e: LabError) -> LabError {
    match e {
        LabError::InvalidParameter { name, reason } => LabError::config(format!("{field}.{name}"), reason),
        LabError::Config { field: f, reason } => LabError::config(format!("{field}.{f}"), reason),
        other => LabError::config(field, other.to_string()),
    }
}

fn positive(field: impl Into<String>, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(LabError::config(field, format!("must be positive and finite, got {v}")))
    }
}

fn finite_list(field: impl Into<String>, v: &[f64], len: usize) -> Result<()> {
    if v.len() != len || v.iter().any(|x| !x.is_finite()) {
        return Err(LabError::config(field, format!("expected {len} finite entries")));
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::config("config", e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::config("config", e.to_string()))
    }

    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LabError::Serialization(e.to_string()))
    }

    /// JSON with object keys sorted, the form the config hash is taken over.
    pub fn canonical_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string(&value)?)
    }

    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.canonical_json()?.as_bytes())))
    }

    /// Field-level checks that need no assembled operator.
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(LabError::config("name", "use letters, digits, '-' and '_' only"));
        }
        let lattice = self.lattice.build()?;
        self.kernel.validate_for(&lattice).map_err(|e| prefix("kernel", e))?;
        let d = lattice.dim();
        match &self.reference.region {
            RegionConfig::Interval { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(LabError::config("reference.region", "need finite lo <= hi"));
                }
            }
            RegionConfig::Ball { center, radius } => {
                finite_list("reference.region.center", center, d)?;
                if !(*radius >= 0.0) {
                    return Err(LabError::config("reference.region.radius", "must be nonnegative"));
                }
            }
            RegionConfig::All => {}
        }
        if let Some(phi) = &self.reference.phi {
            finite_list("reference.phi", phi, lattice.site_count())?;
        }
        self.validate_dynamics(d)?;
        let mut names = BTreeSet::new();
        for (i, check) in self.checks.iter().enumerate() {
            let field = format!("checks[{i}]");
            if check.name.is_empty()
                || !check.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
            {
                return Err(LabError::config(format!("{field}.name"), "use letters, digits, '-' and '_' only"));
            }
            if !names.insert(check.name.clone()) {
                return Err(LabError::config(format!("{field}.name"), format!("duplicate check name `{}`", check.name)));
            }
            self.validate_check(&field, &check.kind, d)?;
        }
        Ok(())
    }

    fn validate_dynamics(&self, d: usize) -> Result<()> {
        let dy = &self.dynamics;
        positive("dynamics.t_max", dy.t_max)?;
        if dy.samples == 0 {
            return Err(LabError::config("dynamics.samples", "need at least one interval"));
        }
        if let Some(dt) = dy.dt {
            positive("dynamics.dt", dt)?;
        }
        if let Some(times) = &dy.times {
            if times.first() != Some(&0.0) {
                return Err(LabError::config("dynamics.times", "must start at 0"));
            }
            if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
                return Err(LabError::config("dynamics.times", "must be finite and strictly increasing"));
            }
        }
        let init = &dy.initial;
        finite_list("dynamics.initial.center", &init.center, d)?;
        finite_list("dynamics.initial.momentum", &init.momentum, d)?;
        positive("dynamics.initial.width", init.width)?;
        match &dy.potential {
            PotentialConfig::None => {}
            PotentialConfig::StaticWell { depth, center, width } => {
                finite_list("dynamics.potential.center", center, d)?;
                positive("dynamics.potential.width", *width)?;
                if !depth.is_finite() {
                    return Err(LabError::config("dynamics.potential.depth", "must be finite"));
                }
            }
            PotentialConfig::Driven {
                amplitude,
                frequency,
                center,
                width,
            }
            | PotentialConfig::DrivenProjector {
                amplitude,
                frequency,
                center,
                width,
            } => {
                finite_list("dynamics.potential.center", center, d)?;
                positive("dynamics.potential.width", *width)?;
                if !(amplitude.is_finite() && frequency.is_finite()) {
                    return Err(LabError::config("dynamics.potential", "amplitude and frequency must be finite"));
                }
            }
        }
        Ok(())
    }

    fn validate_check(&self, field: &str, kind: &CheckKind, d: usize) -> Result<()> {
        if let Some(n) = kind.order() {
            if n == 0 || n > 8 {
                return Err(LabError::config(format!("{field}.n"), "order must lie in 1..=8"));
            }
        }
        if let Some(Speed::Absolute(c) | Speed::Relative { times_kappa: c }) = kind.speed() {
            positive(format!("{field}.c"), c)?;
        }
        let t_max = self.dynamics.sample_times().last().cloned().unwrap_or(0.0);
        match kind {
            CheckKind::CommutatorOracle { instances, .. } | CheckKind::NormChain { instances, .. } => {
                if *instances == 0 {
                    return Err(LabError::config(format!("{field}.instances"), "need at least one instance"));
                }
            }
            CheckKind::HsCrossCheck {
                instances,
                max_dim,
                p_max,
            } => {
                if *instances == 0 || *max_dim < 2 || *max_dim > 200 {
                    return Err(LabError::config(field.to_string(), "need instances >= 1 and 2 <= max_dim <= 200"));
                }
                if *p_max > 3 {
                    return Err(LabError::config(format!("{field}.p_max"), "at most 3"));
                }
            }
            CheckKind::ExpansionSlope {
                n,
                scales,
                delta,
                exponent,
                t,
                ..
            } => {
                if scales.len() < 2 || scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                    return Err(LabError::config(format!("{field}.scales"), "need two or more positive scales"));
                }
                positive(format!("{field}.delta"), *delta)?;
                if let Some(m) = exponent {
                    if 2 * m < n + 3 {
                        return Err(LabError::config(
                            format!("{field}.exponent"),
                            format!("bump exponent {m} is too small for order {n}"),
                        ));
                    }
                }
                if !t.is_finite() {
                    return Err(LabError::config(format!("{field}.t"), "must be finite"));
                }
            }
            CheckKind::Sandwich {
                draws, time_samples, ..
            } => {
                if *draws == 0 || *time_samples == 0 {
                    return Err(LabError::config(field.to_string(), "need draws and time_samples >= 1"));
                }
            }
            CheckKind::Rme {
                delta,
                scale,
                times,
                fd_step,
                ..
            } => {
                if let Some(v) = delta {
                    positive(format!("{field}.delta"), *v)?;
                }
                if let Some(v) = scale {
                    positive(format!("{field}.scale"), *v)?;
                }
                positive(format!("{field}.fd_step"), *fd_step)?;
                if let Some(ts) = times {
                    if ts.is_empty() || ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                        return Err(LabError::config(format!("{field}.times"), "need nonnegative finite times"));
                    }
                }
            }
            CheckKind::Envelope { delta, c_v, .. } => {
                if let Some(v) = delta {
                    positive(format!("{field}.delta"), *v)?;
                }
                if let Some(v) = c_v {
                    if !(v.is_finite() && *v >= 0.0) {
                        return Err(LabError::config(format!("{field}.c_v"), "must be nonnegative"));
                    }
                }
            }
            CheckKind::MainInequality {
                times, variants, c_v, ..
            } => {
                if let Some(ts) = times {
                    if ts.is_empty() || ts.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                        return Err(LabError::config(format!("{field}.times"), "need positive finite times"));
                    }
                }
                if variants.is_empty() {
                    return Err(LabError::config(format!("{field}.variants"), "need at least one variant"));
                }
                if let Some(v) = c_v {
                    if !(v.is_finite() && *v >= 0.0) {
                        return Err(LabError::config(format!("{field}.c_v"), "must be nonnegative"));
                    }
                }
            }
            CheckKind::DecayFit { window, .. } => check_window(field, window, t_max)?,
            CheckKind::Strichartz { n, p_exp, window, .. } => {
                check_window(field, window, t_max)?;
                if !(*p_exp > 1.0 / *n as f64) {
                    return Err(LabError::config(
                        format!("{field}.p_exp"),
                        format!("exponent {p_exp} must exceed 1/n = {}", 1.0 / *n as f64),
                    ));
                }
            }
            CheckKind::Markov { .. } | CheckKind::Unitarity { .. } => {}
            CheckKind::Soliton {
                beta,
                t_max,
                samples,
                dt,
                g,
                ..
            } => {
                if d != 1 {
                    return Err(LabError::config(field.to_string(), "the soliton check runs in one dimension"));
                }
                let (Speed::Absolute(b) | Speed::Relative { times_kappa: b }) = *beta;
                if !b.is_finite() {
                    return Err(LabError::config(format!("{field}.beta"), "must be finite"));
                }
                positive(format!("{field}.t_max"), *t_max)?;
                positive(format!("{field}.dt"), *dt)?;
                if *samples < 2 {
                    return Err(LabError::config(format!("{field}.samples"), "need at least 2"));
                }
                if !g.is_finite() {
                    return Err(LabError::config(format!("{field}.g"), "must be finite"));
                }
            }
        }
        Ok(())
    }
}

fn check_window(field: &str, w: &[f64; 2], t_max: f64) -> Result<()> {
    if !(w[0] > 0.0 && w[1] > w[0] && w[1] <= t_max) {
        return Err(LabError::config(
            format!("{field}.window"),
            format!("need 0 < t_min < t_max <= {t_max}"),
        ));
    }
    Ok(())
}
