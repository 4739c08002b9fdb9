use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::config::{PotentialConfig, RegionConfig, ScenarioConfig};
use crate::error::{LabError, Result};
use crate::kernelop::{assemble_operator, schur_kappa, speed_bounds, NonlocalOperator, SpeedBounds};
use crate::lattice::{distance_function, FieldUnits, Lattice, RealField, RegionSet, State};
use crate::linalg::CMat;
use crate::propagate::{PotentialSample, PotentialSpec};

/// Everything the checks share: lattice, operator, reference, potential, initial state.
pub struct Prepared {
    pub lattice: Lattice,
    pub op: NonlocalOperator,
    pub region: RegionSet,
    /// d_X, used for tails and light cones.
    pub distance: RealField,
    /// The reference used by the operator checks: `reference.phi` or d_X.
    pub phi: RealField,
    /// Order-1 Schur bound on the reference.
    pub kappa: f64,
    /// Order-1 Schur bound on d_X.
    pub kappa_region: f64,
    pub potential: PotentialSpec,
    pub psi0: State,
    pub times: Vec<f64>,
}

fn region(lattice: &Lattice, cfg: &RegionConfig) -> RegionSet {
    match cfg {
        RegionConfig::Interval { lo, hi } => RegionSet::interval(lattice, *lo, *hi),
        RegionConfig::Ball { center, radius } => RegionSet::ball(lattice, center, *radius),
        RegionConfig::All => RegionSet::all(lattice),
    }
}

fn gaussian_field(lattice: &Lattice, center: &[f64], width: f64) -> Vec<f64> {
    (0..lattice.site_count())
        .map(|i| {
            let r = lattice.distance_to_point(i, center);
            (-(r * r) / (width * width)).exp()
        })
        .collect()
}

fn potential(lattice: &Lattice, cfg: &PotentialConfig) -> PotentialSpec {
    match cfg {
        PotentialConfig::None => PotentialSpec::None,
        PotentialConfig::StaticWell { depth, center, width } => {
            let g = gaussian_field(lattice, center, *width);
            PotentialSpec::Static(RealField::new(g.iter().map(|v| -depth * v).collect(), FieldUnits::Energy))
        }
        PotentialConfig::Driven {
            amplitude,
            frequency,
            center,
            width,
        } => {
            let g = gaussian_field(lattice, center, *width);
            let (a, w) = (*amplitude, *frequency);
            PotentialSpec::TimeDependent {
                sampler: Arc::new(move |t| PotentialSample::Field(g.iter().map(|v| a * (w * t).cos() * v).collect())),
                bound: Some(a.abs()),
            }
        }
        PotentialConfig::DrivenProjector {
            amplitude,
            frequency,
            center,
            width,
        } => {
            let g = gaussian_field(lattice, center, *width);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let g: Vec<f64> = g.iter().map(|v| v / norm).collect();
            let proj = CMat::from_fn(g.len(), g.len(), |i, j| C64::new(g[i] * g[j], 0.0));
            let (a, w) = (*amplitude, *frequency);
            PotentialSpec::TimeDependent {
                sampler: Arc::new(move |t| {
                    let f = C64::new(a * (w * t).cos(), 0.0);
                    PotentialSample::Operator(CMat::from_fn(proj.nrows(), proj.ncols(), |i, j| proj[(i, j)] * f))
                }),
                bound: Some(a.abs()),
            }
        }
    }
}

impl Prepared {
    /// Assemble the operator and reference of a validated config.
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        let lattice = cfg.lattice.build()?;
        let op = assemble_operator(&lattice, &cfg.kernel)?;
        let region = region(&lattice, &cfg.reference.region);
        if region.count() == 0 {
            return Err(LabError::config("reference.region", "contains no lattice site"));
        }
        let distance = distance_function(&lattice, &region)?;
        let phi = match &cfg.reference.phi {
            Some(v) => RealField::new(v.clone(), FieldUnits::Length),
            None => distance.clone(),
        };
        let kappa = schur_kappa(&op, &phi, 1)?;
        let kappa_region = schur_kappa(&op, &distance, 1)?;
        let init = &cfg.dynamics.initial;
        let mut psi0 = State::gaussian(&lattice, &init.center, init.width, &init.momentum);
        if init.restrict_to_region {
            for (a, &inside) in psi0.amplitudes.iter_mut().zip(region.mask()) {
                if !inside {
                    *a = C64::new(0.0, 0.0);
                }
            }
        }
        if psi0.norm_sqr(&lattice) == 0.0 {
            return Err(LabError::config("dynamics.initial", "initial state vanishes on the lattice"));
        }
        psi0.normalize(&lattice);
        Ok(Prepared {
            potential: potential(&lattice, &cfg.dynamics.potential),
            lattice,
            op,
            region,
            distance,
            phi,
            kappa,
            kappa_region,
            psi0,
            times: cfg.dynamics.sample_times(),
        })
    }

    pub fn bounds(&self, n: usize) -> Result<SpeedBounds> {
        speed_bounds(&self.op, &self.phi, n as u32)
    }

    /// True when the check uses d_X rather than the configured reference.
    pub fn kappa_for(&self, uses_region: bool) -> f64 {
        if uses_region {
            self.kappa_region
        } else {
            self.kappa
        }
    }

    /// The initial state vanishes wherever `field` is positive.
    pub fn initial_supported_in(&self, field: &RealField) -> bool {
        self.psi0
            .amplitudes
            .iter()
            .zip(&field.values)
            .all(|(a, &v)| v <= 0.0 || a.norm_sqr() == 0.0)
    }
}
