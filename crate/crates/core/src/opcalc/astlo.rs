use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::HermitianOperator;
use crate::cutoff::{CutoffFunction, SmoothProfile};
use crate::error::{LabError, Result};
use crate::lattice::RealField;
use crate::linalg::{eigh_complex, reconstruct, CMat};

/// Reference operator phi: a multiplication operator or a dense Hermitian matrix.
#[derive(Clone, Debug)]
pub enum Reference {
    Field(RealField),
    Dense(Arc<DenseReference>),
}

#[derive(Debug)]
pub struct DenseReference {
    pub operator: HermitianOperator,
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
}

impl Reference {
    pub fn dense(operator: HermitianOperator) -> Result<Self> {
        let (eigenvalues, eigenvectors) = eigh_complex(operator.matrix())?;
        Ok(Reference::Dense(Arc::new(DenseReference {
            operator,
            eigenvalues,
            eigenvectors,
        })))
    }

    pub fn dim(&self) -> usize {
        match self {
            Reference::Field(f) => f.len(),
            Reference::Dense(d) => d.operator.dim(),
        }
    }

    /// phi as a dense matrix.
    pub fn matrix(&self) -> CMat {
        match self {
            Reference::Field(f) => crate::linalg::diag_complex(&f.values),
            Reference::Dense(d) => d.operator.matrix().clone(),
        }
    }

    /// g(phi).
    pub fn apply(&self, g: impl Fn(f64) -> f64) -> Realized {
        match self {
            Reference::Field(f) => Realized::Diagonal(f.values.iter().map(|&x| g(x)).collect()),
            Reference::Dense(d) => {
                let gv: Vec<C64> = d.eigenvalues.iter().map(|&l| C64::new(g(l), 0.0)).collect();
                Realized::Dense(reconstruct(&d.eigenvectors, &gv))
            }
        }
    }
}

/// A function of the reference operator, kept diagonal when possible.
#[derive(Clone, Debug)]
pub enum Realized {
    Diagonal(Vec<f64>),
    Dense(CMat),
}

impl Realized {
    pub fn to_matrix(&self) -> CMat {
        match self {
            Realized::Diagonal(v) => crate::linalg::diag_complex(v),
            Realized::Dense(m) => m.clone(),
        }
    }

    pub fn to_operator(&self) -> HermitianOperator {
        match self {
            Realized::Diagonal(v) => HermitianOperator::diagonal(v),
            Realized::Dense(m) => HermitianOperator::new(m.clone()).expect("function of a Hermitian operator"),
        }
    }

    /// self * b
    pub fn mul_right(&self, b: &CMat) -> CMat {
        match self {
            Realized::Diagonal(v) => CMat::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * v[i]),
            Realized::Dense(m) => m * b,
        }
    }

    /// b * self
    pub fn mul_left(&self, b: &CMat) -> CMat {
        match self {
            Realized::Diagonal(v) => CMat::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * v[j]),
            Realized::Dense(m) => b * m,
        }
    }

    /// [b, self] = b self - self b
    pub fn commutator_with(&self, b: &CMat) -> CMat {
        match self {
            Realized::Diagonal(v) => CMat::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * (v[j] - v[i])),
            Realized::Dense(m) => b * m - m * b,
        }
    }

    pub fn diagonal(&self) -> Option<&[f64]> {
        match self {
            Realized::Diagonal(v) => Some(v),
            Realized::Dense(_) => None,
        }
    }
}

/// t -> chi((phi - c|t|)/s).
#[derive(Clone, Debug)]
pub struct AstloFamily {
    pub reference: Reference,
    pub chi: Arc<CutoffFunction>,
    pub speed: f64,
    pub scale: f64,
}

impl AstloFamily {
    pub fn new(reference: Reference, chi: Arc<CutoffFunction>, speed: f64, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(LabError::param("s", format!("adiabatic scale must be positive, got {scale}")));
        }
        if !(speed.is_finite() && speed >= 0.0) {
            return Err(LabError::param("c", format!("speed must be nonnegative, got {speed}")));
        }
        Ok(AstloFamily {
            reference,
            chi,
            speed,
            scale,
        })
    }

    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        AstloFamily::new(self.reference.clone(), self.chi.clone(), self.speed, scale)
    }

    pub fn argument(&self, phi: f64, t: f64) -> f64 {
        (phi - self.speed * t.abs()) / self.scale
    }

    /// g((phi - c|t|)/s).
    pub fn realize(&self, t: f64, g: impl Fn(f64) -> f64) -> Realized {
        let c = self.speed * t.abs();
        let s = self.scale;
        self.reference.apply(|x| g((x - c) / s))
    }

    /// A_s(t, chi).
    pub fn astlo(&self, t: f64) -> Realized {
        let chi = self.chi.clone();
        self.realize(t, move |mu| chi.value(mu))
    }

    /// A_s(t, f^(k)) for an arbitrary profile.
    pub fn with_profile(&self, f: &dyn SmoothProfile, k: usize, t: f64) -> Realized {
        self.realize(t, |mu| f.derivative(k, mu))
    }

    /// d/dt A_s(t, chi) = -(c/s) sign(t) A_s(t, chi'); the right derivative at t = 0.
    pub fn time_derivative(&self, t: f64) -> Realized {
        let sign = if t < 0.0 { -1.0 } else { 1.0 };
        let factor = -self.speed / self.scale * sign;
        let chi = self.chi.clone();
        self.realize(t, move |mu| factor * chi.derivative(1, mu))
    }
}
