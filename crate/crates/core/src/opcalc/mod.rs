//! Functional calculus, adiabatic observables and commutator expansions.

mod astlo;
mod commutator;
mod hs;

pub use astlo::{AstloFamily, DenseReference, Realized, Reference};
pub use commutator::{
    commutator_expansion, iterated_commutator, kernel_commutator, potential_commutator_bound,
    symmetrized_expansion, ExpansionReport, ExpansionSide, SymmetrizedTerms,
};
pub use hs::{hs_apply, hs_integrate, HsOptions, HsResult};

use num_complex::Complex64 as C64;

use crate::error::{LabError, Result};
use crate::lattice::RealField;
use crate::linalg::{diag_complex, eigh_complex, hermitian_defect, max_abs, reconstruct, CMat};

/// Dense Hermitian matrix on the lattice Hilbert space.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: CMat,
}

impl HermitianOperator {
    /// Accepts matrices with |A - A*| <= 1e-12 max|A| and stores the Hermitian part.
    pub fn new(matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(LabError::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = hermitian_defect(&matrix);
        let scale = max_abs(&matrix);
        if defect > 1e-12 * scale.max(f64::MIN_POSITIVE) && defect > 0.0 {
            return Err(LabError::NonHermitian(format!("|A - A*| = {defect:.3e} with max|A| = {scale:.3e}")));
        }
        let mut m = matrix;
        crate::linalg::symmetrize(&mut m);
        Ok(HermitianOperator { matrix: m })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        HermitianOperator {
            matrix: diag_complex(values),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }
}

/// g(phi) for a real field, a diagonal operator.
pub fn apply_function_diag(phi: &RealField, g: impl Fn(f64) -> f64) -> HermitianOperator {
    let v: Vec<f64> = phi.values.iter().map(|&x| g(x)).collect();
    HermitianOperator::diagonal(&v)
}

/// g(A) = U g(Lambda) U* from a Hermitian eigendecomposition.
pub fn apply_function_dense(a: &HermitianOperator, g: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
    let (vals, u) = eigh_complex(a.matrix())?;
    let gv: Vec<C64> = vals.iter().map(|&l| C64::new(g(l), 0.0)).collect();
    HermitianOperator::new(reconstruct(&u, &gv))
}
