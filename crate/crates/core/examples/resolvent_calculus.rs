//! f(A) and f'(A) from the resolvent representation, compared with eigendecomposition.

use std::sync::Arc;

use lightcone_lab::cutoff::{AnalyticExtension, GaussianProfile, SmoothProfile};
use lightcone_lab::lab::random::{random_hermitian, rng_for};
use lightcone_lab::linalg::{eigh_complex, reconstruct, spectral_norm};
use lightcone_lab::opcalc::{hs_apply, HsOptions};
use num_complex::Complex64;

fn main() -> lightcone_lab::Result<()> {
    let g = GaussianProfile::new(0.2, 0.8);
    let ext = AnalyticExtension::new(Arc::new(g.clone()), 3)?;
    let a = random_hermitian(12, &mut rng_for(5, 0));
    let (vals, u) = eigh_complex(a.matrix())?;
    for p in 0..=1 {
        let r = hs_apply(&a, &ext, p, &HsOptions::default())?;
        let exact = reconstruct(&u, &vals.iter().map(|&l| Complex64::new(g.derivative(p, l), 0.0)).collect::<Vec<_>>());
        println!(
            "p={p}: error {:.2e}, estimate {:.2e}, {} evaluations",
            spectral_norm(&(&r.operator - &exact))?,
            r.error_estimate,
            r.evaluations
        );
    }
    Ok(())
}
