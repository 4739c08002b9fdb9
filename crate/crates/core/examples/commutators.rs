//! Iterated commutators ad^k_phi(H0) against the kernel closed form.

use lightcone_lab::kernelop::{assemble_operator, schur_kappa, KernelSpec};
use lightcone_lab::lab::random::{random_lipschitz_field, rng_for};
use lightcone_lab::lattice::{lipschitz_constant, Boundary, Lattice};
use lightcone_lab::linalg::spectral_norm;
use lightcone_lab::opcalc::{iterated_commutator, kernel_commutator, Reference};

fn main() -> lightcone_lab::Result<()> {
    let lat = Lattice::new(1, 8.0, 48, Boundary::Truncated)?;
    let op = assemble_operator(&lat, &KernelSpec::gaussian(1.0))?;
    let h = op.to_complex();
    let phi = random_lipschitz_field(&lat, &mut rng_for(3, 0));
    let lip = lipschitz_constant(&lat, &phi);
    println!("random reference with Lip = {lip:.3}");
    for k in 1..=3 {
        let a = iterated_commutator(&h, &Reference::Field(phi.clone()), k)?;
        let b = kernel_commutator(&op, &phi, k)?;
        let rel = (&a - &b).norm_l2() / b.norm_l2();
        println!(
            "k={k}: relative difference {rel:.2e}, ||ad^k|| = {:.4}, kappa_k = {:.4}",
            spectral_norm(&b)?,
            schur_kappa(&op, &phi, k as u32)?
        );
    }
    Ok(())
}
