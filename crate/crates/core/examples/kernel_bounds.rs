//! Kernel assembly and the Schur speed bounds kappa_p.

use lightcone_lab::kernelop::{assemble_operator, lattice_moment, moment_bound, schur_kappa, speed_bounds, KernelSpec};
use lightcone_lab::lattice::{distance_function, Boundary, Lattice, RegionSet};
use lightcone_lab::quad::QuadOptions;

fn main() -> lightcone_lab::Result<()> {
    let lat = Lattice::new(1, 32.0, 257, Boundary::Truncated)?;
    let phi = distance_function(&lat, &RegionSet::interval(&lat, -1.0, 1.0))?;

    for spec in [KernelSpec::power_law(5.0), KernelSpec::gaussian(1.0), KernelSpec::compact(2.0)] {
        let op = assemble_operator(&lat, &spec)?;
        let b = speed_bounds(&op, &phi, 3)?;
        println!(
            "{:?}: ||H0|| <= {:.4}, kappa_1 = {:.4}, kappa_3 = {:.4}, lattice M_1 = {:.4}",
            spec.family,
            op.norm_estimate(),
            b.kappa(1)?,
            b.kappa(3)?,
            lattice_moment(&op, 1)
        );
        println!("  direct Schur kappa_2 = {:.4}", schur_kappa(&op, &phi, 2)?);
    }

    // Continuum moments: finite below a - d, divergent at p = a - d.
    let spec = KernelSpec::power_law(3.0);
    for p in [1.0, 2.0] {
        match moment_bound(&spec, 1, p, &QuadOptions::default()) {
            Ok(m) => println!("power_law a=3 moment p={p}: {:.6}", m.value),
            Err(e) => println!("power_law a=3 moment p={p}: {e}"),
        }
    }
    Ok(())
}
