//! A translated profile leaves any light cone slower than itself; a cubic
//! nonlinear run does not outpace the linear speed.

use lightcone_lab::kernelop::{assemble_operator, schur_kappa, KernelSpec};
use lightcone_lab::lattice::{distance_function, Boundary, Lattice, RegionSet, State};
use lightcone_lab::propagate::NlsSpec;
use lightcone_lab::verify::{soliton_speed_test, SolitonOptions};

fn main() -> lightcone_lab::Result<()> {
    let lat = Lattice::new(1, 32.0, 512, Boundary::Truncated)?;
    let op = assemble_operator(&lat, &KernelSpec::power_law(5.0))?;
    let x = RegionSet::interval(&lat, -1.0, 1.0);
    let kappa = schur_kappa(&op, &distance_function(&lat, &x)?, 1)?;
    let mut psi0 = State::gaussian(&lat, &[0.0], 0.5, &[0.0]);
    psi0.normalize(&lat);
    let opts = SolitonOptions {
        c: 1.5 * kappa,
        samples: 400,
        ..Default::default()
    };
    let nls = NlsSpec::cubic(lat.site_count(), 1.0);
    let r = soliton_speed_test(&op, &psi0, &x, &[2.0 * kappa], &nls, &psi0, &opts)?;
    println!("kappa = {kappa:.4}: passed {}", r.passed);
    for (k, v) in &r.extras {
        println!("  {k} = {v:.4}");
    }
    Ok(())
}
