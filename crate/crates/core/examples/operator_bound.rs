//! The operator light-cone bound for the free kernel, with reflected and shifted references.

use lightcone_lab::kernelop::{assemble_operator, schur_kappa, KernelSpec};
use lightcone_lab::lattice::{distance_function, Boundary, Lattice, RegionSet};
use lightcone_lab::propagate::PotentialSpec;
use lightcone_lab::verify::{main_inequality_check, MainInequalityOptions, ReferenceVariant};

fn main() -> lightcone_lab::Result<()> {
    let lat = Lattice::new(1, 32.0, 256, Boundary::Truncated)?;
    let op = assemble_operator(&lat, &KernelSpec::power_law(5.0))?;
    let phi = distance_function(&lat, &RegionSet::interval(&lat, -1.0, 1.0))?;
    let kappa = schur_kappa(&op, &phi, 1)?;
    let c = 1.5 * kappa;
    let opts = MainInequalityOptions {
        variants: vec![ReferenceVariant::Plain, ReferenceVariant::Reflected, ReferenceVariant::Shifted { b: 2.0 }],
        ..Default::default()
    };
    let times = [1.0, 2.0, 5.0, 10.0, 20.0];
    let r = main_inequality_check(&op, &PotentialSpec::None, &phi, c, 2, &times, &opts)?;
    println!("c = {c:.4}: passed {}, joint C {:?}", r.passed, r.smallest_c);
    for (k, v) in &r.extras {
        println!("  {k} = {v:.4e}");
    }
    Ok(())
}
