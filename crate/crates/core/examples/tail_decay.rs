//! Mass outside the light cone: power-law fit, Strichartz norm and Markov bound.

use lightcone_lab::kernelop::{assemble_operator, schur_kappa, KernelSpec};
use lightcone_lab::lattice::{distance_function, Boundary, Lattice, RegionSet, State};
use lightcone_lab::propagate::evolve_autonomous;
use lightcone_lab::verify::{lightcone_decay_fit, markov_tail_measure, strichartz_norm};

fn main() -> lightcone_lab::Result<()> {
    let lat = Lattice::new(1, 64.0, 512, Boundary::Truncated)?;
    let op = assemble_operator(&lat, &KernelSpec::power_law(5.0))?;
    let x = RegionSet::interval(&lat, -1.0, 1.0);
    let kappa = schur_kappa(&op, &distance_function(&lat, &x)?, 1)?;
    let c = 1.5 * kappa;
    let n = 2;

    let mut psi0 = State::gaussian(&lat, &[0.0], 0.5, &[0.0]);
    for (a, &inside) in psi0.amplitudes.iter_mut().zip(x.mask()) {
        if !inside {
            *a = num_complex::Complex64::new(0.0, 0.0);
        }
    }
    psi0.normalize(&lat);
    let times: Vec<f64> = (0..=200).map(|k| 0.25 * k as f64).collect();
    let traj = evolve_autonomous(&op, &psi0, &times)?;

    let fit = lightcone_decay_fit(&traj, &lat, &x, c, n, [5.0, 50.0])?;
    println!("fit: {:?}, exponent {:?}, sup t^n tail {:.3e}", fit.status, fit.fitted_exponent, fit.sup_weighted_all);
    let st = strichartz_norm(&traj, &lat, &x, c, 1.0, n, [5.0, 50.0])?;
    println!("Strichartz p=1: {:.4e} (finite {})", st.value, st.finite);
    match strichartz_norm(&traj, &lat, &x, c, 0.5, n, [5.0, 50.0]) {
        Ok(v) => println!("Strichartz p=1/2: {:.4e}", v.value),
        Err(e) => println!("Strichartz p=1/2: {e}"),
    }
    let m = markov_tail_measure(&traj, &lat, &x, c, n)?;
    println!("Markov: {} violations over {} samples", m.violations, m.times.len());
    Ok(())
}
