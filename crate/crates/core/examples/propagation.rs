//! Spectral and stepped propagation, with and without a potential.

use std::sync::Arc;

use lightcone_lab::kernelop::{assemble_operator, KernelSpec};
use lightcone_lab::lattice::{Boundary, Lattice, State};
use lightcone_lab::propagate::{default_dt, evolve_autonomous, evolve_nonautonomous, PotentialSample, PotentialSpec};

fn main() -> lightcone_lab::Result<()> {
    let lat = Lattice::new(1, 16.0, 128, Boundary::Truncated)?;
    let op = assemble_operator(&lat, &KernelSpec::power_law(5.0))?;
    let mut psi0 = State::gaussian(&lat, &[0.0], 0.5, &[1.0]);
    psi0.normalize(&lat);
    let times: Vec<f64> = (0..=10).map(|k| k as f64).collect();

    let free = evolve_autonomous(&op, &psi0, &times)?;
    let drift = free.norms(&lat).iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    println!("{}: max norm drift {drift:.2e}", free.method);

    let xs: Vec<f64> = (0..lat.site_count()).map(|i| lat.coords(i)[0]).collect();
    let pot = PotentialSpec::TimeDependent {
        sampler: Arc::new(move |t| PotentialSample::Field(xs.iter().map(|x| 0.3 * (t).cos() * (-x * x).exp()).collect())),
        bound: Some(0.3),
    };
    let driven = evolve_nonautonomous(&op, &pot, &psi0, &times, default_dt(&op))?;
    let drift = driven.norms(&lat).iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    println!("{}: max norm drift {drift:.2e}, dt = {:?}", driven.method, driven.dt);
    Ok(())
}
