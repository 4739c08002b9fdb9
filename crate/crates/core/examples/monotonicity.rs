//! Recursive monotonicity of the adiabatic observables under a driven potential,
//! and the state-level envelope along a trajectory.

use std::sync::Arc;

use lightcone_lab::cutoff::make_cutoff;
use lightcone_lab::lab::{preset, Prepared};
use lightcone_lab::opcalc::{AstloFamily, Reference};
use lightcone_lab::propagate::evolve_nonautonomous;
use lightcone_lab::verify::{default_rme_xi, envelope_check, potential_commutator_norm, rme_check, RmeOptions};

fn main() -> lightcone_lab::Result<()> {
    let p = Prepared::new(&preset("driven-envelope")?)?;
    let n = 2;
    let c = 1.5 * p.kappa;
    let delta = (c - p.kappa) / 3.0;
    let t_max = 4.0;
    let s = (c - p.kappa - delta) * t_max / delta;
    let chi = make_cutoff(delta, n)?;
    let family = AstloFamily::new(Reference::Field(p.phi.clone()), Arc::new(chi.clone()), c, s)?;
    let xi = default_rme_xi(&chi, &p.bounds(n)?, n)?;
    println!("kappa = {:.4}, c = {c:.4}, delta = {delta:.4}, s = {s:.2}", p.kappa);

    let rme = rme_check(&p.op, &p.potential, &family, &xi, n, &[0.0, 1.0, 2.0, 4.0], &RmeOptions::default())?;
    println!("monotonicity: passed {}, smallest C {:?}", rme.passed, rme.smallest_c);

    let mut c_v = 0.0f64;
    for &t in &p.times {
        if let Some(v) = p.potential.sample(t) {
            c_v = c_v.max(potential_commutator_norm(&Reference::Field(p.phi.clone()), &v)?);
        }
    }
    let traj = evolve_nonautonomous(&p.op, &p.potential, &p.psi0, &p.times, 0.01)?;
    let env = envelope_check(&traj, &p.lattice, &family, &xi[0], n, c_v)?;
    println!("envelope: passed {}, smallest C {:?}, C_V = {c_v:.4}", env.passed, env.smallest_c);
    Ok(())
}
