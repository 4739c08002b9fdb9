//! Lattices, regions and the distance function d_X.

use lightcone_lab::lattice::{distance_function, lipschitz_constant, region_mass, Boundary, Lattice, RegionSet, State};

fn main() -> lightcone_lab::Result<()> {
    let lat = Lattice::new(1, 8.0, 65, Boundary::Truncated)?;
    println!("h = {}, sites = {}, cell volume = {}", lat.spacing(), lat.site_count(), lat.cell_volume());

    let x = RegionSet::interval(&lat, -1.0, 1.0);
    let d = distance_function(&lat, &x)?;
    println!("|X| = {} sites, max d_X = {:.3}, Lip(d_X) = {:.3}", x.count(), d.max(), lipschitz_constant(&lat, &d));

    // Sublevel sets of d_X are enlargements of X.
    for r in [0.0, 1.0, 2.0] {
        println!("X_{r}: {} sites", d.sublevel(r).count());
    }

    let mut psi = State::gaussian(&lat, &[0.0], 0.5, &[0.0]);
    psi.normalize(&lat);
    println!("mass in X = {:.6}", region_mass(&psi, &x, &lat)?);
    println!("mass outside X_1 = {:.3e}", region_mass(&psi, &d.sublevel(1.0).complement(), &lat)?);

    let lat2 = Lattice::new(2, 4.0, 17, Boundary::Periodic)?;
    let ball = RegionSet::ball(&lat2, &[0.0, 0.0], 1.5);
    println!("2D periodic lattice: {} sites, unit ball holds {}", lat2.site_count(), ball.count());
    Ok(())
}
