use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::lattice::{FieldUnits, Lattice, RealField};
use crate::linalg::CMat;
use crate::opcalc::HermitianOperator;

/// Independent generator for one (seed, stream) pair.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sum of three random sine modes plus a random linear part along each axis.
///
/// The discrete Lipschitz constant is at most 3 * 1.5 + 1 per axis.
pub fn random_lipschitz_field(lattice: &Lattice, rng: &mut impl Rng) -> RealField {
    let d = lattice.dim();
    let modes: Vec<(usize, f64, f64, f64)> = (0..3 * d)
        .map(|k| {
            (
                k % d,
                rng.random_range(-1.0..1.0),
                rng.random_range(0.1..1.5),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let slopes: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    RealField::from_fn(lattice, FieldUnits::Length, |x| {
        let mut v = 0.0;
        for &(axis, a, w, b) in &modes {
            v += a * (w * x[axis] + b).sin();
        }
        for (axis, s) in slopes.iter().enumerate() {
            v += s * x[axis];
        }
        v
    })
}

/// (G + G*) / (2 sqrt(dim)) with standard complex Gaussian entries.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> HermitianOperator {
    let mut g = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(i, j)] = C64::new(re, im);
        }
    }
    let scale = 0.5 / (dim as f64).sqrt();
    let m = CMat::from_fn(dim, dim, |i, j| (g[(i, j)] + g[(j, i)].conj()) * scale);
    HermitianOperator::new(m).expect("symmetrized matrix is Hermitian")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{lipschitz_constant, Boundary};

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let lat = Lattice::new(1, 4.0, 16, Boundary::Truncated).unwrap();
        let a = random_lipschitz_field(&lat, &mut rng_for(7, 1));
        let b = random_lipschitz_field(&lat, &mut rng_for(7, 1));
        let c = random_lipschitz_field(&lat, &mut rng_for(7, 2));
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
        assert!(lipschitz_constant(&lat, &a) <= 5.5);
    }
}
