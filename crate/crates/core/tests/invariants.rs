use std::sync::Arc;

use lightcone_lab::cutoff::make_cutoff;
use lightcone_lab::kernelop::{assemble_operator, lattice_moment, schur_kappa, KernelSpec};
use lightcone_lab::lab::random::{random_lipschitz_field, rng_for};
use lightcone_lab::lab::{sandwich_report, Prepared, ScenarioConfig};
use lightcone_lab::lattice::{distance_function, lipschitz_constant, Boundary, Lattice, RegionSet, State};
use lightcone_lab::linalg::spectral_norm;
use lightcone_lab::opcalc::{iterated_commutator, kernel_commutator, AstloFamily, Reference};
use lightcone_lab::propagate::{evolve_autonomous, SpectralPropagator};
use lightcone_lab::verify::markov_tail_measure;
use num_complex::Complex64;
use proptest::prelude::*;

fn kernel(which: u8, param: f64) -> KernelSpec {
    match which % 3 {
        0 => KernelSpec::power_law(2.5 + param * 4.0),
        1 => KernelSpec::gaussian(0.5 + param),
        _ => KernelSpec::compact(1.0 + 2.0 * param),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cutoff_is_a_monotone_step(delta in 0.05f64..0.99, n in 1usize..5, mu in -1.0f64..4.0) {
        let chi = make_cutoff(delta, n).unwrap();
        let v = chi.value(mu);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(chi.derivative(1, mu) >= 0.0);
        if mu <= 0.0 {
            prop_assert_eq!(v, 0.0);
        }
        if mu >= delta {
            prop_assert_eq!(v, 1.0);
        }
        prop_assert!(chi.value(mu + 0.01) >= v);
    }

    #[test]
    fn distance_function_is_one_lipschitz(points in 8usize..120, lo in -3.0f64..0.0, len in 0.5f64..3.0) {
        let lat = Lattice::new(1, 6.0, points, Boundary::Truncated).unwrap();
        let x = RegionSet::interval(&lat, lo, lo + len);
        prop_assume!(x.count() > 0);
        let d = distance_function(&lat, &x).unwrap();
        prop_assert!(lipschitz_constant(&lat, &d) <= 1.0 + 1e-12);
        for i in 0..lat.site_count() {
            prop_assert_eq!(d.values[i] == 0.0, x.contains(i));
        }
    }

    #[test]
    fn commutator_forms_agree(seed in any::<u64>(), points in 6usize..40, which in any::<u8>(), param in 0.0f64..1.0, k in 1usize..4) {
        let lat = Lattice::new(1, 5.0, points, Boundary::Truncated).unwrap();
        let op = assemble_operator(&lat, &kernel(which, param)).unwrap();
        let phi = random_lipschitz_field(&lat, &mut rng_for(seed, 0));
        let a = iterated_commutator(&op.to_complex(), &Reference::Field(phi.clone()), k).unwrap();
        let b = kernel_commutator(&op, &phi, k).unwrap();
        let scale = b.norm_l2().max(1e-300);
        prop_assert!((&a - &b).norm_l2() / scale <= 1e-12);
    }

    #[test]
    fn commutator_norms_obey_the_schur_chain(seed in any::<u64>(), points in 6usize..40, which in any::<u8>(), param in 0.0f64..1.0, k in 1u32..4) {
        let lat = Lattice::new(1, 5.0, points, Boundary::Truncated).unwrap();
        let op = assemble_operator(&lat, &kernel(which, param)).unwrap();
        let phi = random_lipschitz_field(&lat, &mut rng_for(seed, 0));
        let norm = spectral_norm(&kernel_commutator(&op, &phi, k as usize).unwrap()).unwrap();
        let kappa = schur_kappa(&op, &phi, k).unwrap();
        let chain = lipschitz_constant(&lat, &phi).powi(k as i32) * lattice_moment(&op, k);
        prop_assert!(norm <= kappa * (1.0 + 1e-10) + 1e-14);
        prop_assert!(kappa <= chain * (1.0 + 1e-10) + 1e-14);
    }

    #[test]
    fn astlo_is_a_contraction_that_shrinks_in_time(seed in any::<u64>(), speed in 0.1f64..3.0, scale in 0.5f64..20.0, t in 0.0f64..5.0, dt in 0.0f64..2.0) {
        let lat = Lattice::new(1, 8.0, 40, Boundary::Truncated).unwrap();
        let phi = random_lipschitz_field(&lat, &mut rng_for(seed, 1));
        let chi = Arc::new(make_cutoff(0.5, 2).unwrap());
        let fam = AstloFamily::new(Reference::Field(phi.clone()), chi, speed, scale).unwrap();
        let a = fam.astlo(t);
        let b = fam.astlo(t + dt);
        let (a, b) = (a.diagonal().unwrap(), b.diagonal().unwrap());
        for i in 0..a.len() {
            prop_assert!((0.0..=1.0).contains(&a[i]));
            prop_assert!(b[i] <= a[i]);
            if phi.values[i] <= speed * t {
                prop_assert_eq!(a[i], 0.0);
            }
        }
        let mirrored = fam.astlo(-t);
        prop_assert_eq!(mirrored.diagonal().unwrap(), a);
    }

    #[test]
    fn spectral_propagation_is_unitary_and_reversible(points in 8usize..64, which in any::<u8>(), param in 0.0f64..1.0, t in -20.0f64..20.0, k0 in -2.0f64..2.0) {
        let lat = Lattice::new(1, 8.0, points, Boundary::Periodic).unwrap();
        let op = assemble_operator(&lat, &kernel(which, param)).unwrap();
        let prop = SpectralPropagator::new(&op).unwrap();
        let mut psi = State::gaussian(&lat, &[0.3], 1.0, &[k0]);
        psi.normalize(&lat);
        let fwd = prop.evolve(&psi.amplitudes, t);
        let back = prop.evolve(&fwd, -t);
        let n: f64 = fwd.iter().map(|a| a.norm_sqr()).sum::<f64>() * lat.cell_volume();
        prop_assert!((n - 1.0).abs() <= 1e-12);
        let err = back.iter().zip(&psi.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-11);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn markov_bound_holds_outside_the_cone(a in 3.5f64..7.0, factor in 1.1f64..3.0, width in 0.3f64..1.0) {
        let lat = Lattice::new(1, 32.0, 256, Boundary::Truncated).unwrap();
        let op = assemble_operator(&lat, &KernelSpec::power_law(a)).unwrap();
        let x = RegionSet::interval(&lat, -1.0, 1.0);
        let kappa = schur_kappa(&op, &distance_function(&lat, &x).unwrap(), 1).unwrap();
        let mut psi = State::gaussian(&lat, &[0.0], width, &[0.0]);
        for (v, &inside) in psi.amplitudes.iter_mut().zip(x.mask()) {
            if !inside {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        psi.normalize(&lat);
        let times: Vec<f64> = (0..=40).map(|k| 0.5 * k as f64).collect();
        let traj = evolve_autonomous(&op, &psi, &times).unwrap();
        let m = markov_tail_measure(&traj, &lat, &x, factor * kappa, 2).unwrap();
        prop_assert_eq!(m.violations, 0);
    }

    #[test]
    fn sandwich_holds_for_random_references(seed in any::<u64>(), factor in 1.2f64..3.0) {
        let cfg = ScenarioConfig::from_toml_str(
            "name = \"sandwich\"\n[lattice]\nhalf_width = 16.0\npoints = 96\n[kernel]\nfamily = \"power_law\"\na = 5.0\n[dynamics]\nt_max = 10.0\nsamples = 20\n",
        ).unwrap();
        let p = Prepared::new(&cfg).unwrap();
        let c = factor * p.kappa;
        let chi = make_cutoff((c - p.kappa) / 3.0, 2).unwrap();
        let r = sandwich_report(&p, &chi, c, p.kappa, seed, 0, 20, 10).unwrap();
        prop_assert!(r.passed, "{:?}", r.notes);
    }
}
