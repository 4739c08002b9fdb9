//! Smooth cutoffs: admissible exponents, derivatives and the remainder integral.

use std::sync::Arc;

use lightcone_lab::cutoff::{
    combine_cutoffs, default_exponent, make_cutoff, make_cutoff_family, remainder_integral, AnalyticExtension, BumpFamily,
    SmoothProfile,
};

fn main() -> lightcone_lab::Result<()> {
    let n = 2;
    let chi = make_cutoff(0.5, n)?;
    println!("default exponent for n={n}: {}", default_exponent(n));
    for mu in [-0.1, 0.0, 0.1, 0.25, 0.4, 0.5, 0.6] {
        println!("chi({mu:5.2}) = {:.6}  chi'({mu:5.2}) = {:.6}", chi.value(mu), chi.derivative(1, mu));
    }
    println!("sup |chi| = {:.4}", chi.sup_norm());

    // Too small an exponent is rejected.
    let bad = make_cutoff_family(0.5, n, BumpFamily::Polynomial { exponent: 2 });
    println!("exponent 2 at n={n}: {}", if bad.is_ok() { "accepted" } else { "rejected" });

    let xi = combine_cutoffs(&chi, &chi, 1.0)?;
    println!("combined cutoff: delta = {}, value at 1 = {:.6}", xi.delta(), xi.value(1.0));

    let ext = AnalyticExtension::new(Arc::new(chi.clone()) as Arc<dyn SmoothProfile>, n + 1)?;
    let r = remainder_integral(&ext, n + 1)?;
    println!("remainder constant = {:.6e} (+/- {:.1e})", r.value, r.error);

    let dir = std::env::temp_dir().join("lightcone-cutoff.csv");
    let pts: Vec<f64> = (0..=60).map(|k| -0.05 + 0.6 * k as f64 / 60.0).collect();
    chi.tabulate(&pts, &dir)?;
    println!("tabulated to {}", dir.display());
    Ok(())
}
