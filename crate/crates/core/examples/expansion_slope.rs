//! Residual of the order-n commutator expansion as the scale s grows.

use lightcone_lab::cutoff::{make_cutoff_family, BumpFamily};
use lightcone_lab::lab::{expansion_slope_report, preset, Prepared};
use lightcone_lab::opcalc::ExpansionSide;

fn main() -> lightcone_lab::Result<()> {
    let cfg = preset("expansion-slope")?;
    let p = Prepared::new(&cfg)?;
    let n = 2;
    let scales: Vec<f64> = (2..=10).map(|k| f64::powi(2.0, k)).collect();
    for exponent in [3, 6] {
        let chi = make_cutoff_family(0.9, n, BumpFamily::Polynomial { exponent })?;
        let r = expansion_slope_report(&p, &chi, n, &scales, ExpansionSide::Right, 0.0)?;
        println!(
            "m={exponent}: slope {:.3} (target {}), normalized remainder max/min {:.2}, passed {}",
            r.extras["slope"],
            -(n as f64 + 1.0),
            r.extras["normalized_remainder_ratio"],
            r.passed
        );
        for (s, v) in r.series["s"].iter().zip(&r.series["residual_norm"]) {
            println!("  s={s:6}  residual {v:.3e}");
        }
    }
    Ok(())
}
