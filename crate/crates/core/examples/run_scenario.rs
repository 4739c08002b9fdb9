//! Run a builtin scenario through the lab pipeline and inspect the manifest.

use lightcone_lab::lab::{list_builtin_scenarios, preset, run_scenario, RunOptions};

fn main() -> lightcone_lab::Result<()> {
    print!("{}", list_builtin_scenarios());
    let name = std::env::args().nth(1).unwrap_or_else(|| "symmetry-suite".into());
    let mut cfg = preset(&name)?;
    cfg.lattice.points = cfg.lattice.points.min(128);
    let out = std::env::temp_dir().join("lightcone-example").join(&cfg.name);
    let m = run_scenario(
        &cfg,
        &RunOptions {
            out_dir: Some(out),
            ..Default::default()
        },
    )?;
    println!("config hash {}", m.config_hash);
    for c in &m.checks {
        println!("{:<20} passed {:<5} min margin {:.3e}", c.name, c.passed, c.min_margin);
    }
    for f in &m.files {
        println!("  {}", f.path);
    }
    println!("status {:?}, exit code {}", m.status, m.exit_code());
    Ok(())
}
