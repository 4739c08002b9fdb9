use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lightcone_lab::lab::{list_builtin_scenarios, preset, run_scenario, validate_scenario, RunOptions, ScenarioConfig};
use lightcone_lab::Result;

#[derive(Parser)]
#[command(name = "lightcone-lab", version, about = "Run light-cone scenarios on nonlocal lattice dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a TOML/JSON file or a builtin preset name.
    Run {
        config: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads; 0 uses every core.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        no_plots: bool,
    },
    /// List the builtin presets.
    List,
    /// Check a scenario without propagating anything.
    Validate { config: String },
}

fn load(arg: &str) -> Result<ScenarioConfig> {
    let path = Path::new(arg);
    if path.exists() {
        ScenarioConfig::from_path(path)
    } else {
        preset(arg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::List => {
            print!("{}", list_builtin_scenarios());
            0
        }
        Command::Validate { config } => match load(&config).and_then(|cfg| {
            let p = validate_scenario(&cfg)?;
            let hash = cfg.hash()?;
            Ok((cfg, p, hash))
        }) {
            Ok((cfg, p, hash)) => {
                println!("{}: ok", cfg.name);
                println!("config_hash {hash}");
                println!("sites {}  kappa {}  kappa_region {}", p.lattice.site_count(), p.kappa, p.kappa_region);
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Command::Run {
            config,
            out_dir,
            threads,
            seed,
            no_plots,
        } => {
            let opts = RunOptions {
                out_dir,
                threads,
                seed,
                no_plots,
            };
            match load(&config).and_then(|cfg| run_scenario(&cfg, &opts)) {
                Ok(m) => {
                    for c in &m.checks {
                        let verdict = if c.passed { "PASS" } else { "FAIL" };
                        match c.smallest_c {
                            Some(k) => println!("{verdict} {:<24} margin {:.3e}  C {k:.4e}", c.name, c.min_margin),
                            None => println!("{verdict} {:<24} margin {:.3e}", c.name, c.min_margin),
                        }
                    }
                    if let Some(f) = &m.failure {
                        eprintln!("error: {f}");
                    }
                    println!("{} passed, {} failed, output in {}", m.passed, m.failed, m.out_dir.display());
                    m.exit_code()
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
    };
    ExitCode::from(code as u8)
}
