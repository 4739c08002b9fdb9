//! Scenario configs, builtin presets and the run pipeline behind the CLI.

pub mod checks;
pub mod config;
pub mod plot;
pub mod prepare;
pub mod presets;
pub mod random;
pub mod run;

pub use checks::{
    commutator_oracle_report, expansion_slope_report, hs_cross_check_report, norm_chain_report, sandwich_report,
    unitarity_report,
};
pub use config::{CheckConfig, CheckKind, ScenarioConfig, Speed};
pub use prepare::Prepared;
pub use presets::{list_builtin_scenarios, preset, preset_names, preset_source};
pub use run::{run_scenario, validate_scenario, RunManifest, RunOptions, RunStatus, OUT_DIR_ENV};
