//! Builtin scenarios, embedded from `scenarios/*.toml`.

use std::fmt::Write;

use super::config::ScenarioConfig;
use crate::error::{LabError, Result};

const PRESETS: &[(&str, &str)] = &[
    ("free-lightcone", include_str!("../../scenarios/free-lightcone.toml")),
    ("driven-envelope", include_str!("../../scenarios/driven-envelope.toml")),
    ("expansion-slope", include_str!("../../scenarios/expansion-slope.toml")),
    ("hs-cross-check", include_str!("../../scenarios/hs-cross-check.toml")),
    ("soliton-speed", include_str!("../../scenarios/soliton-speed.toml")),
    ("symmetry-suite", include_str!("../../scenarios/symmetry-suite.toml")),
    ("minimal", include_str!("../../scenarios/minimal.toml")),
];

/// Names of the builtin scenarios, in listing order.
pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Raw TOML of a builtin scenario.
pub fn preset_source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let src = preset_source(name).ok_or_else(|| LabError::config("scenario", format!("unknown preset `{name}`")))?;
    ScenarioConfig::from_toml_str(src)
}

/// One line per preset: name, lattice size, checks, description.
pub fn list_builtin_scenarios() -> String {
    let mut out = String::new();
    for name in preset_names() {
        match preset(name) {
            Ok(cfg) => {
                let checks: Vec<&str> = cfg.checks.iter().map(|c| c.kind.label()).collect();
                let checks = if checks.is_empty() { "-".to_string() } else { checks.join(",") };
                let _ = writeln!(
                    out,
                    "{name:<16} N={:<5} {checks:<58} {}",
                    cfg.lattice.points, cfg.description
                );
            }
            Err(e) => {
                let _ = writeln!(out, "{name:<16} invalid: {e}");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses_and_validates() {
        for name in preset_names() {
            let cfg = preset(name).unwrap();
            assert_eq!(cfg.name, name);
            cfg.validate().unwrap();
        }
        assert!(preset("nope").is_err());
    }
}
