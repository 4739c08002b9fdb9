use std::path::Path;
use std::process::Command;

use lightcone_lab::lab::{preset, run_scenario, validate_scenario, CheckKind, RunOptions, RunStatus, Speed, OUT_DIR_ENV};

const BIN: &str = env!("CARGO_BIN_EXE_lightcone-lab");

fn opts(dir: &Path) -> RunOptions {
    RunOptions {
        out_dir: Some(dir.to_path_buf()),
        ..Default::default()
    }
}

#[test]
fn minimal_preset_passes_with_empty_summary() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(&preset("minimal").unwrap(), &opts(dir.path())).unwrap();
    assert_eq!(m.status, RunStatus::Passed);
    assert_eq!(m.exit_code(), 0);
    assert!(m.checks.is_empty());
    assert_eq!((m.passed, m.failed), (0, 0));
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn slow_speed_is_rejected_before_propagation() {
    let mut cfg = preset("free-lightcone").unwrap();
    cfg.lattice.points = 64;
    for check in &mut cfg.checks {
        if let CheckKind::DecayFit { c, .. } = &mut check.kind {
            *c = Speed::Relative { times_kappa: 0.9 };
        }
    }
    let err = validate_scenario(&cfg).err().expect("c below kappa must not validate");
    assert!(err.is_configuration(), "{err}");
    let dir = tempfile::tempdir().unwrap();
    assert!(run_scenario(&cfg, &opts(dir.path())).is_err());
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn lightcone_run_writes_fit_report_and_plots() {
    let mut cfg = preset("free-lightcone").unwrap();
    cfg.lattice.points = 256;
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(&cfg, &opts(dir.path())).unwrap();
    let files: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
    assert!(files.contains(&"tail_decay_tail.csv"));
    assert!(files.contains(&"tail_decay_fit.json"));
    assert!(files.contains(&"tail_decay.json"));
    assert_eq!(files.iter().filter(|f| f.ends_with(".svg")).count(), 2);
    for f in &files {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let fit: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("tail_decay_fit.json")).unwrap()).unwrap();
    assert_eq!(fit["status"], "fitted");
}

#[test]
fn no_plots_suppresses_svg() {
    let mut cfg = preset("free-lightcone").unwrap();
    cfg.lattice.points = 64;
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(
        &cfg,
        &RunOptions {
            no_plots: true,
            ..opts(dir.path())
        },
    )
    .unwrap();
    assert!(m.files.iter().all(|f| !f.path.ends_with(".svg")));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let mut cfg = preset("symmetry-suite").unwrap();
    cfg.lattice.points = 64;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = run_scenario(&cfg, &opts(a.path())).unwrap();
    run_scenario(&cfg, &opts(b.path())).unwrap();
    for f in &ma.files {
        if f.path == "timings.json" {
            continue;
        }
        let x = std::fs::read(a.path().join(&f.path)).unwrap();
        let y = std::fs::read(b.path().join(&f.path)).unwrap();
        assert!(x == y, "{} differs", f.path);
    }
}

#[test]
fn config_json_matches_the_recorded_hash() {
    let cfg = preset("minimal").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = run_scenario(&cfg, &opts(dir.path())).unwrap();
    let written = lightcone_lab::lab::ScenarioConfig::from_path(&dir.path().join("config.json")).unwrap();
    assert_eq!(written.hash().unwrap(), m.config_hash);
    assert_eq!(m.config_hash, cfg.hash().unwrap());
}

#[test]
fn cli_list_names_every_preset() {
    let out = Command::new(BIN).arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in lightcone_lab::lab::preset_names() {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = Command::new(BIN).args(["validate", "free-lightcone"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "name = \"bad\"\n[lattice]\nhalf_width = -1.0\npoints = 16\n[kernel]\nfamily = \"zero\"\n").unwrap();
    let r = Command::new(BIN).arg("validate").arg(&bad).output().unwrap();
    assert_eq!(r.status.code(), Some(2));
    let r = Command::new(BIN).arg("run").arg(&bad).output().unwrap();
    assert_eq!(r.status.code(), Some(2));

    // The default bump exponent misses the normalized-remainder criterion.
    let failing = dir.path().join("slope.toml");
    std::fs::write(
        &failing,
        "name = \"slope\"\n[lattice]\nhalf_width = 128.0\npoints = 256\n[kernel]\nfamily = \"power_law\"\na = 5.0\n\
         [[checks]]\nname = \"slope\"\nkind = \"expansion_slope\"\ndelta = 0.9\n",
    )
    .unwrap();
    let r = Command::new(BIN)
        .arg("run")
        .arg(&failing)
        .arg("--out-dir")
        .arg(dir.path().join("slope-out"))
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(1), "{}", String::from_utf8_lossy(&r.stdout));

    let r = Command::new(BIN)
        .args(["run", "minimal", "--seed", "3", "--threads", "1", "--no-plots"])
        .env(OUT_DIR_ENV, dir.path().join("env"))
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(0));
    assert!(dir.path().join("env").join("minimal").join("manifest.json").exists());
}
