use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::checks::{check_cutoff, run_check, validate_speeds};
use super::config::{Format, ScenarioConfig};
use super::prepare::Prepared;
use crate::cutoff::CutoffFunction;
use crate::error::{LabError, Result};
use crate::propagate::{evolve_autonomous, evolve_nonautonomous, default_dt, StateTrajectory};
use crate::verify::InequalityReport;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LIGHTCONE_LAB_OUT";

/// Command-line overrides applied on top of a config.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub no_plots: bool,
}

impl RunOptions {
    pub fn apply(&self, cfg: &ScenarioConfig) -> ScenarioConfig {
        let mut cfg = cfg.clone();
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.no_plots {
            cfg.output.plots = false;
        }
        cfg
    }

    /// --out-dir, then the environment, then the config, then `lightcone-out/<name>`.
    pub fn resolve_out_dir(&self, cfg: &ScenarioConfig) -> PathBuf {
        if let Some(d) = &self.out_dir {
            return d.clone();
        }
        if let Some(d) = std::env::var_os(OUT_DIR_ENV) {
            return PathBuf::from(d).join(&cfg.name);
        }
        if let Some(d) = &cfg.output.dir {
            return PathBuf::from(d);
        }
        PathBuf::from("lightcone-out").join(&cfg.name)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    /// Size and hash are absent for files whose content varies between runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bytes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub kind: String,
    pub passed: bool,
    pub smallest_c: Option<f64>,
    pub min_margin: f64,
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Passed,
    Failed,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Summary of one run. Wall-clock timings are written to `timings.json`
/// so that `manifest.json` stays byte-identical across runs.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    pub config_hash: String,
    pub tool_version: String,
    pub seed: u64,
    pub stages: Vec<String>,
    pub files: Vec<FileEntry>,
    pub checks: Vec<CheckSummary>,
    pub passed: usize,
    pub failed: usize,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(skip)]
    pub timings: Vec<StageTiming>,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl RunManifest {
    /// 0 when every check passed, 1 on a failed check, 2 on a stage error.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            RunStatus::Passed => 0,
            RunStatus::Failed => 1,
            RunStatus::Error => 2,
        }
    }
}

/// Serialized writer for every artifact of a run.
pub struct Artifacts {
    dir: PathBuf,
    csv: bool,
    json: bool,
    plots: bool,
    files: Vec<String>,
}

impl Artifacts {
    fn new(dir: &Path, cfg: &ScenarioConfig) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            csv: cfg.output.formats.contains(&Format::Csv),
            json: cfg.output.formats.contains(&Format::Json),
            plots: cfg.output.plots,
            files: Vec::new(),
        })
    }

    fn record(&mut self, file: &str) -> PathBuf {
        self.files.push(file.to_string());
        self.dir.join(file)
    }

    pub fn json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<()> {
        if !self.json {
            return Ok(());
        }
        let path = self.record(file);
        std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
        Ok(())
    }

    pub fn csv(&mut self, file: &str, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
        if !self.csv {
            return Ok(());
        }
        let path = self.record(file);
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Hands a CSV path to a writer that owns its schema.
    pub fn with_path(&mut self, file: &str, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
        if !self.csv {
            return Ok(());
        }
        let path = self.record(file);
        write(&path)
    }

    pub fn svg(&mut self, file: &str, render: impl FnOnce() -> String) -> Result<()> {
        if !self.plots {
            return Ok(());
        }
        let path = self.record(file);
        std::fs::write(path, render())?;
        Ok(())
    }

    pub fn report(&mut self, name: &str, r: &InequalityReport) -> Result<()> {
        self.json(&format!("{name}.json"), r)?;
        if self.csv {
            let path = self.record(&format!("{name}.csv"));
            r.write_csv(&path)?;
        }
        Ok(())
    }

    fn inventory(&self, volatile: &[&str]) -> Result<Vec<FileEntry>> {
        let mut out = Vec::new();
        for f in &self.files {
            let bytes = std::fs::read(self.dir.join(f))?;
            let stable = !volatile.contains(&f.as_str());
            out.push(FileEntry {
                path: f.clone(),
                bytes: stable.then_some(bytes.len() as u64),
                sha256: stable.then(|| hex::encode(Sha256::digest(&bytes))),
            });
        }
        Ok(out)
    }
}

/// Field checks, operator assembly and the speed hypotheses; no propagation.
pub fn validate_scenario(cfg: &ScenarioConfig) -> Result<Prepared> {
    cfg.validate()?;
    let p = Prepared::new(cfg)?;
    validate_speeds(&p, cfg)?;
    Ok(p)
}

fn trajectory(p: &Prepared, cfg: &ScenarioConfig) -> Result<StateTrajectory> {
    if p.potential.is_none() {
        evolve_autonomous(&p.op, &p.psi0, &p.times)
    } else {
        let dt = cfg.dynamics.dt.unwrap_or_else(|| default_dt(&p.op));
        evolve_nonautonomous(&p.op, &p.potential, &p.psi0, &p.times, dt)
    }
}

struct Stages {
    order: Vec<String>,
    timings: Vec<StageTiming>,
}

impl Stages {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        self.order.push(stage.to_string());
        let out = f();
        self.timings.push(StageTiming {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }
}

/// Validate, then run assemble, bounds, cutoffs, propagate and checks in order.
///
/// Configuration errors are returned as `Err`; a failure inside a stage
/// yields a manifest with status `error`, the partial inventory and the cause.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunManifest> {
    let cfg = opts.apply(cfg);
    cfg.validate()?;
    let out_dir = opts.resolve_out_dir(&cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| LabError::config("threads", e.to_string()))?;
    faer::set_global_parallelism(faer::Par::Seq);
    pool.install(|| execute(&cfg, out_dir))
}

fn execute(cfg: &ScenarioConfig, out_dir: PathBuf) -> Result<RunManifest> {
    let mut stages = Stages {
        order: Vec::new(),
        timings: Vec::new(),
    };
    let p = stages.time("assemble", || Prepared::new(cfg))?;
    validate_speeds(&p, cfg)?;
    let mut art = Artifacts::new(&out_dir, cfg)?;
    art.json("config.json", &serde_json::to_value(cfg)?)?;

    let mut summaries = Vec::new();
    let outcome: Result<()> = (|| {
        stages.time("bounds", || {
            let n = cfg.checks.iter().filter_map(|c| c.kind.order()).max().unwrap_or(2);
            let bounds = p.bounds(n)?;
            let mut doc = BTreeMap::new();
            doc.insert("kappa", serde_json::to_value(p.kappa)?);
            doc.insert("kappa_region", serde_json::to_value(p.kappa_region)?);
            doc.insert("speed_bounds", serde_json::to_value(&bounds)?);
            doc.insert("norm_estimate", serde_json::to_value(p.op.norm_estimate())?);
            art.json("bounds.json", &doc)
        })?;
        let cutoffs: Vec<Option<CutoffFunction>> = stages.time("cutoffs", || {
            let mut out = Vec::new();
            for check in &cfg.checks {
                let chi = check_cutoff(&p, &check.kind)?;
                if let Some(chi) = &chi {
                    let d = chi.delta();
                    let pts: Vec<f64> = (0..=120).map(|k| -0.1 * d + 1.2 * d * k as f64 / 120.0).collect();
                    art.with_path(&format!("{}_cutoff.csv", check.name), |path| chi.tabulate(&pts, path))?;
                }
                out.push(chi);
            }
            Ok(out)
        })?;
        let traj = if cfg.checks.iter().any(|c| c.kind.needs_trajectory()) {
            let t = stages.time("propagate", || trajectory(&p, cfg))?;
            art.with_path("trajectory.csv", |path| t.write_csv(&p.lattice, path))?;
            Some(t)
        } else {
            None
        };
        stages.time("checks", || {
            for (i, check) in cfg.checks.iter().enumerate() {
                let r = run_check(&p, cfg, i, check, cutoffs[i].as_ref(), traj.as_ref(), &mut art)
                    .map_err(|e| LabError::config(format!("checks[{i}] ({})", check.name), e.to_string()))?;
                summaries.push(CheckSummary {
                    name: check.name.clone(),
                    kind: check.kind.label().to_string(),
                    passed: r.passed,
                    smallest_c: r.smallest_c,
                    min_margin: r.min_margin(),
                    notes: r.notes.clone(),
                });
            }
            Ok(())
        })
    })();

    let passed = summaries.iter().filter(|s| s.passed).count();
    let failed = summaries.len() - passed;
    let (status, failure) = match outcome {
        Err(e) => (RunStatus::Error, Some(e.to_string())),
        Ok(()) if failed > 0 => (RunStatus::Failed, None),
        Ok(()) => (RunStatus::Passed, None),
    };
    let timings = stages.timings.clone();
    art.json("timings.json", &timings)?;
    let mut files = art.inventory(&["timings.json"])?;
    files.push(FileEntry {
        path: "manifest.json".into(),
        bytes: None,
        sha256: None,
    });
    let mut manifest = RunManifest {
        scenario: cfg.name.clone(),
        config_hash: cfg.hash()?,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        stages: stages.order,
        files,
        checks: summaries,
        passed,
        failed,
        status,
        failure,
        timings,
        out_dir: PathBuf::new(),
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(out_dir.join("manifest.json"), &text)?;
    manifest.out_dir = out_dir;
    Ok(manifest)
}
