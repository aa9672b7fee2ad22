use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{Prepared, Scenario};
use crate::defaults;
use crate::error::{Error, Result};
use crate::integrate::{run, MonitorRecord};
use crate::maxwell::CurlTerm;

pub const MANIFEST: &str = "manifest.json";
pub const MONITOR_CSV: &str = "monitor.csv";
pub const SNAPSHOT_DIR: &str = "snapshots";

/// `git describe` of the source tree at build time, or the crate version.
pub const VERSION: &str = env!("DIRAC_MAXWELL_VERSION");

/// Values derived from the scenario that the run actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effective {
    pub speed_of_light: f64,
    pub cells: [usize; 3],
    pub dx: [f64; 3],
    pub dt: f64,
    pub cfl: f64,
    pub stability_limit: f64,
    pub steps: usize,
    pub final_time: f64,
    pub cadence: usize,
    pub snapshot_every: usize,
    pub curl_term: CurlTerm,
    pub continuity_certified: bool,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub version: String,
    pub wall_time_seconds: f64,
    /// The scenario with every default filled in.
    pub config: Scenario,
    pub effective: Effective,
    pub monitor_csv: String,
    pub records: usize,
    pub final_record: MonitorRecord,
    /// Paths relative to the run directory.
    pub snapshots: Vec<String>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        if !path.is_file() {
            return Err(Error::ManifestMissing(dir.to_path_buf()));
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Output root: the environment override if set, else `runs`.
pub fn output_root() -> PathBuf {
    std::env::var_os(defaults::OUTPUT_ROOT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(defaults::OUTPUT_DIR))
}

/// Run directory for a prepared scenario under `root`.
pub fn run_dir(prepared: &Prepared, root: &Path) -> PathBuf {
    let dir = prepared
        .scenario
        .output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(prepared.name()));
    root.join(dir)
}

/// Run a prepared scenario into `dir`: `monitor.csv`, `snapshots/` and
/// `manifest.json`, the manifest written last.
pub fn execute(prepared: &Prepared, dir: &Path) -> Result<Manifest> {
    let started = Instant::now();
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let stale = dir.join(MANIFEST);
    if stale.exists() {
        fs::remove_file(&stale).map_err(|e| Error::io(format!("removing {}", stale.display()), e))?;
    }
    let mut cfg = prepared.run.clone();
    cfg.snapshot_dir = Some(dir.join(SNAPSHOT_DIR));
    let out = run(&prepared.model, prepared.initial.clone(), &cfg)?;
    out.log.write_csv(&dir.join(MONITOR_CSV))?;
    let final_record = *out
        .log
        .last()
        .ok_or_else(|| Error::Validation("run produced no monitor records".into()))?;
    let snapshots = out
        .snapshots
        .iter()
        .map(|p| {
            p.strip_prefix(dir)
                .unwrap_or(p)
                .to_string_lossy()
                .replace('\\', "/")
        })
        .collect();
    let g = &prepared.grid;
    let manifest = Manifest {
        name: prepared.name().to_string(),
        version: VERSION.to_string(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        config: prepared.scenario.clone(),
        effective: Effective {
            speed_of_light: prepared.speed_of_light(),
            cells: g.n,
            dx: g.dx,
            dt: prepared.dt,
            cfl: prepared.cfl,
            stability_limit: prepared.stability_limit(),
            steps: cfg.steps,
            final_time: out.final_state.time,
            cadence: cfg.cadence,
            snapshot_every: cfg.snapshot_every,
            curl_term: prepared.model.equations.curl_term,
            continuity_certified: prepared.model.source.continuity_certified,
            output_dir: dir.to_path_buf(),
        },
        monitor_csv: MONITOR_CSV.to_string(),
        records: out.log.records.len(),
        final_record,
        snapshots,
    };
    let path = dir.join(MANIFEST);
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(manifest)
}
