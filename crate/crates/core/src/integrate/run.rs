use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::step::{Method, Model};
use crate::error::{Error, Result};
use crate::geometry::{max_abs, max_abs3};
use crate::maxwell::{write_snapshot, FieldState};

/// One monitor row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorRecord {
    pub step: usize,
    pub time: f64,
    pub hamiltonian: f64,
    pub p0_max: f64,
    pub gauss_residual_max: f64,
    pub ampere_residual_max: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MonitorLog {
    pub records: Vec<MonitorRecord>,
}

impl MonitorLog {
    pub fn last(&self) -> Option<&MonitorRecord> {
        self.records.last()
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io("flushing CSV", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("CSV output is ASCII"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let text = self.to_csv_string()?;
        let mut f = fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        f.write_all(text.as_bytes())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let records = r.deserialize().collect::<std::result::Result<Vec<MonitorRecord>, _>>()?;
        Ok(Self { records })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub dt: f64,
    pub steps: usize,
    /// Record every `cadence` steps; the final step is always recorded.
    pub cadence: usize,
    /// Snapshot every `snapshot_every` steps (0: final state only).
    pub snapshot_every: usize,
    /// Where snapshots go; `None` disables them.
    pub snapshot_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub log: MonitorLog,
    pub final_state: FieldState,
    pub snapshots: Vec<PathBuf>,
}

fn record(model: &Model, step: usize, dt: f64, prev: &FieldState, cur: &FieldState, next: &FieldState) -> MonitorRecord {
    let eq = &model.equations;
    let (metric, source) = (&model.metric, &model.source);
    let gauss = eq.gauss_residual(cur, metric, source);
    let dp = eq.displacement(prev, metric);
    let dn = eq.displacement(next, metric);
    let d_dot = [0, 1, 2].map(|i| {
        dn[i].iter()
            .zip(&dp[i])
            .map(|(a, b)| (a - b) / (2.0 * dt))
            .collect::<Vec<_>>()
    });
    let ampere = eq.ampere_residual(cur, metric, source, &d_dot);
    MonitorRecord {
        step,
        time: cur.time,
        hamiltonian: model.hamiltonian(cur),
        p0_max: cur.p0_max(),
        gauss_residual_max: max_abs(&gauss),
        ampere_residual_max: max_abs3(&ampere),
    }
}

/// Integrate `steps` steps from `initial`, recording monitors and writing
/// snapshots. The Ampere residual needs `D` one step either side of the
/// recorded state, so one backward step is taken before the loop and one
/// look-ahead step after the last. Serial and deterministic.
pub fn run(model: &Model, initial: FieldState, cfg: &RunConfig) -> Result<RunOutput> {
    initial.check()?;
    model.metric.check_grid(&initial.grid)?;
    model.source.check_grid(&initial.grid)?;
    if cfg.cadence == 0 {
        return Err(Error::Validation("monitor cadence must be at least 1".into()));
    }
    let dt = cfg.dt;
    if let Some(dir) = &cfg.snapshot_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    }
    let mut log = MonitorLog::default();
    let mut snapshots = Vec::new();
    let mut prev = model.step(cfg.method, &initial, -dt)?;
    let mut cur = initial;
    for n in 0..=cfg.steps {
        let next = model.step(cfg.method, &cur, dt)?;
        if n % cfg.cadence == 0 || n == cfg.steps {
            let r = record(model, n, dt, &prev, &cur, &next);
            let values = [r.hamiltonian, r.p0_max, r.gauss_residual_max, r.ampere_residual_max];
            if !values.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteState {
                    field: "monitor",
                    time: cur.time,
                });
            }
            log.records.push(r);
        }
        if let Some(dir) = &cfg.snapshot_dir {
            let due = n == cfg.steps || (cfg.snapshot_every > 0 && n % cfg.snapshot_every == 0);
            if due {
                let path = dir.join(format!("snapshot_{n:06}.bin"));
                write_snapshot(&cur, n, model.equations.c, &path)?;
                snapshots.push(path);
            }
        }
        if n == cfg.steps {
            return Ok(RunOutput {
                log,
                final_state: cur,
                snapshots,
            });
        }
        prev = std::mem::replace(&mut cur, next);
    }
    unreachable!("loop returns on the final step")
}
