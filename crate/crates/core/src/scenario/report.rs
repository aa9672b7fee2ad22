use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::runner::{Manifest, MONITOR_CSV};
use crate::error::{Error, Result};
use crate::integrate::{Method, MonitorLog};

pub const REPORT_CSV: &str = "report.csv";
pub const CONVERGENCE_CSV: &str = "convergence.csv";
pub const DIGEST: &str = "digest.txt";

/// Extrema and drift of one run's monitor log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    /// Runs with the same group differ only in resolution, step count and
    /// output settings, and are compared in the convergence table.
    pub group: usize,
    pub dir: String,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Smallest grid spacing.
    pub dx: f64,
    pub dt: f64,
    pub steps: usize,
    pub method: Method,
    pub final_time: f64,
    pub hamiltonian_initial: f64,
    pub hamiltonian_final: f64,
    pub hamiltonian_min: f64,
    pub hamiltonian_max: f64,
    /// `max |H - H(0)| / |H(0)|`, or absolute when `H(0) = 0`.
    pub energy_drift_max: f64,
    pub energy_drift_final: f64,
    pub p0_max: f64,
    pub p0_final: f64,
    pub gauss_residual_max: f64,
    pub gauss_residual_final: f64,
    pub ampere_residual_max: f64,
    pub ampere_residual_final: f64,
}

/// Observed orders between two runs at successive resolutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub group: usize,
    pub coarse: String,
    pub fine: String,
    pub dx_coarse: f64,
    pub dx_fine: f64,
    pub order_gauss: f64,
    pub order_ampere: f64,
    pub order_energy_drift: f64,
    pub order_p0: f64,
    /// Three-level Richardson order of the final Hamiltonian using this
    /// pair and the next coarser run; NaN on the coarsest pair.
    pub order_hamiltonian_richardson: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub runs: Vec<RunSummary>,
    pub convergence: Vec<ConvergenceRow>,
}

pub fn summarize(dir: &Path, manifest: &Manifest, log: &MonitorLog) -> Result<RunSummary> {
    let first = log
        .records
        .first()
        .ok_or_else(|| Error::Validation(format!("{}: monitor log is empty", dir.display())))?;
    let last = log.records.last().unwrap_or(first);
    let h0 = first.hamiltonian;
    let drift = |h: f64| {
        if h0 != 0.0 {
            ((h - h0) / h0).abs()
        } else {
            h.abs()
        }
    };
    let fold = |f: &dyn Fn(&crate::integrate::MonitorRecord) -> f64| log.records.iter().map(f).fold(0.0, f64::max);
    let e = &manifest.effective;
    Ok(RunSummary {
        name: manifest.name.clone(),
        group: 0,
        dir: dir.display().to_string(),
        nx: e.cells[0],
        ny: e.cells[1],
        nz: e.cells[2],
        dx: e.dx.iter().copied().fold(f64::INFINITY, f64::min),
        dt: e.dt,
        steps: e.steps,
        method: manifest.config.integrator.method,
        final_time: last.time,
        hamiltonian_initial: h0,
        hamiltonian_final: last.hamiltonian,
        hamiltonian_min: log.records.iter().map(|r| r.hamiltonian).fold(f64::INFINITY, f64::min),
        hamiltonian_max: log.records.iter().map(|r| r.hamiltonian).fold(f64::NEG_INFINITY, f64::max),
        energy_drift_max: fold(&|r| drift(r.hamiltonian)),
        energy_drift_final: drift(last.hamiltonian),
        p0_max: fold(&|r| r.p0_max),
        p0_final: last.p0_max,
        gauss_residual_max: fold(&|r| r.gauss_residual_max),
        gauss_residual_final: last.gauss_residual_max,
        ampere_residual_max: fold(&|r| r.ampere_residual_max),
        ampere_residual_final: last.ampere_residual_max,
    })
}

fn order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    if coarse > 0.0 && fine > 0.0 {
        (coarse / fine).ln() / ratio.ln()
    } else {
        f64::NAN
    }
}

/// The part of a scenario that must agree for two runs to form a ladder.
fn ladder_key(m: &Manifest) -> Result<String> {
    let mut c = m.config.clone();
    c.name = None;
    c.grid.cells = [0; 3];
    c.integrator.steps = 0;
    c.integrator.dt = None;
    c.integrator.cfl = None;
    c.monitor = Default::default();
    c.output = Default::default();
    Ok(serde_json::to_string(&c)?)
}

/// Observed orders between successive runs of each group, sorted from coarse
/// to fine. Runs with equal spacing are not compared.
pub fn convergence(runs: &[RunSummary]) -> Vec<ConvergenceRow> {
    let mut rows = Vec::new();
    let groups = runs.iter().map(|r| r.group).max().map_or(0, |g| g + 1);
    for g in 0..groups {
        let mut sorted: Vec<&RunSummary> = runs.iter().filter(|r| r.group == g).collect();
        sorted.sort_by(|a, b| b.dx.total_cmp(&a.dx));
        sorted.dedup_by(|b, a| a.dx == b.dx);
        ladder(g, &sorted, &mut rows);
    }
    rows
}

fn ladder(group: usize, sorted: &[&RunSummary], rows: &mut Vec<ConvergenceRow>) {
    for i in 1..sorted.len() {
        let (c, f) = (sorted[i - 1], sorted[i]);
        let r = c.dx / f.dx;
        let richardson = if i >= 2 {
            let h = [sorted[i - 2], c, f].map(|s| s.hamiltonian_final);
            order((h[0] - h[1]).abs(), (h[1] - h[2]).abs(), r)
        } else {
            f64::NAN
        };
        rows.push(ConvergenceRow {
            group,
            coarse: c.name.clone(),
            fine: f.name.clone(),
            dx_coarse: c.dx,
            dx_fine: f.dx,
            order_gauss: order(c.gauss_residual_max, f.gauss_residual_max, r),
            order_ampere: order(c.ampere_residual_max, f.ampere_residual_max, r),
            order_energy_drift: order(c.energy_drift_max, f.energy_drift_max, r),
            order_p0: order(c.p0_max, f.p0_max, r),
            order_hamiltonian_richardson: richardson,
        });
    }
}

/// Read every run directory and build the tables.
pub fn build_report(dirs: &[PathBuf]) -> Result<Report> {
    if dirs.is_empty() {
        return Err(Error::Validation("report needs at least one run directory".into()));
    }
    let mut runs = Vec::with_capacity(dirs.len());
    let mut keys: Vec<String> = Vec::new();
    for dir in dirs {
        let manifest = Manifest::read(dir)?;
        let log = MonitorLog::read_csv(&dir.join(&manifest.monitor_csv))?;
        let mut summary = summarize(dir, &manifest, &log)?;
        let key = ladder_key(&manifest)?;
        summary.group = keys.iter().position(|k| *k == key).unwrap_or_else(|| {
            keys.push(key);
            keys.len() - 1
        });
        runs.push(summary);
    }
    let convergence = convergence(&runs);
    Ok(Report { runs, convergence })
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn digest(report: &Report) -> String {
    let mut s = String::new();
    for r in &report.runs {
        let _ = writeln!(
            s,
            "run {} [group {}] ({}x{}x{}, dx {:.6e}, dt {:.6e}, {} steps, {:?})",
            r.name, r.group, r.nx, r.ny, r.nz, r.dx, r.dt, r.steps, r.method
        );
        let _ = writeln!(
            s,
            "  H(0) {:.12e}  H range [{:.12e}, {:.12e}]  max rel drift {:.3e}  final {:.3e}",
            r.hamiltonian_initial, r.hamiltonian_min, r.hamiltonian_max, r.energy_drift_max, r.energy_drift_final
        );
        let _ = writeln!(s, "  |p0| max {:.3e}  final {:.3e}", r.p0_max, r.p0_final);
        let _ = writeln!(
            s,
            "  gauss residual max {:.3e}  final {:.3e}",
            r.gauss_residual_max, r.gauss_residual_final
        );
        let _ = writeln!(
            s,
            "  ampere residual max {:.3e}  final {:.3e}",
            r.ampere_residual_max, r.ampere_residual_final
        );
    }
    if !report.convergence.is_empty() {
        let _ = writeln!(s, "observed orders");
        for c in &report.convergence {
            let _ = writeln!(
                s,
                "  [group {}] {} -> {} (dx {:.4e} -> {:.4e}): gauss {:.3}  ampere {:.3}  energy drift {:.3}  p0 {:.3}  H richardson {:.3}",
                c.group,
                c.coarse,
                c.fine,
                c.dx_coarse,
                c.dx_fine,
                c.order_gauss,
                c.order_ampere,
                c.order_energy_drift,
                c.order_p0,
                c.order_hamiltonian_richardson
            );
        }
    }
    s
}

/// Write `report.csv`, `convergence.csv` (when there are at least two
/// resolutions) and `digest.txt` into `out`.
pub fn write_report(report: &Report, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| Error::io(format!("creating {}", out.display()), e))?;
    let mut written = vec![out.join(REPORT_CSV)];
    write_rows(&written[0], &report.runs)?;
    if !report.convergence.is_empty() {
        let p = out.join(CONVERGENCE_CSV);
        write_rows(&p, &report.convergence)?;
        written.push(p);
    }
    let p = out.join(DIGEST);
    fs::write(&p, digest(report)).map_err(|e| Error::io(format!("writing {}", p.display()), e))?;
    written.push(p);
    Ok(written)
}

/// Monitor log of a run directory.
pub fn read_monitor(dir: &Path) -> Result<MonitorLog> {
    MonitorLog::read_csv(&dir.join(MONITOR_CSV))
}
