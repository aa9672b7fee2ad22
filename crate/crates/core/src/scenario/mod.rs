//! Scenario files, the batch runner and run reports.

mod config;
mod report;
mod runner;

pub use config::{
    GaugeConfig, GridConfig, InitialCondition, IntegratorConfig, MonitorConfig, OutputConfig, PhysicsConfig, Prepared,
    Scenario, SourceSpec, UnitScale, UnitsConfig,
};
pub use report::{
    build_report, convergence, digest, read_monitor, summarize, write_report, ConvergenceRow, Report, RunSummary,
    CONVERGENCE_CSV, DIGEST, REPORT_CSV,
};
pub use runner::{execute, output_root, run_dir, Effective, Manifest, MANIFEST, MONITOR_CSV, SNAPSHOT_DIR, VERSION};
