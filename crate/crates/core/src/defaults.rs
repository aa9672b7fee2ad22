//! Every physics default in one place. The manifest echoes the effective
//! values, so nothing here is hidden configuration.

/// Courant number used when a scenario gives neither `dt` nor `cfl`.
pub const CFL: f64 = 0.5;
/// Largest accepted Courant number; steps above it are refused.
pub const MAX_CFL: f64 = 0.5;
/// Speed of light in Gaussian units, cm/s.
pub const C_GAUSSIAN: f64 = 2.997_924_58e10;
/// Speed of light in desk units.
pub const C_DESK: f64 = 1.0;
/// Relative threshold for the velocity-Hessian rank.
pub const RANK_TOL: f64 = 1e-6;
/// Constraint surface thickness.
pub const CONSTRAINT_TOL: f64 = 1e-8;
/// Monitor cadence in steps.
pub const MONITOR_CADENCE: usize = 1;
/// Snapshot cadence in steps; 0 writes only the final state.
pub const SNAPSHOT_EVERY: usize = 0;
/// Output directory relative to the output root.
pub const OUTPUT_DIR: &str = "runs";
/// Environment variable overriding the output root.
pub const OUTPUT_ROOT_ENV: &str = "DIRAC_MAXWELL_OUTPUT_ROOT";
