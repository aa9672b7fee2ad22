//! Independent oracles and studies: a flat-space E/B reference solver,
//! plane-wave dispersion and the finite-dimensional constraint chains.

mod chain;
mod compare;
mod dispersion;
mod fdtd;

pub use chain::{constraint_chain_check, em_single_mode, ChainCase, ChainReport};
pub use compare::{canonical_trajectory, compare_to_oracle, physical_fields, ComparisonReport, StepDiscrepancy};
pub use dispersion::{
    dispersion_study, fit_frequency, leapfrog_omega, semi_discrete_omega, DispersionConfig, DispersionRow, PhaseFit,
};
pub use fdtd::{fdtd_oracle, FdtdOracle, PhysicalTrajectory};

/// Source text of the oracle, for checks that it stays independent of the
/// canonical solver.
pub const ORACLE_SOURCE: &str = include_str!("fdtd.rs");

/// Observed convergence order between successive errors of a ladder refined
/// by `ratio` each rung.
pub fn observed_orders(errors: &[f64], ratio: f64) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).ln() / ratio.ln()).collect()
}
