//! Dirac-Bergmann machinery for finite-dimensional singular Lagrangians.
//!
//! Derivatives are central finite differences (see [`diff`]); the bracket is
//! `[f, g] = df/dq dg/dp - df/dp dg/dq`.

pub mod diff;
mod constraints;
mod lagrangian;
mod legendre;
mod phase;
mod singularity;

pub use constraints::{
    consistency_resolve, constrained_rhs, constrained_rhs_with, constraint_chain, project_to_surface,
    ConstrainedHamiltonian, Constraint, ConstraintChain, ConstraintKind, ConstraintSet, Multipliers,
    Resolution, SecondaryConstraint,
};
pub use lagrangian::{velocity_hessian, LagrangianFn, LagrangianSystem};
pub use legendre::{
    legendre_transform, LegendreHamiltonian, LegendreMap, LegendreOptions, MomentumConstraint,
    VelocitySolver,
};
pub use phase::{
    bracket_of_gradients, finite_difference_gradient, phase_fn, poisson_bracket, Coordinate, Momentum,
    PhaseFn, PhaseFunction, PhaseGradient,
};
pub use singularity::{pivoted_rank, singularity_report, singularity_report_with_floor, SingularityReport};
