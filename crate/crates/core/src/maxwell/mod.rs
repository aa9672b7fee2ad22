//! Canonical Maxwell field on a static metric.
//!
//! Variables: covariant potentials `A_0, A_i`, the momentum `p^0` conjugate
//! to `A_0`, and the density-weighted contravariant momenta
//! `p^i = sqrt(-g) F^{i0} / (4 pi c^2)`. The evolution is
//!
//! ```text
//! Adot_0 = lambda
//! Adot_i = c D_i A_0 - (4 pi c^3 / sqrt(-g)) g_00 g_ij p^j
//! pdot^0 = c D_i p^i - sqrt(-g) rho / c
//! pdot^i = (1/4 pi c) D_j(sqrt(-g) F^{ji}) - (sqrt(-g)/c^2) j^i
//! ```
//!
//! with `D_i` the second-order periodic central difference and `F_ij =
//! D_i A_j - D_j A_i`.

mod field;
mod initial;
mod source;
mod state;

pub use field::{bianchi_residual, extract_dh, CurlTerm, FieldEquations, FieldTensor, Rhs, PAIRS};
pub use initial::{
    gauss_consistent_charge, gaussian_pulse, gaussian_pulse_fields, manufactured_charge, PhysicalFields, PlaneWave};
pub use source::{oscillating_dipole, static_charge, CurrentSource, PeriodicBump, Profile, SourceTerm};
pub use state::{read_snapshot, sidecar_path, write_snapshot, FieldState, SnapshotMeta, ARRAY_NAMES};
