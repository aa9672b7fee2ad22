//! Constrained-Hamiltonian engine and canonical Maxwell solver on static
//! curvilinear metrics.

#![allow(clippy::needless_range_loop)]

pub mod defaults;
pub mod dirac_bergmann;
pub mod error;
pub mod geometry;
pub mod integrate;
pub mod maxwell;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
