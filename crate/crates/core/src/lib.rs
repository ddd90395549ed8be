//! Generalized momenta of mass for compressible gas flow.
//!
//! The crate computes functionals `G_phi = int rho phi(|x|) dx` of radially
//! symmetric flows and the integrals that govern their second time
//! derivative, builds exact flows with a linear velocity profile, checks
//! decay-class growth conditions for global existence, tracks material
//! volumes, and carries a small radial finite-volume Euler solver used to
//! cross-check the exact solutions.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod exact;
pub mod gas;
pub mod grid;
pub mod lagrangian;
pub mod momenta;
pub mod snapshot;
pub mod solver;

pub use error::{Error, Result};
pub use gas::GasParameters;
pub use grid::{integrate_radial, RadialGrid};
pub use snapshot::{conserved, ConservedReport, FlowSnapshot};
