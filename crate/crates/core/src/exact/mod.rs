//! Globally smooth flows with uniform deformation `v = a(t) x`.
//!
//! The pipeline is: pick a pressure template, build compatible initial
//! profiles, derive the forcing constant of the deformation ODE, integrate
//! `a(t)`, and reconstruct density and pressure along the trajectory map
//! `x(t) = x(0) exp(b(t))`.

mod ode;
mod profiles;
mod reconstruct;
mod shape;

pub use ode::{
    deformation_constant, excluding_pressure_constant, integrate_deformation, DeformationODE, DeformationSolution,
};
pub use profiles::{
    build_compatible_profiles, build_pointwise_profiles, check_compatibility, check_compatibility_samples,
    CompatibilityCheck, ProfileGrid, ProfileKind, ProfilePair,
};
pub use reconstruct::{reconstruct_fields, reconstruct_on_grid};
pub use shape::{GaussianShape, PressureShape, TabulatedShape};
