//! Fields of the uniform-deformation flow `v = a(t) x`.

use crate::error::Result;
use crate::gas::GasParameters;
use crate::grid::RadialGrid;
use crate::snapshot::FlowSnapshot;

use super::ode::DeformationSolution;
use super::profiles::ProfilePair;

/// The flow at time `t` on the profile grid:
///
/// ```text
/// rho(t, r) = exp(-n b) rho0(r exp(-b))
/// p(t, r)   = exp(-n gamma b) p0(r exp(-b))
/// v(t, r)   = a(t) r
/// ```
pub fn reconstruct_fields(
    sol: &DeformationSolution,
    pair: &ProfilePair,
    t: f64,
    params: &GasParameters,
) -> Result<FlowSnapshot> {
    reconstruct_on_grid(sol, pair, pair.grid().clone(), t, params)
}

/// [`reconstruct_fields`] evaluated on an arbitrary grid.
pub fn reconstruct_on_grid(
    sol: &DeformationSolution,
    pair: &ProfilePair,
    grid: RadialGrid,
    t: f64,
    params: &GasParameters,
) -> Result<FlowSnapshot> {
    params.validate()?;
    let (a, b) = sol.at(t)?;
    let n = params.n as f64;
    let stretch = (-b).exp();
    let rho_factor = (-n * b).exp();
    let p_factor = (-n * params.gamma * b).exp();
    FlowSnapshot::from_fn(
        grid,
        t,
        |r| rho_factor * pair.rho0_at(r * stretch),
        |r| a * r,
        |r| p_factor * pair.p0_at(r * stretch),
    )
}
