//! `simulate`: finite-volume evolution of a snapshot.

use std::path::PathBuf;

use genmom::solver::{run as solve, ConservedState, FluxKind, SolverConfig};
use serde::Serialize;

use super::{positive, read_snapshot, require, snapshot_inputs, Context};
use crate::args::{FluxChoice, SimulateArgs};
use crate::failure::Failure;
use crate::object;

#[derive(Debug, Clone, Serialize)]
struct SimulateSettings {
    snapshot: PathBuf,
    cells: usize,
    r_max: Option<f64>,
    cfl: f64,
    flux: FluxChoice,
    t_end: f64,
    out_every: Option<f64>,
    max_mass_drift: Option<f64>,
}

pub fn run(args: SimulateArgs, ctx: &Context) -> Result<(), Failure> {
    let settings = SimulateSettings {
        snapshot: require(args.snapshot, "snapshot")?,
        cells: args.cells.unwrap_or(200),
        r_max: args.r_max.map(|r| positive(r, "r_max")).transpose()?,
        cfl: positive(args.cfl.unwrap_or(SolverConfig::default().cfl), "cfl")?,
        flux: args.flux.unwrap_or(FluxChoice::Rusanov),
        t_end: require(args.t_end, "t_end")?,
        out_every: args.out_every.map(|d| positive(d, "out_every")).transpose()?,
        max_mass_drift: args.max_mass_drift,
    };
    if settings.cells < 2 {
        return Err(Failure::Config(format!("`cells` must be at least 2, got {}", settings.cells)));
    }
    let config = SolverConfig {
        cfl: settings.cfl,
        flux: match settings.flux {
            FluxChoice::Rusanov => FluxKind::Rusanov,
            FluxChoice::Hll => FluxKind::Hll,
        },
    };
    config.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let inputs = snapshot_inputs(&settings.snapshot)?;
    let (snap, params) = read_snapshot(&settings.snapshot)?;
    if settings.t_end.is_nan() || settings.t_end < snap.t() {
        return Err(Failure::Config(format!("t_end {} precedes the snapshot time {}", settings.t_end, snap.t())));
    }
    let mut out = ctx.open("simulate", serde_json::to_value(&settings).unwrap(), inputs)?;

    let r_max = settings.r_max.unwrap_or(snap.grid().r_max());
    let state = ConservedState::from_snapshot(&snap, settings.cells, r_max, &params)?;
    let result = solve(state, settings.t_end, settings.out_every, &config, &params)?;

    let mut files = Vec::new();
    for (k, s) in result.snapshots.iter().enumerate() {
        let name = format!("sim_{k:04}.csv");
        out.write_snapshot(&name, s, &params)?;
        files.push(object! { "file" => name, "t" => s.t() });
    }
    let rows: Vec<Vec<f64>> =
        result.log.iter().map(|c| vec![c.t, c.mass, c.outflow, c.kinetic, c.internal, c.g]).collect();
    out.write_csv("conservation.csv", &["t", "mass", "outflow", "E_k", "E_i", "G"], &rows)?;

    let drift = result.mass_drift();
    let pass = settings.max_mass_drift.is_none_or(|tol| drift <= tol);
    let body = object! {
        "steps" => result.steps,
        "mass_drift" => drift,
        "final_t" => result.final_state.t,
        "r_max" => r_max,
        "n" => params.n,
        "gamma" => params.gamma,
        "snapshots" => files,
        "pass" => pass,
    };
    out.write_json("simulate.json", body)?;
    if !pass {
        return Err(Failure::Check(format!("mass drift {drift:e} exceeds {:e}", settings.max_mass_drift.unwrap())));
    }
    Ok(())
}
