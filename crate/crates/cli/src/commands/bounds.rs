//! `bounds`: growth certificate for a decay class.

use std::path::PathBuf;

use genmom::bounds::{classify_snapshot, contradiction_time, DecayClassSpec, GrowthData, ScanOptions};
use genmom::momenta::{g_phi, g_phi_rate, WeightFunction};
use genmom::{conserved, GasParameters};
use serde::Serialize;
use serde_json::Value;

use super::{input_digest, positive, read_snapshot, require, snapshot_inputs, Context};
use crate::args::{BoundsArgs, Expectation};
use crate::failure::Failure;
use crate::object;

#[derive(Debug, Clone, Serialize)]
struct BoundsSettings {
    spec: DecayClassSpec,
    snapshot: Option<PathBuf>,
    data: Option<GrowthData>,
    dim: usize,
    gamma: f64,
    horizon: f64,
    scan: ScanOptions,
    expect: Option<Expectation>,
}

fn load_spec(args: &BoundsArgs) -> Result<(DecayClassSpec, Vec<(String, String)>), Failure> {
    match (&args.spec_file, &args.class) {
        (Some(path), _) => {
            let digest = input_digest(path)?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            let spec = toml::from_str(&text).map_err(|e| {
                let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1).unwrap_or(1);
                Failure::Config(format!("{}:{line}: {}", path.display(), e.message().trim()))
            })?;
            Ok((spec, vec![(path.display().to_string(), digest)]))
        }
        (None, Some(spec)) => Ok((spec.clone(), vec![])),
        (None, None) => Err(Failure::Config("missing decay class: pass --spec <file> or set [bounds.spec]".into())),
    }
}

pub fn run(args: BoundsArgs, ctx: &Context) -> Result<(), Failure> {
    let (spec, mut inputs) = load_spec(&args)?;
    let defaults = ScanOptions::default();
    let scan = ScanOptions {
        points_per_decade: args.points_per_decade.unwrap_or(defaults.points_per_decade),
        first_time: args.first_time.unwrap_or(defaults.first_time),
        rel_tol: args.rel_tol.unwrap_or(defaults.rel_tol),
    };
    let horizon = positive(args.horizon.unwrap_or(1e6), "horizon")?;

    // conserved quantities come from the snapshot, or from flags when none is given
    let (snapshot, params) = match &args.snapshot {
        Some(path) => {
            inputs.extend(snapshot_inputs(path)?);
            let (snap, params) = read_snapshot(path)?;
            (Some(snap), params)
        }
        None => {
            let p = GasParameters::new(args.dim.unwrap_or(3), args.gamma.unwrap_or(5.0 / 3.0))
                .map_err(|e| Failure::Config(e.to_string()))?;
            (None, p)
        }
    };
    let data = match snapshot {
        Some(_) => None,
        None => Some(GrowthData {
            e_total: require(args.energy, "energy")?,
            g0: require(args.g0, "g0")?,
            g0_rate: require(args.g0_rate, "g0_rate")?,
            mass: require(args.mass, "mass")?,
        }),
    };
    spec.validate(params.n).map_err(|e| Failure::Config(e.to_string()))?;
    let settings = BoundsSettings {
        spec,
        snapshot: args.snapshot.clone(),
        data,
        dim: params.n,
        gamma: params.gamma,
        horizon,
        scan,
        expect: args.expect,
    };
    let mut out = ctx.open("bounds", serde_json::to_value(&settings).unwrap(), inputs)?;

    let mut membership = Value::Null;
    let data = match (&snapshot, settings.data) {
        (Some(snap), _) => {
            let c = conserved(snap, &params)?;
            let w = WeightFunction::Quadratic;
            membership = match classify_snapshot(snap, &settings.spec, &params) {
                Ok(rep) => serde_json::to_value(rep).unwrap(),
                Err(e) => object! { "error" => e.to_string() }.into(),
            };
            GrowthData {
                e_total: c.total,
                g0: g_phi(snap, &w, &params)?,
                g0_rate: g_phi_rate(snap, &w, &params)?,
                mass: c.mass,
            }
        }
        (None, Some(d)) => d,
        (None, None) => unreachable!("data is set whenever no snapshot is given"),
    };

    let cert = contradiction_time(&settings.spec, data, horizon, &params, scan)?;
    let rows: Vec<Vec<f64>> =
        (0..cert.t_grid.len()).map(|i| vec![cert.t_grid[i], cert.lower[i], cert.upper[i]]).collect();
    out.write_csv("bounds.csv", &["t", "lower", "upper"], &rows)?;

    let found = if cert.t_star().is_some() { Expectation::Contradiction } else { Expectation::None };
    let pass = settings.expect.is_none_or(|e| e == found);
    let body = object! {
        "verdict" => cert.verdict,
        "t_star" => cert.t_star(),
        "data" => data,
        "spec" => settings.spec,
        "horizon" => horizon,
        "n" => params.n,
        "gamma" => params.gamma,
        "samples" => cert.t_grid.len(),
        "membership" => membership,
        "pass" => pass,
    };
    out.write_json("certificate.json", body)?;
    if !pass {
        return Err(Failure::Check(format!("expected {:?}, found {found:?}", settings.expect.unwrap())));
    }
    Ok(())
}
