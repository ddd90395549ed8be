//! `momenta`: G_phi, its rate and the curvature terms of one snapshot.

use std::path::PathBuf;

use genmom::momenta::{g_phi, lemma1_terms, virial_residual, Region, WeightFunction};
use serde::Serialize;

use super::{descriptor_value, positive, read_snapshot, require, snapshot_inputs, Context};
use crate::args::MomentaArgs;
use crate::failure::Failure;
use crate::object;

#[derive(Debug, Clone, Copy, Serialize)]
enum WeightChoice {
    Quadratic,
    Power,
    Shifted { q: f64 },
}

#[derive(Debug, Clone, Serialize)]
struct MomentaSettings {
    snapshot: PathBuf,
    weight: WeightChoice,
    inner_radius: Option<f64>,
    region: Region,
    max_residual: Option<f64>,
}

fn parse_weight(text: &str) -> Result<WeightChoice, Failure> {
    match text {
        "quadratic" => Ok(WeightChoice::Quadratic),
        "power" => Ok(WeightChoice::Power),
        _ => match descriptor_value(text, "shifted:q=") {
            Some(q) => Ok(WeightChoice::Shifted { q: q? }),
            None => {
                Err(Failure::Config(format!("unknown weight `{text}` (expected quadratic, power or shifted:q=<q>)")))
            }
        },
    }
}

fn parse_region(text: &str) -> Result<Region, Failure> {
    if text == "all" {
        return Ok(Region::AllSpace);
    }
    match descriptor_value(text, "ball:") {
        Some(r) => Ok(Region::Ball { radius: positive(r?, "ball radius")? }),
        None => Err(Failure::Config(format!("unknown region `{text}` (expected all or ball:<R>)"))),
    }
}

pub fn run(args: MomentaArgs, ctx: &Context) -> Result<(), Failure> {
    let settings = MomentaSettings {
        snapshot: require(args.snapshot, "snapshot")?,
        weight: parse_weight(args.weight.as_deref().unwrap_or("quadratic"))?,
        inner_radius: args.inner_radius.map(|r| positive(r, "inner_radius")).transpose()?,
        region: parse_region(args.region.as_deref().unwrap_or("all"))?,
        max_residual: args.max_residual,
    };
    let inputs = snapshot_inputs(&settings.snapshot)?;
    let (snap, params) = read_snapshot(&settings.snapshot)?;
    let needs_radius = || require(settings.inner_radius, "inner_radius");
    let weight = match settings.weight {
        WeightChoice::Quadratic => WeightFunction::Quadratic,
        WeightChoice::Power => WeightFunction::power(params.n, needs_radius()?)?,
        WeightChoice::Shifted { q } => WeightFunction::shifted_power(q, needs_radius()?)?,
    };
    let mut out = ctx.open("momenta", serde_json::to_value(&settings).unwrap(), inputs)?;

    let g = g_phi(&snap, &weight, &params)?;
    let terms = lemma1_terms(&snap, &weight, settings.region, &params)?;
    let residual = virial_residual(&snap, &params)?;
    let pass = settings.max_residual.is_none_or(|tol| residual <= tol);
    let body = object! {
        "t" => snap.t(),
        "n" => params.n,
        "gamma" => params.gamma,
        "weight" => weight,
        "region" => settings.region,
        "G" => g,
        "G_rate" => terms.g_rate,
        "I1" => terms.i1,
        "I2" => terms.i2,
        "I3" => terms.i3,
        "I4" => terms.i4,
        "curvature" => terms.curvature(),
        "residual" => residual,
        "pass" => pass,
    };
    out.write_json("momenta.json", body)?;
    if !pass {
        return Err(Failure::Check(format!(
            "virial residual {residual:e} exceeds {:e}",
            settings.max_residual.unwrap()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_descriptors() {
        assert!(matches!(parse_weight("quadratic").unwrap(), WeightChoice::Quadratic));
        assert!(matches!(parse_weight("shifted:q=-2.5").unwrap(), WeightChoice::Shifted { q } if q == -2.5));
        assert!(parse_weight("shifted:q=x").is_err());
        assert!(parse_weight("cubic").is_err());
    }

    #[test]
    fn region_descriptors() {
        assert_eq!(parse_region("all").unwrap(), Region::AllSpace);
        assert_eq!(parse_region("ball:2").unwrap(), Region::Ball { radius: 2.0 });
        assert!(parse_region("ball:-1").is_err());
    }
}
