//! `volume`: material sphere advected by a velocity field.

use std::path::{Path, PathBuf};

use genmom::exact::{integrate_deformation, DeformationSolution};
use genmom::lagrangian::{theorem3_functional, track, MaterialVolume, Point, UniformDeformationField, VelocityField};
use genmom::GasParameters;
use serde::Serialize;

use super::exact::{ExactFlow, FlowSettings};
use super::{descriptor_value, input_digest, point, positive, require, Context};
use crate::args::{FlowArgs, VolumeArgs};
use crate::failure::Failure;
use crate::object;

#[derive(Debug, Clone, Serialize)]
enum FieldSource {
    Exact,
    File(PathBuf),
    Still,
    Expand { rate: f64 },
    Rotate { omega: f64 },
}

#[derive(Debug, Clone, Copy, Serialize)]
enum Scalar {
    Exact,
    Const(f64),
}

#[derive(Debug, Clone, Serialize)]
struct VolumeSettings {
    center: [f64; 3],
    radius: f64,
    n_lat: usize,
    n_lon: usize,
    field: FieldSource,
    pressure: Scalar,
    density: Scalar,
    x0: [f64; 3],
    q: f64,
    t_end: f64,
    dt: f64,
    /// Only used by the `exact` field and scalars.
    flow: FlowSettings,
}

fn parse_field(text: &str) -> Result<FieldSource, Failure> {
    match text {
        "exact" => return Ok(FieldSource::Exact),
        "still" => return Ok(FieldSource::Still),
        _ => {}
    }
    if let Some(p) = text.strip_prefix("file:") {
        return Ok(FieldSource::File(PathBuf::from(p)));
    }
    if let Some(a) = descriptor_value(text, "expand:") {
        return Ok(FieldSource::Expand { rate: a? });
    }
    if let Some(w) = descriptor_value(text, "rotate:") {
        return Ok(FieldSource::Rotate { omega: w? });
    }
    Err(Failure::Config(format!(
        "unknown field `{text}` (expected exact, file:<csv>, still, expand:<a> or rotate:<omega>)"
    )))
}

fn parse_scalar(text: &str, what: &str) -> Result<Scalar, Failure> {
    if text == "exact" {
        return Ok(Scalar::Exact);
    }
    match descriptor_value(text, "const:") {
        Some(c) => Ok(Scalar::Const(c?)),
        None => Err(Failure::Config(format!("unknown {what} `{text}` (expected exact or const:<value>)"))),
    }
}

/// `a(t)` read from a `t,a,b` table, linear between rows.
struct TabulatedRate {
    t: Vec<f64>,
    a: Vec<f64>,
}

impl TabulatedRate {
    fn read(path: &Path) -> Result<Self, Failure> {
        let bad = |e: String| Failure::Config(format!("{}: {e}", path.display()));
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| bad(e.to_string()))?;
        let (mut t, mut a) = (vec![], vec![]);
        for (i, rec) in rdr.deserialize::<(f64, f64, f64)>().enumerate() {
            let (ti, ai, _) = rec.map_err(|e| bad(format!("row {}: {e}", i + 1)))?;
            if t.last().is_some_and(|&prev| ti <= prev) {
                return Err(bad(format!("row {}: times must increase", i + 1)));
            }
            t.push(ti);
            a.push(ai);
        }
        if t.len() < 2 {
            return Err(bad("need at least two rows".into()));
        }
        Ok(Self { t, a })
    }

    fn at(&self, s: f64) -> Option<f64> {
        genmom::grid::interpolate(&self.t, &self.a, s)
    }
}

impl VelocityField for TabulatedRate {
    fn velocity(&self, t: f64, x: &Point) -> Option<Point> {
        let a = self.at(t)?;
        Some([a * x[0], a * x[1], a * x[2]])
    }
}

pub fn run(args: VolumeArgs, flow: FlowArgs, ctx: &Context) -> Result<(), Failure> {
    let field = parse_field(args.field.as_deref().unwrap_or("exact"))?;
    let default_scalar = match field {
        FieldSource::Exact => "exact",
        _ => "const:1",
    };
    let settings = VolumeSettings {
        center: point(args.center.as_deref().unwrap_or(&[0.0, 0.0, 0.0]), "center")?,
        radius: positive(args.radius.unwrap_or(1.0), "radius")?,
        n_lat: args.n_lat.unwrap_or(16),
        n_lon: args.n_lon.unwrap_or(32),
        pressure: parse_scalar(args.pressure.as_deref().unwrap_or(default_scalar), "pressure")?,
        density: parse_scalar(args.density.as_deref().unwrap_or(default_scalar), "density")?,
        field,
        x0: point(&require(args.x0, "x0")?, "x0")?,
        q: args.q.unwrap_or(-8.0),
        t_end: positive(args.t_end.unwrap_or(1.0), "t_end")?,
        dt: positive(args.dt.unwrap_or(1e-2), "dt")?,
        flow: FlowSettings::resolve(flow)?,
    };
    if settings.flow.dim != 3 {
        return Err(Failure::Config(format!(
            "material volumes are three-dimensional, got dim = {}",
            settings.flow.dim
        )));
    }
    let exact_needed = matches!(settings.field, FieldSource::Exact)
        || matches!(settings.pressure, Scalar::Exact)
        || matches!(settings.density, Scalar::Exact);
    let mut inputs = if exact_needed { settings.flow.inputs()? } else { vec![] };
    let table = match &settings.field {
        FieldSource::File(p) => {
            inputs.push((p.display().to_string(), input_digest(p)?));
            Some(TabulatedRate::read(p)?)
        }
        _ => None,
    };
    let mut out = ctx.open("volume", serde_json::to_value(&settings).unwrap(), inputs)?;

    let exact: Option<(ExactFlow, DeformationSolution)> = if exact_needed {
        let flow = settings.flow.build()?;
        let sol = integrate_deformation(&flow.ode, settings.t_end, settings.flow.tol)?;
        Some((flow, sol))
    } else {
        None
    };
    let params = match &exact {
        Some((f, _)) => f.params,
        None => GasParameters::new(3, settings.flow.gamma)?,
    };
    let rotation = |w: f64| move |_: f64, x: &Point| Some([-w * x[1], w * x[0], 0.0]);
    let expansion = |a: f64| move |_: f64, x: &Point| Some([a * x[0], a * x[1], a * x[2]]);
    let deformation;
    let expand_field;
    let rotate_field;
    let still_field = |_: f64, _: &Point| Some([0.0; 3]);
    let field: &dyn VelocityField = match (&settings.field, &exact, &table) {
        (FieldSource::Exact, Some((_, sol)), _) => {
            deformation = UniformDeformationField { solution: sol };
            &deformation
        }
        (FieldSource::File(_), _, Some(t)) => t,
        (FieldSource::Still, _, _) => &still_field,
        (FieldSource::Expand { rate }, _, _) => {
            expand_field = expansion(*rate);
            &expand_field
        }
        (FieldSource::Rotate { omega }, _, _) => {
            rotate_field = rotation(*omega);
            &rotate_field
        }
        _ => unreachable!("field inputs are prepared above"),
    };

    let n = params.n as f64;
    let gamma = params.gamma;
    let pressure = |t: f64, x: &Point| -> f64 {
        match (settings.pressure, &exact) {
            (Scalar::Const(c), _) => c,
            (Scalar::Exact, Some((f, sol))) => {
                let b = sol.at(t).map(|(_, b)| b).unwrap_or(f64::NAN);
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                (-n * gamma * b).exp() * f.pair.p0_at(r * (-b).exp())
            }
            (Scalar::Exact, None) => unreachable!(),
        }
    };
    let density = |x: &Point| -> f64 {
        match (settings.density, &exact) {
            (Scalar::Const(c), _) => c,
            (Scalar::Exact, Some((f, _))) => f.pair.rho0_at((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()),
            (Scalar::Exact, None) => unreachable!(),
        }
    };
    let velocity0 = |x: &Point| field.velocity(0.0, x).unwrap_or([f64::NAN; 3]);

    let start = MaterialVolume::sphere(settings.center, settings.radius, settings.n_lat, settings.n_lon)?;
    let functional = theorem3_functional(&start, &density, &velocity0, &settings.x0, settings.q, &params)?;
    let (end, report) = track(&start, field, &pressure, &settings.x0, settings.dt, settings.t_end)?;

    let rows: Vec<Vec<f64>> = (0..report.times.len())
        .map(|i| vec![report.times[i], report.flux[i], report.min_distance[i], functional])
        .collect();
    out.write_csv("volume.csv", &["t", "flux", "min_distance", "functional"], &rows)?;
    let points: Vec<Vec<f64>> = end.points().iter().map(|p| p.to_vec()).collect();
    out.write_csv("surface.csv", &["x", "y", "z"], &points)?;
    let body = object! {
        "m_observed" => report.m_observed,
        "functional" => functional,
        "t_end" => end.t,
        "steps" => report.times.len() - 1,
        "initial_volume" => start.enclosed_volume(),
        "final_volume" => end.enclosed_volume(),
        "final_min_distance" => report.min_distance.last().copied(),
        "particles" => end.points().len(),
    };
    out.write_json("volume.json", body)?;
    Ok(())
}
