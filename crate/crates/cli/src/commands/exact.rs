//! `exact`: deformation trajectory and reconstructed snapshots.

use std::path::PathBuf;
use std::sync::Arc;

use genmom::exact::{
    build_compatible_profiles, build_pointwise_profiles, check_compatibility, deformation_constant,
    excluding_pressure_constant, integrate_deformation, reconstruct_on_grid, CompatibilityCheck, DeformationODE,
    DeformationSolution, GaussianShape, PressureShape, ProfileGrid, ProfilePair, TabulatedShape,
};
use genmom::momenta::{g_phi, virial_residual, WeightFunction};
use genmom::{GasParameters, RadialGrid};
use serde::Serialize;

use super::{input_digest, positive, Context};
use crate::args::{ExactArgs, FlowArgs, ProfileChoice, Variant};
use crate::failure::Failure;
use crate::object;

#[derive(Debug, Clone, Serialize)]
pub enum ShapeSource {
    Gaussian,
    File(PathBuf),
}

/// Fully resolved exact-flow settings.
#[derive(Debug, Clone, Serialize)]
pub struct FlowSettings {
    pub shape: ShapeSource,
    pub gamma: f64,
    pub dim: usize,
    pub profile: ProfileChoice,
    pub scale: f64,
    pub mass: f64,
    pub a0: f64,
    pub profile_cells: usize,
    pub extent: f64,
    pub variant: Variant,
    /// Relative to the profile scale when not given.
    pub weight_radius: Option<f64>,
    pub tol: f64,
}

/// Profiles, gas and forcing for one exact flow.
pub struct ExactFlow {
    pub params: GasParameters,
    pub pair: ProfilePair,
    pub ode: DeformationODE,
    pub weight_radius: f64,
}

impl FlowSettings {
    pub fn resolve(a: FlowArgs) -> Result<Self, Failure> {
        let shape = match a.shape.as_deref().unwrap_or("gaussian") {
            "gaussian" => ShapeSource::Gaussian,
            s => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => ShapeSource::File(PathBuf::from(p)),
                _ => return Err(Failure::Config(format!("unknown shape `{s}` (expected gaussian or file:<csv>)"))),
            },
        };
        let s = Self {
            shape,
            gamma: a.gamma.unwrap_or(5.0 / 3.0),
            dim: a.dim.unwrap_or(3),
            profile: a.profile.unwrap_or(ProfileChoice::Compatible),
            scale: positive(a.scale.unwrap_or(1.0), "scale")?,
            mass: positive(a.mass.unwrap_or(1.0), "mass")?,
            a0: a.a0.unwrap_or(0.0),
            profile_cells: a.profile_cells.unwrap_or(4_000),
            extent: positive(a.extent.unwrap_or(12.0), "extent")?,
            variant: a.variant.unwrap_or(Variant::MassMomentum),
            weight_radius: a.weight_radius.map(|r| positive(r, "weight_radius")).transpose()?,
            tol: positive(a.tol.unwrap_or(1e-10), "tol")?,
        };
        if !s.a0.is_finite() {
            return Err(Failure::Config(format!("`a0` must be finite, got {}", s.a0)));
        }
        GasParameters::new(s.dim, s.gamma).map_err(|e| Failure::Config(e.to_string()))?;
        Ok(s)
    }

    pub fn inputs(&self) -> Result<Vec<(String, String)>, Failure> {
        match &self.shape {
            ShapeSource::Gaussian => Ok(vec![]),
            ShapeSource::File(p) => Ok(vec![(p.display().to_string(), input_digest(p)?)]),
        }
    }

    pub fn build(&self) -> Result<ExactFlow, Failure> {
        let params = GasParameters::new(self.dim, self.gamma)?;
        let shape: Arc<dyn PressureShape> = match &self.shape {
            ShapeSource::Gaussian => Arc::new(GaussianShape),
            ShapeSource::File(p) => {
                let bytes =
                    std::fs::read(p).map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))?;
                Arc::new(TabulatedShape::from_csv(bytes.as_slice())?)
            }
        };
        let grid = ProfileGrid::new(self.profile_cells, self.extent)?;
        let pair = match self.profile {
            ProfileChoice::Compatible => build_compatible_profiles(shape, grid, &params, self.mass)?,
            ProfileChoice::Pointwise => build_pointwise_profiles(shape, self.scale, grid, &params, self.mass)?,
        };
        let weight_radius = self.weight_radius.unwrap_or(0.05 * pair.scale());
        let ode = match self.variant {
            Variant::MassMomentum => deformation_constant(&pair, &params)?,
            Variant::ExcludingPressure => {
                let w = WeightFunction::power(params.n, weight_radius)?;
                let g0 = g_phi(&pair.snapshot(self.a0)?, &w, &params)?;
                excluding_pressure_constant(pair.p0()[0], g0, &params)?
            }
        }
        .with_initial_rate(self.a0);
        Ok(ExactFlow { params, pair, ode, weight_radius })
    }
}

#[derive(Debug, Clone, Serialize)]
struct ExactSettings {
    flow: FlowSettings,
    t_end: f64,
    times: Vec<f64>,
    samples: Option<usize>,
}

pub fn run(args: ExactArgs, flow: FlowArgs, ctx: &Context) -> Result<(), Failure> {
    let flow = FlowSettings::resolve(flow)?;
    let t_end = positive(args.t_end.unwrap_or(10.0), "t_end")?;
    let times = args.times.unwrap_or_default();
    if let Some(&t) = times.iter().find(|&&t| !(0.0..=t_end).contains(&t)) {
        return Err(Failure::Config(format!("snapshot time {t} lies outside [0, {t_end}]")));
    }
    if args.samples.is_some_and(|k| k < 2) {
        return Err(Failure::Config("`samples` must be at least 2".into()));
    }
    let settings = ExactSettings { flow, t_end, times, samples: args.samples };
    let mut out = ctx.open("exact", serde_json::to_value(&settings).unwrap(), settings.flow.inputs()?)?;

    let ExactFlow { params, pair, ode, weight_radius } = settings.flow.build()?;
    let sol = integrate_deformation(&ode, t_end, settings.flow.tol)?;

    out.write_csv("deformation.csv", &["t", "a", "b"], &trajectory_rows(&sol, settings.samples)?)?;

    let mut snapshots = Vec::new();
    for (k, &t) in settings.times.iter().enumerate() {
        let name = format!("snapshot_{k:03}.csv");
        // the profile grid carried along by the flow keeps the support covered
        let stretch = sol.at(t)?.1.exp();
        let grid = RadialGrid::new(pair.grid().nodes().iter().map(|r| r * stretch).collect())?;
        out.write_snapshot(&name, &reconstruct_on_grid(&sol, &pair, grid, t, &params)?, &params)?;
        snapshots.push(object! { "file" => name, "t" => t });
    }

    let mut residuals = object! {
        "mass_momentum" => check_compatibility(&pair, &params, CompatibilityCheck::MassMomentum)?,
        "pointwise" => check_compatibility(&pair, &params, CompatibilityCheck::Pointwise)?,
        "virial" => virial_residual(&pair.snapshot(settings.flow.a0)?, &params)?,
    };
    if params.n >= 3 {
        let r =
            check_compatibility(&pair, &params, CompatibilityCheck::ExcludingPressure { inner_radius: weight_radius })?;
        residuals.insert("excluding_pressure".into(), r.into());
    }
    let (a_end, b_end) = sol.at(t_end)?;
    let body = object! {
        "K" => ode.forcing,
        "m_exp" => ode.exponent,
        "a0" => ode.a0,
        "scale" => pair.scale(),
        "density_factor" => pair.density_factor(),
        "steps" => sol.t().len() - 1,
        "t_end" => t_end,
        "a_end" => a_end,
        "b_end" => b_end,
        "residuals" => residuals,
        "snapshots" => snapshots,
        "variant" => settings.flow.variant,
        "profile" => settings.flow.profile,
    };
    out.write_json("exact.json", body)?;
    Ok(())
}

fn trajectory_rows(sol: &DeformationSolution, samples: Option<usize>) -> Result<Vec<Vec<f64>>, Failure> {
    match samples {
        None => Ok(sol.t().iter().zip(sol.a()).zip(sol.b()).map(|((&t, &a), &b)| vec![t, a, b]).collect()),
        Some(k) => {
            let (t0, t1) = sol.horizon();
            (0..k)
                .map(|i| {
                    let t = if i + 1 == k { t1 } else { t0 + (t1 - t0) * i as f64 / (k - 1) as f64 };
                    let (a, b) = sol.at(t)?;
                    Ok(vec![t, a, b])
                })
                .collect()
        }
    }
}
