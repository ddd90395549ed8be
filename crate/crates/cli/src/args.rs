//! Command-line flags and the matching configuration-file sections.
//!
//! Every subcommand option is optional on both sides; a flag given on the
//! command line wins over the same key in the configuration file, and the
//! built-in default applies when neither is set.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "genmom", version, about = "Generalized momenta, exact flows and growth bounds for compressible gas")]
pub struct Cli {
    /// TOML scenario file; command-line flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for all artifacts (created if missing).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Seed for the randomized verification suite.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the parallel kernels.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the deformation ODE and reconstruct the exact flow.
    Exact {
        #[command(flatten)]
        args: ExactArgs,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Weighted momentum of mass and its curvature terms for a snapshot.
    Momenta(MomentaArgs),
    /// Growth certificate for a decay class.
    Bounds(BoundsArgs),
    /// Track a material sphere and its boundary pressure flux.
    Volume {
        #[command(flatten)]
        args: VolumeArgs,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Evolve a snapshot with the finite-volume solver.
    Simulate(SimulateArgs),
    /// Run a built-in verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileChoice {
    /// Density proportional to the pressure slope (integral balance).
    Compatible,
    /// Density proportional to the pressure slope over r (pointwise balance).
    Pointwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Forcing constant from the internal energy and G at t = 0.
    MassMomentum,
    /// Forcing constant from the origin pressure and the power-weight momentum.
    ExcludingPressure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxChoice {
    Rusanov,
    Hll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Contradiction,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Virial,
    Rate,
    Curvature,
    Riccati,
    Decay,
    Compatibility,
    Reconstruction,
    Solver,
    Certificate,
    Lagrangian,
    Coincidence,
    Properties,
    All,
}

/// The exact-flow configuration shared by `exact` and `volume`.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowArgs {
    /// Pressure template: `gaussian` or `file:<csv>` (columns u,p).
    #[arg(long)]
    pub shape: Option<String>,
    /// Adiabatic exponent.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Space dimension n.
    #[arg(long)]
    pub dim: Option<usize>,
    /// How density is derived from the pressure template.
    #[arg(long, value_enum)]
    pub profile: Option<ProfileChoice>,
    /// Length scale of the `pointwise` profile.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Total mass.
    #[arg(long)]
    pub mass: Option<f64>,
    /// Initial deformation rate a(0).
    #[arg(long)]
    pub a0: Option<f64>,
    /// Cells of the profile grid.
    #[arg(long)]
    pub profile_cells: Option<usize>,
    /// Profile grid extent in units of the scale.
    #[arg(long)]
    pub extent: Option<f64>,
    /// Construction of the forcing constant.
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    /// Inner cut radius of the power weight (`excluding-pressure`).
    #[arg(long = "weight-radius")]
    pub weight_radius: Option<f64>,
    /// Local error tolerance of the ODE integrator.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactArgs {
    /// Final time of the deformation trajectory.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Times at which to write reconstructed snapshots.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Uniform samples of (a, b) instead of the accepted steps.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentaArgs {
    /// Snapshot CSV (with its JSON sidecar next to it).
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// `quadratic`, `power` or `shifted:q=<q>`.
    #[arg(long)]
    pub weight: Option<String>,
    /// Radius cut out around the origin for singular weights.
    #[arg(long)]
    pub inner_radius: Option<f64>,
    /// `all` or `ball:<R>`.
    #[arg(long)]
    pub region: Option<String>,
    /// Fail (exit 3) when the virial residual exceeds this value.
    #[arg(long)]
    pub max_residual: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsArgs {
    /// TOML file holding the decay class (class, alpha, envelopes, r0, t0, epsilon).
    #[arg(long = "spec")]
    pub spec_file: Option<PathBuf>,
    /// Decay class written inline in the configuration file.
    #[arg(skip)]
    #[serde(rename = "spec")]
    pub class: Option<genmom::bounds::DecayClassSpec>,
    /// Snapshot supplying E, G(0), G'(0) and the mass.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Total energy.
    #[arg(long)]
    pub energy: Option<f64>,
    #[arg(long)]
    pub g0: Option<f64>,
    #[arg(long)]
    pub g0_rate: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    /// Space dimension when no snapshot is given.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Adiabatic exponent when no snapshot is given.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Last time examined.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub points_per_decade: Option<usize>,
    #[arg(long)]
    pub first_time: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Fail (exit 3) unless the verdict matches.
    #[arg(long, value_enum)]
    pub expect: Option<Expectation>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeArgs {
    /// Sphere center `x,y,z`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub center: Option<Vec<f64>>,
    #[arg(long)]
    pub radius: Option<f64>,
    /// Latitude rings of the surface mesh.
    #[arg(long)]
    pub n_lat: Option<usize>,
    /// Longitude samples of the surface mesh.
    #[arg(long)]
    pub n_lon: Option<usize>,
    /// `exact`, `file:<deformation.csv>`, `still`, `expand:<a>` or `rotate:<omega>`.
    #[arg(long)]
    pub field: Option<String>,
    /// `exact` or `const:<p>`.
    #[arg(long)]
    pub pressure: Option<String>,
    /// `exact` or `const:<rho>`.
    #[arg(long)]
    pub density: Option<String>,
    /// Reference point `x,y,z` outside the volume.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0: Option<Vec<f64>>,
    /// Exponent of the volume functional.
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Advection step.
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    /// Initial snapshot CSV (with its JSON sidecar).
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub cells: Option<usize>,
    /// Outer radius of the finite-volume domain (defaults to the snapshot's).
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long, value_enum)]
    pub flux: Option<FluxChoice>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Interval between written snapshots.
    #[arg(long)]
    pub out_every: Option<f64>,
    /// Fail (exit 3) when mass plus outflow drifts by more than this (relative).
    #[arg(long)]
    pub max_mass_drift: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Random cases drawn by the `properties` suite.
    #[arg(long)]
    pub cases: Option<usize>,
}

/// Field-wise `a.or(b)`.
macro_rules! overlay {
    ($t:ident { $($f:ident),* $(,)? }) => {
        impl $t {
            pub fn overlay(self, base: Self) -> Self {
                Self { $($f: self.$f.or(base.$f)),* }
            }
        }
    };
}

overlay!(FlowArgs { shape, gamma, dim, profile, scale, mass, a0, profile_cells, extent, variant, weight_radius, tol });
overlay!(ExactArgs { t_end, times, samples });
overlay!(MomentaArgs { snapshot, weight, inner_radius, region, max_residual });
overlay!(BoundsArgs {
    spec_file,
    class,
    snapshot,
    energy,
    g0,
    g0_rate,
    mass,
    dim,
    gamma,
    horizon,
    points_per_decade,
    first_time,
    rel_tol,
    expect
});
overlay!(VolumeArgs { center, radius, n_lat, n_lon, field, pressure, density, x0, q, t_end, dt });
overlay!(SimulateArgs { snapshot, cells, r_max, cfl, flux, t_end, out_every, max_mass_drift });
overlay!(VerifyArgs { suite, cases });

/// Rewrites a `file:<path>` descriptor relative to `dir`.
pub fn rebase_descriptor(value: &mut Option<String>, dir: &Path) {
    if let Some(v) = value {
        if let Some(rest) = v.strip_prefix("file:") {
            *v = format!("file:{}", rebase(Path::new(rest), dir).display());
        }
    }
}

pub fn rebase(path: &Path, dir: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        dir.join(path)
    }
}
