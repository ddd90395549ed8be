//! Python bindings: gas parameters, snapshots, momentum functionals, exact
//! flows, growth certificates, the finite-volume solver and material volumes.
//!
//! Arrays cross the boundary as Python lists of floats.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use genmom::bounds::{contradiction_time, DecayClassSpec, GrowthData, ScanOptions};
use genmom::exact::{
    build_compatible_profiles, build_pointwise_profiles, check_compatibility, deformation_constant,
    integrate_deformation, reconstruct_on_grid, CompatibilityCheck, DeformationODE, DeformationSolution, GaussianShape,
    PressureShape, ProfileGrid, ProfilePair, TabulatedShape,
};
use genmom::lagrangian::{track, MaterialVolume, UniformDeformationField};
use genmom::momenta::{g_phi, g_phi_rate, lemma1_terms, virial_residual, Region, WeightFunction};
use genmom::solver::{run, ConservedState, FluxKind, SolverConfig};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: genmom::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "GasParameters", frozen)]
struct PyGas(genmom::GasParameters);

#[pymethods]
impl PyGas {
    #[new]
    fn new(n: usize, gamma: f64) -> PyResult<Self> {
        genmom::GasParameters::new(n, gamma).map(Self).map_err(err)
    }
    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma
    }
    /// Exponent m = (gamma - 1) n + 2 of the deformation ODE.
    #[getter]
    fn deformation_exponent(&self) -> f64 {
        self.0.deformation_exponent()
    }
    fn __repr__(&self) -> String {
        format!("GasParameters(n={}, gamma={})", self.0.n, self.0.gamma)
    }
}

#[pyclass(name = "FlowSnapshot", frozen)]
struct PySnapshot(genmom::FlowSnapshot);

#[pymethods]
impl PySnapshot {
    #[new]
    #[pyo3(signature = (r, rho, v, p, t=0.0))]
    fn new(r: Vec<f64>, rho: Vec<f64>, v: Vec<f64>, p: Vec<f64>, t: f64) -> PyResult<Self> {
        let grid = genmom::RadialGrid::new(r).map_err(err)?;
        genmom::FlowSnapshot::new(grid, rho, v, p, t).map(Self).map_err(err)
    }

    /// Reads a snapshot CSV and its JSON sidecar; returns `(snapshot, gas)`.
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<(Self, PyGas)> {
        let (s, g) = genmom::FlowSnapshot::read(&path).map_err(err)?;
        Ok((Self(s), PyGas(g)))
    }

    fn write(&self, path: PathBuf, gas: &PyGas) -> PyResult<()> {
        self.0.write(&path, &gas.0, None).map_err(err)
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.t()
    }
    #[getter]
    fn r(&self) -> Vec<f64> {
        self.0.r().to_vec()
    }
    #[getter]
    fn rho(&self) -> Vec<f64> {
        self.0.rho().to_vec()
    }
    #[getter]
    fn v(&self) -> Vec<f64> {
        self.0.v().to_vec()
    }
    #[getter]
    fn p(&self) -> Vec<f64> {
        self.0.p().to_vec()
    }
    fn __len__(&self) -> usize {
        self.0.r().len()
    }
    fn __repr__(&self) -> String {
        format!("FlowSnapshot(t={}, nodes={})", self.0.t(), self.0.r().len())
    }
}

fn weight(name: &str, n: usize, inner_radius: Option<f64>, q: Option<f64>) -> PyResult<WeightFunction> {
    let need = || inner_radius.ok_or_else(|| PyValueError::new_err(format!("weight `{name}` needs inner_radius")));
    match name {
        "quadratic" => Ok(WeightFunction::Quadratic),
        "power" => WeightFunction::power(n, need()?).map_err(err),
        "shifted" => {
            let q = q.ok_or_else(|| PyValueError::new_err("weight `shifted` needs q"))?;
            WeightFunction::shifted_power(q, need()?).map_err(err)
        }
        _ => Err(PyValueError::new_err(format!("unknown weight `{name}`"))),
    }
}

/// Mass, momentum, kinetic, internal and total energy.
#[pyfunction]
fn conserved(snapshot: &PySnapshot, gas: &PyGas) -> PyResult<HashMap<&'static str, f64>> {
    let c = genmom::conserved(&snapshot.0, &gas.0).map_err(err)?;
    Ok(HashMap::from([
        ("mass", c.mass),
        ("momentum", c.momentum),
        ("kinetic", c.kinetic),
        ("internal", c.internal),
        ("total", c.total),
    ]))
}

/// Weighted momentum of mass `G_phi`.
#[pyfunction]
#[pyo3(name = "g_phi", signature = (snapshot, gas, weight_name="quadratic", inner_radius=None, q=None))]
fn py_g_phi(
    snapshot: &PySnapshot,
    gas: &PyGas,
    weight_name: &str,
    inner_radius: Option<f64>,
    q: Option<f64>,
) -> PyResult<f64> {
    let w = weight(weight_name, gas.0.n, inner_radius, q)?;
    g_phi(&snapshot.0, &w, &gas.0).map_err(err)
}

/// Time derivative of `G_phi`.
#[pyfunction]
#[pyo3(name = "g_phi_rate", signature = (snapshot, gas, weight_name="quadratic", inner_radius=None, q=None))]
fn py_g_phi_rate(
    snapshot: &PySnapshot,
    gas: &PyGas,
    weight_name: &str,
    inner_radius: Option<f64>,
    q: Option<f64>,
) -> PyResult<f64> {
    let w = weight(weight_name, gas.0.n, inner_radius, q)?;
    g_phi_rate(&snapshot.0, &w, &gas.0).map_err(err)
}

/// `G'` and the curvature terms `I1..I4`; `ball` limits the region to `r <= ball`.
#[pyfunction]
#[pyo3(name = "lemma1_terms", signature = (snapshot, gas, weight_name="quadratic", inner_radius=None, q=None, ball=None))]
fn py_lemma1_terms(
    snapshot: &PySnapshot,
    gas: &PyGas,
    weight_name: &str,
    inner_radius: Option<f64>,
    q: Option<f64>,
    ball: Option<f64>,
) -> PyResult<HashMap<&'static str, f64>> {
    let w = weight(weight_name, gas.0.n, inner_radius, q)?;
    let region = ball.map_or(Region::AllSpace, |radius| Region::Ball { radius });
    let t = lemma1_terms(&snapshot.0, &w, region, &gas.0).map_err(err)?;
    Ok(HashMap::from([
        ("G_rate", t.g_rate),
        ("I1", t.i1),
        ("I2", t.i2),
        ("I3", t.i3),
        ("I4", t.i4),
        ("curvature", t.curvature()),
    ]))
}

/// Relative defect of the virial identity.
#[pyfunction]
#[pyo3(name = "virial_residual")]
fn py_virial_residual(snapshot: &PySnapshot, gas: &PyGas) -> PyResult<f64> {
    virial_residual(&snapshot.0, &gas.0).map_err(err)
}

#[pyclass(name = "ProfilePair", frozen)]
struct PyProfiles(ProfilePair);

#[pymethods]
impl PyProfiles {
    /// `kind` is `compatible` or `pointwise`; `shape` is `gaussian` or a CSV path.
    #[new]
    #[pyo3(signature = (gas, kind="compatible", shape="gaussian", scale=1.0, cells=4000, extent=12.0, mass=1.0))]
    fn new(gas: &PyGas, kind: &str, shape: &str, scale: f64, cells: usize, extent: f64, mass: f64) -> PyResult<Self> {
        let template: Arc<dyn PressureShape> = if shape == "gaussian" {
            Arc::new(GaussianShape)
        } else {
            let bytes = std::fs::read(shape).map_err(|e| PyValueError::new_err(format!("{shape}: {e}")))?;
            Arc::new(TabulatedShape::from_csv(bytes.as_slice()).map_err(err)?)
        };
        let grid = ProfileGrid::new(cells, extent).map_err(err)?;
        let pair = match kind {
            "compatible" => build_compatible_profiles(template, grid, &gas.0, mass),
            "pointwise" => build_pointwise_profiles(template, scale, grid, &gas.0, mass),
            _ => return Err(PyValueError::new_err(format!("unknown profile kind `{kind}`"))),
        }
        .map_err(err)?;
        Ok(Self(pair))
    }
    #[getter]
    fn scale(&self) -> f64 {
        self.0.scale()
    }
    #[getter]
    fn r(&self) -> Vec<f64> {
        self.0.grid().nodes().to_vec()
    }
    #[getter]
    fn rho0(&self) -> Vec<f64> {
        self.0.rho0().to_vec()
    }
    #[getter]
    fn p0(&self) -> Vec<f64> {
        self.0.p0().to_vec()
    }
    /// Initial data with velocity `a0 r`.
    #[pyo3(signature = (a0=0.0))]
    fn snapshot(&self, a0: f64) -> PyResult<PySnapshot> {
        self.0.snapshot(a0).map(PySnapshot).map_err(err)
    }
    /// Normalised defect of `mass_momentum` or `pointwise` compatibility.
    #[pyo3(signature = (gas, relation="mass_momentum"))]
    fn compatibility_residual(&self, gas: &PyGas, relation: &str) -> PyResult<f64> {
        let check = match relation {
            "mass_momentum" => CompatibilityCheck::MassMomentum,
            "pointwise" => CompatibilityCheck::Pointwise,
            _ => return Err(PyValueError::new_err(format!("unknown relation `{relation}`"))),
        };
        check_compatibility(&self.0, &gas.0, check).map_err(err)
    }
    /// Deformation ODE with the forcing constant of these profiles.
    #[pyo3(signature = (gas, a0=0.0))]
    fn deformation_ode(&self, gas: &PyGas, a0: f64) -> PyResult<PyOde> {
        Ok(PyOde(deformation_constant(&self.0, &gas.0).map_err(err)?.with_initial_rate(a0)))
    }
}

#[pyclass(name = "DeformationODE", frozen)]
struct PyOde(DeformationODE);

#[pymethods]
impl PyOde {
    /// `a' = -a^2 + K exp(-m b)`, `b' = a`, `a(0) = a0`, `b(0) = 0`.
    #[new]
    fn new(forcing: f64, exponent: f64, a0: f64) -> PyResult<Self> {
        DeformationODE::new(forcing, exponent, a0).map(Self).map_err(err)
    }
    #[getter]
    fn forcing(&self) -> f64 {
        self.0.forcing
    }
    #[getter]
    fn exponent(&self) -> f64 {
        self.0.exponent
    }
    #[getter]
    fn a0(&self) -> f64 {
        self.0.a0
    }
    #[pyo3(signature = (t_end, tol=1e-10))]
    fn integrate(&self, t_end: f64, tol: f64) -> PyResult<PySolution> {
        integrate_deformation(&self.0, t_end, tol).map(PySolution).map_err(err)
    }
    fn __repr__(&self) -> String {
        format!("DeformationODE(forcing={}, exponent={}, a0={})", self.0.forcing, self.0.exponent, self.0.a0)
    }
}

#[pyclass(name = "DeformationSolution", frozen)]
struct PySolution(DeformationSolution);

#[pymethods]
impl PySolution {
    #[getter]
    fn t(&self) -> Vec<f64> {
        self.0.t().to_vec()
    }
    #[getter]
    fn a(&self) -> Vec<f64> {
        self.0.a().to_vec()
    }
    #[getter]
    fn b(&self) -> Vec<f64> {
        self.0.b().to_vec()
    }
    /// `(a(t), b(t))` from the dense output.
    fn at(&self, t: f64) -> PyResult<(f64, f64)> {
        self.0.at(t).map_err(err)
    }
    /// The exact flow at time `t` on the profile grid stretched by `exp(b(t))`.
    fn reconstruct(&self, profiles: &PyProfiles, t: f64, gas: &PyGas) -> PyResult<PySnapshot> {
        let stretch = self.0.at(t).map_err(err)?.1.exp();
        let grid =
            genmom::RadialGrid::new(profiles.0.grid().nodes().iter().map(|r| r * stretch).collect()).map_err(err)?;
        reconstruct_on_grid(&self.0, &profiles.0, grid, t, &gas.0).map(PySnapshot).map_err(err)
    }
    /// Advects a sphere in `v = a(t) x`; returns the boundary pressure flux
    /// series for a constant pressure and the final particle positions.
    #[pyo3(signature = (center, radius, x0, t_end, dt=0.01, n_lat=16, n_lon=32, pressure=1.0))]
    #[allow(clippy::too_many_arguments, clippy::type_complexity)]
    fn track_sphere(
        &self,
        center: [f64; 3],
        radius: f64,
        x0: [f64; 3],
        t_end: f64,
        dt: f64,
        n_lat: usize,
        n_lon: usize,
        pressure: f64,
    ) -> PyResult<(Vec<f64>, Vec<f64>, Vec<[f64; 3]>)> {
        let start = MaterialVolume::sphere(center, radius, n_lat, n_lon).map_err(err)?;
        let field = UniformDeformationField { solution: &self.0 };
        let (end, rep) = track(&start, &field, &|_, _| pressure, &x0, dt, t_end).map_err(err)?;
        Ok((rep.times, rep.flux, end.points().to_vec()))
    }
    fn __len__(&self) -> usize {
        self.0.t().len()
    }
}

/// Growth certificate for a decay class given as a JSON document.
/// Returns `(t_star or None, t, lower, upper)`.
#[pyfunction]
#[pyo3(signature = (spec_json, gas, energy, g0, g0_rate, mass, horizon=1e6))]
#[allow(clippy::type_complexity)]
fn growth_certificate(
    spec_json: &str,
    gas: &PyGas,
    energy: f64,
    g0: f64,
    g0_rate: f64,
    mass: f64,
    horizon: f64,
) -> PyResult<(Option<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let spec: DecayClassSpec =
        serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(format!("decay class: {e}")))?;
    let data = GrowthData { e_total: energy, g0, g0_rate, mass };
    let cert = contradiction_time(&spec, data, horizon, &gas.0, ScanOptions::default()).map_err(err)?;
    Ok((cert.t_star(), cert.t_grid.clone(), cert.lower, cert.upper))
}

/// Finite-volume evolution. Returns the snapshots at the output times and
/// the conservation log as a list of dicts.
#[pyfunction]
#[pyo3(signature = (initial, gas, cells, t_end, r_max=None, out_every=None, cfl=0.4, flux="rusanov"))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn simulate(
    initial: &PySnapshot,
    gas: &PyGas,
    cells: usize,
    t_end: f64,
    r_max: Option<f64>,
    out_every: Option<f64>,
    cfl: f64,
    flux: &str,
) -> PyResult<(Vec<PySnapshot>, Vec<HashMap<&'static str, f64>>)> {
    let flux = match flux {
        "rusanov" => FluxKind::Rusanov,
        "hll" => FluxKind::Hll,
        _ => return Err(PyValueError::new_err(format!("unknown flux `{flux}`"))),
    };
    let r_max = r_max.unwrap_or(initial.0.grid().r_max());
    let state = ConservedState::from_snapshot(&initial.0, cells, r_max, &gas.0).map_err(err)?;
    let out = run(state, t_end, out_every, &SolverConfig { cfl, flux }, &gas.0).map_err(err)?;
    let log = out
        .log
        .iter()
        .map(|c| {
            HashMap::from([
                ("t", c.t),
                ("mass", c.mass),
                ("outflow", c.outflow),
                ("E_k", c.kinetic),
                ("E_i", c.internal),
                ("G", c.g),
            ])
        })
        .collect();
    Ok((out.snapshots.into_iter().map(PySnapshot).collect(), log))
}

#[pymodule]
fn genmom_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGas>()?;
    m.add_class::<PySnapshot>()?;
    m.add_class::<PyProfiles>()?;
    m.add_class::<PyOde>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(conserved, m)?)?;
    m.add_function(wrap_pyfunction!(py_g_phi, m)?)?;
    m.add_function(wrap_pyfunction!(py_g_phi_rate, m)?)?;
    m.add_function(wrap_pyfunction!(py_lemma1_terms, m)?)?;
    m.add_function(wrap_pyfunction!(py_virial_residual, m)?)?;
    m.add_function(wrap_pyfunction!(growth_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
