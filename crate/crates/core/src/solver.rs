//! First-order finite-volume solver for radially symmetric compressible
//! Euler flow, plus a residual check of given fields against the
//! continuity and pressure-transport equations.
//!
//! Cells are `[i h, (i + 1) h]` on `[0, R]` with face areas `r^(n-1)` and
//! volumes `(r_+^n - r_-^n) / n`; the factor `omega_{n-1}` is applied only
//! when reporting integrals. The momentum equation carries the geometric
//! source `p (A_+ - A_-) / V`, which balances the pressure flux of a state
//! at rest exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::GasParameters;
use crate::grid::{pairwise_sum, unit_sphere_area, RadialGrid};
use crate::snapshot::FlowSnapshot;

/// Faces per rayon task; small grids stay on one thread.
const PAR_CHUNK: usize = 4096;
const MAX_STEPS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxKind {
    Rusanov,
    Hll,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub cfl: f64,
    pub flux: FluxKind,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { cfl: 0.4, flux: FluxKind::Rusanov }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::InvalidParameter(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        Ok(())
    }
}

/// Cell averages of `(rho, rho v, E)` with `E = rho v^2 / 2 + p / (gamma - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedState {
    r_max: f64,
    centers: RadialGrid,
    area: Vec<f64>,
    volume: Vec<f64>,
    pub rho: Vec<f64>,
    pub mom: Vec<f64>,
    pub energy: Vec<f64>,
    pub t: f64,
    /// Mass that has left through the outer face since the start.
    pub outflow: f64,
}

impl ConservedState {
    /// Point values at the cell centres of `cells` uniform cells on `[0, r_max]`.
    pub fn from_fn(
        cells: usize,
        r_max: f64,
        t: f64,
        params: &GasParameters,
        rho: impl Fn(f64) -> f64,
        v: impl Fn(f64) -> f64,
        p: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        params.validate()?;
        if cells < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 cells, got {cells}")));
        }
        let centers = RadialGrid::cell_centers(r_max, cells)?;
        let h = r_max / cells as f64;
        let n = params.n as i32;
        let area: Vec<f64> = (0..=cells).map(|i| (i as f64 * h).powi(n - 1)).collect();
        let volume: Vec<f64> =
            (0..cells).map(|i| (((i + 1) as f64 * h).powi(n) - (i as f64 * h).powi(n)) / n as f64).collect();
        let g1 = params.gamma - 1.0;
        let mut st = Self {
            r_max,
            area,
            volume,
            rho: Vec::with_capacity(cells),
            mom: Vec::with_capacity(cells),
            energy: Vec::with_capacity(cells),
            t,
            outflow: 0.0,
            centers,
        };
        for &r in st.centers.nodes() {
            let (d, u, q) = (rho(r), v(r), p(r));
            st.rho.push(d);
            st.mom.push(d * u);
            st.energy.push(0.5 * d * u * u + q / g1);
        }
        st.check_positivity()?;
        Ok(st)
    }

    /// Samples a snapshot (linear interpolation) at the cell centres.
    pub fn from_snapshot(snapshot: &FlowSnapshot, cells: usize, r_max: f64, params: &GasParameters) -> Result<Self> {
        let g = snapshot.grid();
        if r_max > g.r_max() + 1e-12 * r_max {
            return Err(Error::InsufficientDomain(format!(
                "snapshot ends at {} but the solver domain extends to {r_max}",
                g.r_max()
            )));
        }
        let at = |f: &[f64], r: f64| g.interpolate(f, r).unwrap_or(f[0]);
        Self::from_fn(
            cells,
            r_max,
            snapshot.t(),
            params,
            |r| at(snapshot.rho(), r),
            |r| at(snapshot.v(), r),
            |r| at(snapshot.p(), r),
        )
    }

    pub fn cells(&self) -> usize {
        self.rho.len()
    }

    pub fn centers(&self) -> &RadialGrid {
        &self.centers
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / self.cells() as f64
    }

    /// Cell volumes without the sphere-area factor.
    pub fn volumes(&self) -> &[f64] {
        &self.volume
    }

    pub fn velocity(&self) -> Vec<f64> {
        self.rho.iter().zip(&self.mom).map(|(d, m)| m / d).collect()
    }

    pub fn pressure(&self, params: &GasParameters) -> Vec<f64> {
        (0..self.cells())
            .map(|i| (params.gamma - 1.0) * (self.energy[i] - 0.5 * self.mom[i] * self.mom[i] / self.rho[i]))
            .collect()
    }

    pub fn to_snapshot(&self, params: &GasParameters) -> Result<FlowSnapshot> {
        FlowSnapshot::new(self.centers.clone(), self.rho.clone(), self.velocity(), self.pressure(params), self.t)
    }

    /// `omega sum rho_i V_i`.
    pub fn mass(&self, params: &GasParameters) -> f64 {
        let terms: Vec<f64> = self.rho.iter().zip(&self.volume).map(|(d, v)| d * v).collect();
        unit_sphere_area(params.n) * pairwise_sum(&terms)
    }

    pub fn totals(&self, params: &GasParameters) -> ConservationRecord {
        let omega = unit_sphere_area(params.n);
        let p = self.pressure(params);
        let r = self.centers.nodes();
        let sum = |f: &dyn Fn(usize) -> f64| {
            let terms: Vec<f64> = (0..self.cells()).map(|i| f(i) * self.volume[i]).collect();
            omega * pairwise_sum(&terms)
        };
        ConservationRecord {
            t: self.t,
            mass: self.mass(params),
            outflow: self.outflow,
            kinetic: sum(&|i| 0.5 * self.mom[i] * self.mom[i] / self.rho[i]),
            internal: sum(&|i| p[i] / (params.gamma - 1.0)),
            g: sum(&|i| 0.5 * self.rho[i] * r[i] * r[i]),
        }
    }

    fn check_positivity(&self) -> Result<()> {
        for i in 0..self.cells() {
            let internal = self.energy[i] - 0.5 * self.mom[i] * self.mom[i] / self.rho[i];
            if !(self.rho[i] > 0.0) || !(internal > 0.0) || !self.mom[i].is_finite() || !self.energy[i].is_finite() {
                return Err(Error::Positivity { cell: i, t: self.t });
            }
        }
        Ok(())
    }

    /// Largest `|v| + c` over the cells.
    pub fn max_signal_speed(&self, params: &GasParameters) -> f64 {
        let p = self.pressure(params);
        (0..self.cells())
            .map(|i| (self.mom[i] / self.rho[i]).abs() + (params.gamma * p[i] / self.rho[i]).sqrt())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
struct Prim {
    rho: f64,
    v: f64,
    p: f64,
}

impl Prim {
    fn conserved(&self, g1: f64) -> [f64; 3] {
        [self.rho, self.rho * self.v, 0.5 * self.rho * self.v * self.v + self.p / g1]
    }
    fn flux(&self, g1: f64) -> [f64; 3] {
        let e = 0.5 * self.rho * self.v * self.v + self.p / g1;
        [self.rho * self.v, self.rho * self.v * self.v + self.p, (e + self.p) * self.v]
    }
    fn sound(&self, gamma: f64) -> f64 {
        (gamma * self.p / self.rho).sqrt()
    }
}

fn numerical_flux(l: Prim, r: Prim, kind: FluxKind, gamma: f64) -> [f64; 3] {
    let g1 = gamma - 1.0;
    let (fl, fr) = (l.flux(g1), r.flux(g1));
    let (ul, ur) = (l.conserved(g1), r.conserved(g1));
    let (cl, cr) = (l.sound(gamma), r.sound(gamma));
    match kind {
        FluxKind::Rusanov => {
            let s = (l.v.abs() + cl).max(r.v.abs() + cr);
            std::array::from_fn(|k| 0.5 * (fl[k] + fr[k]) - 0.5 * s * (ur[k] - ul[k]))
        }
        FluxKind::Hll => {
            let sl = (l.v - cl).min(r.v - cr);
            let sr = (l.v + cl).max(r.v + cr);
            if sl >= 0.0 {
                fl
            } else if sr <= 0.0 {
                fr
            } else {
                std::array::from_fn(|k| (sr * fl[k] - sl * fr[k] + sl * sr * (ur[k] - ul[k])) / (sr - sl))
            }
        }
    }
}

/// One explicit step with the CFL time step.
pub fn step(state: &ConservedState, config: &SolverConfig, params: &GasParameters) -> Result<ConservedState> {
    step_limited(state, config, params, f64::INFINITY)
}

/// One explicit step of size `min(CFL step, dt_max)`.
pub fn step_limited(
    state: &ConservedState,
    config: &SolverConfig,
    params: &GasParameters,
    dt_max: f64,
) -> Result<ConservedState> {
    config.validate()?;
    params.validate()?;
    let gamma = params.gamma;
    let cells = state.cells();
    let h = state.spacing();
    let speed = state.max_signal_speed(params);
    let dt = if speed > 0.0 { (config.cfl * h / speed).min(dt_max) } else { dt_max };
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("no admissible time step (signal speed {speed}, limit {dt_max})")));
    }

    let pressure = state.pressure(params);
    let prim = |i: usize| Prim { rho: state.rho[i], v: state.mom[i] / state.rho[i], p: pressure[i] };
    // faces 0..=cells; face 0 mirrors cell 0, the last face copies the last cell
    let face = |f: usize| -> [f64; 3] {
        let (l, r) = if f == 0 {
            let c = prim(0);
            (Prim { v: -c.v, ..c }, c)
        } else if f == cells {
            let c = prim(cells - 1);
            (c, c)
        } else {
            (prim(f - 1), prim(f))
        };
        numerical_flux(l, r, config.flux, gamma)
    };
    let fluxes: Vec<[f64; 3]> = (0..cells + 1).into_par_iter().with_min_len(PAR_CHUNK).map(face).collect();

    let mut next = state.clone();
    for i in 0..cells {
        let (am, ap) = (state.area[i], state.area[i + 1]);
        let v = state.volume[i];
        let src = pressure[i] * (ap - am) / v;
        next.rho[i] -= dt / v * (ap * fluxes[i + 1][0] - am * fluxes[i][0]);
        next.mom[i] -= dt / v * (ap * fluxes[i + 1][1] - am * fluxes[i][1]) - dt * src;
        next.energy[i] -= dt / v * (ap * fluxes[i + 1][2] - am * fluxes[i][2]);
    }
    next.outflow += dt * unit_sphere_area(params.n) * state.area[cells] * fluxes[cells][0];
    next.t += dt;
    next.check_positivity()?;
    Ok(next)
}

/// Integral totals at one output time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationRecord {
    pub t: f64,
    pub mass: f64,
    /// Mass that left through the outer boundary.
    pub outflow: f64,
    pub kinetic: f64,
    pub internal: f64,
    /// Momentum of mass `int rho r^2 / 2`.
    pub g: f64,
}

#[derive(Debug, Clone)]
pub struct SolverRun {
    pub snapshots: Vec<FlowSnapshot>,
    pub log: Vec<ConservationRecord>,
    pub steps: usize,
    pub final_state: ConservedState,
}

impl SolverRun {
    /// `max |mass(t) + outflow(t) - mass(0)| / mass(0)` over the log.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.log[0].mass;
        self.log.iter().map(|c| (c.mass + c.outflow - m0).abs() / m0).fold(0.0, f64::max)
    }
}

/// Output times `0, dt_out, 2 dt_out, ..` up to `t_end` (always included).
pub fn output_times(t_start: f64, t_end: f64, out_every: Option<f64>) -> Vec<f64> {
    let mut ts = vec![t_start];
    if let Some(dt) = out_every.filter(|d| *d > 0.0) {
        let mut k = 1;
        loop {
            let t = t_start + k as f64 * dt;
            if t >= t_end * (1.0 - 1e-12) {
                break;
            }
            ts.push(t);
            k += 1;
        }
    }
    if t_end > t_start {
        ts.push(t_end);
    }
    ts
}

/// Advances `initial` to `t_end`, recording snapshots at `output_times`.
pub fn run(
    initial: ConservedState,
    t_end: f64,
    out_every: Option<f64>,
    config: &SolverConfig,
    params: &GasParameters,
) -> Result<SolverRun> {
    config.validate()?;
    if !(t_end >= initial.t) {
        return Err(Error::InvalidParameter(format!("t_end {t_end} precedes the initial time {}", initial.t)));
    }
    let times = output_times(initial.t, t_end, out_every);
    let mut state = initial;
    let mut out = SolverRun {
        snapshots: vec![state.to_snapshot(params)?],
        log: vec![state.totals(params)],
        steps: 0,
        final_state: state.clone(),
    };
    for &target in &times[1..] {
        while state.t < target {
            if out.steps >= MAX_STEPS {
                return Err(Error::StepUnderflow { t: state.t, h: target - state.t });
            }
            let mut next = step_limited(&state, config, params, target - state.t)?;
            if target - next.t <= 1e-12 * target.abs().max(1.0) {
                next.t = target;
            }
            state = next;
            out.steps += 1;
        }
        out.snapshots.push(state.to_snapshot(params)?);
        out.log.push(state.totals(params));
    }
    out.final_state = state;
    Ok(out)
}

/// Equation residuals of a sampled flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeResidualReport {
    /// `max |rho_t + (rho v)_r + (n-1) rho v / r|` over interior points.
    pub continuity: f64,
    /// `max |p_t + v p_r + gamma p (v_r + (n-1) v / r)|` over interior points.
    pub pressure: f64,
    /// `max(continuity, pressure)`.
    pub max: f64,
    /// `max |rho (v_t + v v_r) + p_r|`; reported, not part of `max`.
    pub momentum: f64,
    /// Per-node maxima over time; zero at excluded nodes.
    pub continuity_nodes: Vec<f64>,
    pub pressure_nodes: Vec<f64>,
}

/// Centred-difference residuals on a series with a fixed uniform grid and a
/// uniform time step. Interior means time levels `1..L-1` and nodes with
/// `r > 0` that have both neighbours.
pub fn pde_residual(series: &[FlowSnapshot], params: &GasParameters) -> Result<PdeResidualReport> {
    params.validate()?;
    if series.len() < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 time levels, got {}", series.len())));
    }
    let grid = series[0].grid();
    let h = grid.uniform_spacing().ok_or_else(|| Error::InvalidInput("residuals need a uniform grid".into()))?;
    if series.iter().any(|s| s.grid() != grid) {
        return Err(Error::InvalidInput("all time levels must share one grid".into()));
    }
    let dt = series[1].t() - series[0].t();
    if !(dt > 0.0) || series.windows(2).any(|w| ((w[1].t() - w[0].t()) - dt).abs() > 1e-9 * dt) {
        return Err(Error::InvalidInput("time levels must be increasing with a uniform step".into()));
    }
    let r = grid.nodes();
    let len = r.len();
    let nm1 = (params.n - 1) as f64;
    let gamma = params.gamma;
    let mut report = PdeResidualReport {
        continuity: 0.0,
        pressure: 0.0,
        max: 0.0,
        momentum: 0.0,
        continuity_nodes: vec![0.0; len],
        pressure_nodes: vec![0.0; len],
    };
    for k in 1..series.len() - 1 {
        let (prev, cur, next) = (&series[k - 1], &series[k], &series[k + 1]);
        let (rho, v, p) = (cur.rho(), cur.v(), cur.p());
        for i in 1..len - 1 {
            if r[i] <= 0.0 {
                continue;
            }
            let dr = |f: &[f64]| (f[i + 1] - f[i - 1]) / (2.0 * h);
            let dtc = |a: &[f64], b: &[f64]| (b[i] - a[i]) / (2.0 * dt);
            let flux: [f64; 3] = [rho[i - 1] * v[i - 1], 0.0, rho[i + 1] * v[i + 1]];
            let div_flux = (flux[2] - flux[0]) / (2.0 * h);
            let cont = dtc(prev.rho(), next.rho()) + div_flux + nm1 * rho[i] * v[i] / r[i];
            let div_v = dr(v) + nm1 * v[i] / r[i];
            let pres = dtc(prev.p(), next.p()) + v[i] * dr(p) + gamma * p[i] * div_v;
            let mom = rho[i] * (dtc(prev.v(), next.v()) + v[i] * dr(v)) + dr(p);
            report.continuity_nodes[i] = report.continuity_nodes[i].max(cont.abs());
            report.pressure_nodes[i] = report.pressure_nodes[i].max(pres.abs());
            report.momentum = report.momentum.max(mom.abs());
        }
    }
    report.continuity = report.continuity_nodes.iter().fold(0.0, |m: f64, x| m.max(*x));
    report.pressure = report.pressure_nodes.iter().fold(0.0, |m: f64, x| m.max(*x));
    report.max = report.continuity.max(report.pressure);
    if !report.max.is_finite() || !report.momentum.is_finite() {
        return Err(Error::Singular { index: 0, r: r[0] });
    }
    Ok(report)
}
