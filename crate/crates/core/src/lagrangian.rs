//! Material volumes sampled by boundary particles: advection, the boundary
//! pressure flux seen from an outside point, a weighted volume functional
//! and distance monitoring.
//!
//! Points are stored as 3-vectors. A one-dimensional volume is an interval
//! on the first axis; a three-dimensional one is a latitude-longitude
//! sampling of a closed star-shaped surface.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::DeformationSolution;
use crate::gas::GasParameters;
use crate::grid::pairwise_sum;

pub type Point = [f64; 3];

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn add_scaled(a: &Point, b: &Point, s: f64) -> Point {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}
fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn cross(a: &Point, b: &Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    /// Two endpoints `[a, b]`.
    Interval,
    /// North pole, `n_lat - 1` rings of `n_lon` points, south pole.
    Sphere { n_lat: usize, n_lon: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialVolume {
    points: Vec<Point>,
    topology: Topology,
    pub t: f64,
}

impl MaterialVolume {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidInput(format!("interval needs a < b, got [{a}, {b}]")));
        }
        Ok(Self { points: vec![[a, 0.0, 0.0], [b, 0.0, 0.0]], topology: Topology::Interval, t: 0.0 })
    }

    pub fn sphere(center: Point, radius: f64, n_lat: usize, n_lon: usize) -> Result<Self> {
        if n_lat < 3 || n_lon < 4 {
            return Err(Error::InvalidInput(format!(
                "sphere sampling needs n_lat >= 3 and n_lon >= 4, got {n_lat} x {n_lon}"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid sphere center {center:?} / radius {radius}")));
        }
        let mut points = Vec::with_capacity(2 + (n_lat - 1) * n_lon);
        points.push(add_scaled(&center, &[0.0, 0.0, 1.0], radius));
        for k in 1..n_lat {
            let th = std::f64::consts::PI * k as f64 / n_lat as f64;
            for j in 0..n_lon {
                let ph = 2.0 * std::f64::consts::PI * j as f64 / n_lon as f64;
                let dir = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                points.push(add_scaled(&center, &dir, radius));
            }
        }
        points.push(add_scaled(&center, &[0.0, 0.0, -1.0], radius));
        Ok(Self { points, topology: Topology::Sphere { n_lat, n_lon }, t: 0.0 })
    }

    /// Rebuilds a volume from particle positions with a known topology.
    pub fn from_points(points: Vec<Point>, topology: Topology, t: f64) -> Result<Self> {
        let want = match topology {
            Topology::Interval => 2,
            Topology::Sphere { n_lat, n_lon } => {
                if n_lat < 3 || n_lon < 4 {
                    return Err(Error::InvalidInput("sphere sampling too coarse".into()));
                }
                2 + (n_lat - 1) * n_lon
            }
        };
        if points.len() != want {
            return Err(Error::InvalidInput(format!("{topology:?} needs {want} points, got {}", points.len())));
        }
        Ok(Self { points, topology, t })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn dim(&self) -> usize {
        match self.topology {
            Topology::Interval => 1,
            Topology::Sphere { .. } => 3,
        }
    }

    fn facets(&self) -> Vec<Vec<usize>> {
        let Topology::Sphere { n_lat, n_lon } = self.topology else {
            return Vec::new();
        };
        let ring = |k: usize, j: usize| 1 + (k - 1) * n_lon + j % n_lon;
        let south = self.points.len() - 1;
        let mut f = Vec::with_capacity(n_lat * n_lon);
        for j in 0..n_lon {
            f.push(vec![0, ring(1, j), ring(1, j + 1)]);
        }
        for k in 1..n_lat - 1 {
            for j in 0..n_lon {
                f.push(vec![ring(k, j), ring(k + 1, j), ring(k + 1, j + 1), ring(k, j + 1)]);
            }
        }
        for j in 0..n_lon {
            f.push(vec![south, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)]);
        }
        f
    }

    fn facet_vector_area(&self, f: &[usize]) -> Point {
        let p = &self.points;
        let c = if f.len() == 3 {
            cross(&sub(&p[f[1]], &p[f[0]]), &sub(&p[f[2]], &p[f[0]]))
        } else {
            cross(&sub(&p[f[2]], &p[f[0]]), &sub(&p[f[3]], &p[f[1]]))
        };
        [0.5 * c[0], 0.5 * c[1], 0.5 * c[2]]
    }

    /// Outward `nu dA` per particle: each facet's vector area split equally
    /// among its vertices. For an interval, the unit normals `-1` and `+1`.
    pub fn vector_areas(&self) -> Vec<Point> {
        match self.topology {
            Topology::Interval => vec![[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
            Topology::Sphere { .. } => {
                let mut out = vec![[0.0; 3]; self.points.len()];
                for f in self.facets() {
                    let a = self.facet_vector_area(&f);
                    let share = 1.0 / f.len() as f64;
                    for &i in &f {
                        out[i] = add_scaled(&out[i], &a, share);
                    }
                }
                out
            }
        }
    }

    /// Scalar area weight per particle, same split as [`Self::vector_areas`].
    pub fn area_weights(&self) -> Vec<f64> {
        match self.topology {
            Topology::Interval => vec![1.0, 1.0],
            Topology::Sphere { .. } => {
                let mut out = vec![0.0; self.points.len()];
                for f in self.facets() {
                    let a = norm(&self.facet_vector_area(&f)) / f.len() as f64;
                    for &i in &f {
                        out[i] += a;
                    }
                }
                out
            }
        }
    }

    /// Total facet area (the number of endpoints for an interval).
    pub fn surface_area(&self) -> f64 {
        pairwise_sum(&self.area_weights())
    }

    pub fn centroid(&self) -> Point {
        let n = self.points.len() as f64;
        let mut c = [0.0; 3];
        for p in &self.points {
            c = add_scaled(&c, p, 1.0 / n);
        }
        c
    }

    /// Enclosed volume, `(1/3) sum (x - c) . nu dA` (the length for an interval).
    pub fn enclosed_volume(&self) -> f64 {
        match self.topology {
            Topology::Interval => self.points[1][0] - self.points[0][0],
            Topology::Sphere { .. } => {
                let c = self.centroid();
                let terms: Vec<f64> =
                    self.points.iter().zip(self.vector_areas()).map(|(x, a)| dot(&sub(x, &c), &a) / 3.0).collect();
                pairwise_sum(&terms)
            }
        }
    }

    fn max_edge(&self) -> f64 {
        self.facets()
            .iter()
            .flat_map(|f| (0..f.len()).map(move |k| (f[k], f[(k + 1) % f.len()])))
            .map(|(a, b)| norm(&sub(&self.points[a], &self.points[b])))
            .fold(0.0, f64::max)
    }

    /// Errors unless `x0` lies outside the volume by more than one particle spacing.
    pub fn check_outside(&self, x0: &Point) -> Result<()> {
        match self.topology {
            Topology::Interval => {
                let (a, b) = (self.points[0][0], self.points[1][0]);
                if x0[0] >= a && x0[0] <= b {
                    return Err(Error::Geometry(format!("x0 = {} lies in [{a}, {b}]", x0[0])));
                }
            }
            Topology::Sphere { .. } => {
                let d = min_distance(self, x0);
                let h = self.max_edge();
                if d <= h {
                    return Err(Error::Geometry(format!("x0 is within {d} of the boundary (particle spacing {h})")));
                }
                // solid angle of the surface seen from x0: 4 pi inside, 0 outside
                let omega: f64 = self
                    .points
                    .iter()
                    .zip(self.vector_areas())
                    .map(|(x, a)| {
                        let r = sub(x, x0);
                        dot(&r, &a) / norm(&r).powi(3)
                    })
                    .sum();
                if omega > 2.0 * std::f64::consts::PI {
                    return Err(Error::Geometry("x0 lies inside the material volume".into()));
                }
            }
        }
        Ok(())
    }
}

/// Velocity `v(t, x)`, `None` where the field is undefined.
pub trait VelocityField: Sync {
    fn velocity(&self, t: f64, x: &Point) -> Option<Point>;
}

impl<F> VelocityField for F
where
    F: Fn(f64, &Point) -> Option<Point> + Sync,
{
    fn velocity(&self, t: f64, x: &Point) -> Option<Point> {
        self(t, x)
    }
}

/// `v = a(t) x` on the horizon of a deformation trajectory.
#[derive(Debug, Clone)]
pub struct UniformDeformationField<'a> {
    pub solution: &'a DeformationSolution,
}

impl VelocityField for UniformDeformationField<'_> {
    fn velocity(&self, t: f64, x: &Point) -> Option<Point> {
        let (a, _) = self.solution.at(t).ok()?;
        Some([a * x[0], a * x[1], a * x[2]])
    }
}

/// One classical RK4 step of every particle; `dt` may be negative.
pub fn advect(volume: &MaterialVolume, field: &dyn VelocityField, dt: f64) -> Result<MaterialVolume> {
    if !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("time step must be finite, got {dt}")));
    }
    let t = volume.t;
    let moved: Vec<Result<Point>> = volume
        .points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let eval = |s: f64, y: &Point| field.velocity(s, y).ok_or(Error::FieldDomain { index: i, t: s });
            let k1 = eval(t, x)?;
            let k2 = eval(t + 0.5 * dt, &add_scaled(x, &k1, 0.5 * dt))?;
            let k3 = eval(t + 0.5 * dt, &add_scaled(x, &k2, 0.5 * dt))?;
            let k4 = eval(t + dt, &add_scaled(x, &k3, dt))?;
            let mut y = *x;
            for d in 0..3 {
                y[d] += dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
            }
            Ok(y)
        })
        .collect();
    let points = moved.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(MaterialVolume { points, topology: volume.topology, t: t + dt })
}

/// `int over the boundary of ((x - x0)/|x - x0|, nu) p dS`, signed.
pub fn boundary_pressure_flux(volume: &MaterialVolume, pressure: &dyn Fn(&Point) -> f64, x0: &Point) -> Result<f64> {
    volume.check_outside(x0)?;
    let terms: Vec<f64> = volume
        .points
        .iter()
        .zip(volume.vector_areas())
        .map(|(x, a)| {
            let r = sub(x, x0);
            pressure(x) * dot(&r, &a) / norm(&r)
        })
        .collect();
    let value = pairwise_sum(&terms);
    if !value.is_finite() {
        return Err(Error::Geometry("non-finite boundary pressure flux".into()));
    }
    Ok(value)
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; m];
    let mut ws = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        xs[i] = 0.5 * (1.0 - x);
        ws[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

const GL_POINTS: usize = 8;
const GL_PANELS: usize = 8;

fn integrate_unit(f: &dyn Fn(f64) -> f64) -> f64 {
    let (xs, ws) = gauss_legendre(GL_POINTS);
    let h = 1.0 / GL_PANELS as f64;
    let mut terms = Vec::with_capacity(GL_POINTS * GL_PANELS);
    for k in 0..GL_PANELS {
        for (x, w) in xs.iter().zip(&ws) {
            terms.push(h * w * f(h * (k as f64 + x)));
        }
    }
    pairwise_sum(&terms)
}

/// `int over V of |x - x0|^(q-2) (v(x), x - x0) rho(x) dx` at `t = 0`.
///
/// Three-dimensional volumes are integrated as cones from the centroid to
/// the boundary particles, which assumes the volume is star-shaped about it.
pub fn theorem3_functional(
    volume: &MaterialVolume,
    rho: &dyn Fn(&Point) -> f64,
    v: &dyn Fn(&Point) -> Point,
    x0: &Point,
    q: f64,
    params: &GasParameters,
) -> Result<f64> {
    params.validate()?;
    if volume.dim() != params.n {
        return Err(Error::InvalidInput(format!("volume dimension {} does not match n = {}", volume.dim(), params.n)));
    }
    let q_max = -(params.n as f64) - 2.0 / (params.gamma - 1.0);
    if !(q < q_max) {
        return Err(Error::InvalidParameter(format!("q must be below {q_max}, got {q}")));
    }
    volume.check_outside(x0)?;
    let f = |x: &Point| {
        let r = sub(x, x0);
        norm(&r).powf(q - 2.0) * dot(&v(x), &r) * rho(x)
    };
    let value = match volume.topology {
        Topology::Interval => {
            let (a, b) = (volume.points[0][0], volume.points[1][0]);
            (b - a) * integrate_unit(&|s| f(&[a + s * (b - a), 0.0, 0.0]))
        }
        Topology::Sphere { .. } => {
            let c = volume.centroid();
            let terms: Vec<f64> = volume
                .points
                .iter()
                .zip(volume.vector_areas())
                .map(|(x, a)| {
                    let d = sub(x, &c);
                    dot(&d, &a) * integrate_unit(&|s| f(&add_scaled(&c, &d, s)) * s * s)
                })
                .collect();
            pairwise_sum(&terms)
        }
    };
    if !value.is_finite() {
        return Err(Error::Geometry("non-finite volume functional".into()));
    }
    Ok(value)
}

/// Smallest particle distance to `x0`.
pub fn min_distance(volume: &MaterialVolume, x0: &Point) -> f64 {
    volume.points.iter().map(|x| norm(&sub(x, x0))).fold(f64::INFINITY, f64::min)
}

/// Boundary flux samples and their supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub times: Vec<f64>,
    pub flux: Vec<f64>,
    pub min_distance: Vec<f64>,
    pub m_observed: f64,
}

/// Advects `volume` to `t_end` with step `dt`, sampling the boundary
/// pressure flux and distance to `x0` after every step.
pub fn track(
    volume: &MaterialVolume,
    field: &dyn VelocityField,
    pressure: &dyn Fn(f64, &Point) -> f64,
    x0: &Point,
    dt: f64,
    t_end: f64,
) -> Result<(MaterialVolume, RegularityReport)> {
    if !(dt > 0.0) || !(t_end >= volume.t) {
        return Err(Error::InvalidParameter(format!("need dt > 0 and t_end >= t (dt {dt}, t_end {t_end})")));
    }
    let mut cur = volume.clone();
    let mut rep = RegularityReport { times: Vec::new(), flux: Vec::new(), min_distance: Vec::new(), m_observed: 0.0 };
    loop {
        let t = cur.t;
        let flux = boundary_pressure_flux(&cur, &|x| pressure(t, x), x0)?;
        rep.times.push(t);
        rep.flux.push(flux);
        rep.min_distance.push(min_distance(&cur, x0));
        rep.m_observed = rep.m_observed.max(flux.abs());
        let left = t_end - t;
        if left <= 1e-12 * t_end.abs().max(1.0) {
            break;
        }
        let mut next = advect(&cur, field, dt.min(left))?;
        if (t_end - next.t).abs() <= 1e-12 * t_end.abs().max(1.0) {
            next.t = t_end;
        }
        cur = next;
    }
    Ok((cur, rep))
}
