//! Generalized momenta of mass `G_phi = int rho phi(|x|) dx`, their first
//! derivative, the curvature integrals `I1..I4` and the virial identity.
//!
//! All functionals here assume radial flow: `v(x) = v(r) x / r`, so that
//! `(v, x) = v r` and the rotational part `sigma` vanishes identically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::GasParameters;
use crate::grid::{radial_jacobian, radial_quadrature, unit_sphere_area, window};
use crate::snapshot::{conserved, FlowSnapshot};

/// Normalisation floor of [`virial_residual`].
pub const VIRIAL_NORM_FLOOR: f64 = 1e-30;

/// Weight `phi(r)` of a generalized momentum.
///
/// The singular weights carry a mandatory inner radius: the ball
/// `r < inner_radius` is cut out of every integration region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightFunction {
    /// `phi = r^2 / 2`, the classical momentum of mass.
    Quadratic,
    /// `phi = r^(2-n)`, proportional to the fundamental solution of the
    /// Laplacian, `n >= 3`.
    Power { n: usize, inner_radius: f64 },
    /// `phi = r^q`, `q < 0`, with the singular point at the origin of the
    /// radial frame.
    ShiftedPower { q: f64, inner_radius: f64 },
}

impl WeightFunction {
    pub fn quadratic() -> Self {
        Self::Quadratic
    }

    pub fn power(n: usize, inner_radius: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::UnsupportedDimension {
                n,
                reason: "the power weight r^(2-n) is only supported for n >= 3",
            });
        }
        check_inner_radius(inner_radius)?;
        Ok(Self::Power { n, inner_radius })
    }

    pub fn shifted_power(q: f64, inner_radius: f64) -> Result<Self> {
        if !(q < 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("shifted power exponent must be negative, got {q}")));
        }
        check_inner_radius(inner_radius)?;
        Ok(Self::ShiftedPower { q, inner_radius })
    }

    fn exponent(&self) -> Option<f64> {
        match *self {
            Self::Quadratic => None,
            Self::Power { n, .. } => Some(2.0 - n as f64),
            Self::ShiftedPower { q, .. } => Some(q),
        }
    }

    pub fn inner_radius(&self) -> Option<f64> {
        match *self {
            Self::Quadratic => None,
            Self::Power { inner_radius, .. } | Self::ShiftedPower { inner_radius, .. } => Some(inner_radius),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match self.exponent() {
            None => 0.5 * r * r,
            Some(k) => r.powf(k),
        }
    }

    pub fn first(&self, r: f64) -> f64 {
        match self.exponent() {
            None => r,
            Some(k) => k * r.powf(k - 1.0),
        }
    }

    /// `phi'(r) / r`, finite at the origin for the quadratic weight.
    pub fn first_over_r(&self, r: f64) -> f64 {
        match self.exponent() {
            None => 1.0,
            Some(k) => k * r.powf(k - 2.0),
        }
    }

    pub fn second(&self, r: f64) -> f64 {
        match self.exponent() {
            None => 1.0,
            Some(k) => k * (k - 1.0) * r.powf(k - 2.0),
        }
    }
}

fn check_inner_radius(r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("singular weights need a positive inner radius, got {r}")));
    }
    Ok(())
}

/// Integration region for the curvature integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    /// All of space: the outer boundary term is taken in the decaying limit (zero).
    AllSpace,
    /// The ball `r <= radius`; its surface contributes to `I4`.
    Ball { radius: f64 },
}

/// `G'_phi` and the four terms whose sum is `G''_phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaOneTerms {
    pub g_rate: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
}

impl LemmaOneTerms {
    pub fn curvature(&self) -> f64 {
        self.i1 + self.i2 + self.i3 + self.i4
    }
}

/// Components `sigma_k = v_i x_j - v_j x_i`, `i > j`, in lexicographic order.
pub fn sigma_vector(v: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if v.len() != x.len() {
        return Err(Error::InvalidInput(format!(
            "sigma needs vectors of equal dimension, got {} and {}",
            v.len(),
            x.len()
        )));
    }
    let n = v.len();
    let mut sigma = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 1..n {
        for j in 0..i {
            sigma.push(v[i] * x[j] - v[j] * x[i]);
        }
    }
    Ok(sigma)
}

/// `|sigma|^2`; equals `|v|^2 |x|^2 - (v, x)^2`.
pub fn sigma_norm_sq(v: &[f64], x: &[f64]) -> Result<f64> {
    Ok(sigma_vector(v, x)?.iter().map(|s| s * s).sum())
}

struct Domain {
    r: Vec<f64>,
    rho: Vec<f64>,
    v: Vec<f64>,
    p: Vec<f64>,
    node: Vec<Option<usize>>,
}

fn domain(snapshot: &FlowSnapshot, w: &WeightFunction, outer: Option<f64>) -> Result<Domain> {
    let r = snapshot.r();
    let lo = w.inner_radius().unwrap_or(r[0]);
    let hi = outer.unwrap_or(r[r.len() - 1]);
    if let Some(inner) = w.inner_radius() {
        if inner < r[0] - 1e-12 {
            return Err(Error::InsufficientDomain(format!(
                "inner radius {inner} lies below the first grid node {}",
                r[0]
            )));
        }
    }
    let (rs, mut f, node) = window(r, &[snapshot.rho(), snapshot.v(), snapshot.p()], lo, hi)?;
    let p = f.pop().unwrap();
    let v = f.pop().unwrap();
    let rho = f.pop().unwrap();
    Ok(Domain { r: rs, rho, v, p, node })
}

fn integrate_checked(d: &Domain, integrand: Vec<f64>, n: usize) -> Result<f64> {
    if let Some(i) = integrand.iter().position(|x| !x.is_finite()) {
        return Err(Error::Singular { index: d.node[i].unwrap_or(i), r: d.r[i] });
    }
    Ok(radial_quadrature(&d.r, &integrand, n))
}

/// `G_phi = int rho phi(|x|) dx` over the weight's domain.
pub fn g_phi(snapshot: &FlowSnapshot, w: &WeightFunction, params: &GasParameters) -> Result<f64> {
    params.validate()?;
    let d = domain(snapshot, w, None)?;
    let f = d.r.iter().zip(&d.rho).map(|(&r, &rho)| rho * w.value(r)).collect();
    integrate_checked(&d, f, params.n)
}

/// `G'_phi = int (phi'(r)/r) (v, x) rho dx = int phi'(r) v rho dx`.
pub fn g_phi_rate(snapshot: &FlowSnapshot, w: &WeightFunction, params: &GasParameters) -> Result<f64> {
    params.validate()?;
    let d = domain(snapshot, w, None)?;
    g_rate_on(&d, w, params.n)
}

fn g_rate_on(d: &Domain, w: &WeightFunction, n: usize) -> Result<f64> {
    let f = (0..d.r.len()).map(|i| w.first(d.r[i]) * d.v[i] * d.rho[i]).collect();
    integrate_checked(d, f, n)
}

/// The first derivative and curvature integrals of `G_phi` on `region`.
///
/// * `I1 = int (phi''/r^2) (v, x)^2 rho = int phi'' v^2 rho`
/// * `I2 = int (phi'/r^3) |sigma|^2 rho`, identically zero for radial flow
/// * `I3 = int (phi'' + (n-1) phi'/r) p`
/// * `I4 = -oint (phi'/r) (x, nu) p dS` over the region boundary: the
///   sphere `r = R` for a ball, plus the inner sphere cut out by a
///   singular weight (outer normal pointing to the origin there).
pub fn lemma1_terms(
    snapshot: &FlowSnapshot,
    w: &WeightFunction,
    region: Region,
    params: &GasParameters,
) -> Result<LemmaOneTerms> {
    params.validate()?;
    let n = params.n;
    let outer = match region {
        Region::AllSpace => None,
        Region::Ball { radius } => Some(radius),
    };
    let d = domain(snapshot, w, outer)?;
    let len = d.r.len();

    let g_rate = g_rate_on(&d, w, n)?;
    let i1 = integrate_checked(&d, (0..len).map(|i| w.second(d.r[i]) * d.v[i] * d.v[i] * d.rho[i]).collect(), n)?;
    let nm1 = (n - 1) as f64;
    let i3 = integrate_checked(
        &d,
        (0..len)
            .map(|i| {
                let r = d.r[i];
                let radial = if n == 1 { 0.0 } else { nm1 * w.first_over_r(r) };
                (w.second(r) + radial) * d.p[i]
            })
            .collect(),
        n,
    )?;

    // (phi'(R)/R) (x, nu) = phi'(R) on the outer sphere, -phi'(r_in) on the inner one.
    let omega = unit_sphere_area(n);
    let mut i4 = 0.0;
    if outer.is_some() {
        let (r, p) = (d.r[len - 1], d.p[len - 1]);
        i4 -= omega * radial_jacobian(r, n) * w.first(r) * p;
    }
    if w.inner_radius().is_some() {
        let (r, p) = (d.r[0], d.p[0]);
        i4 += omega * radial_jacobian(r, n) * w.first(r) * p;
    }
    if !i4.is_finite() {
        return Err(Error::Singular { index: 0, r: d.r[0] });
    }

    Ok(LemmaOneTerms {
        g_rate,
        i1,
        // radial flow: sigma vanishes pointwise
        i2: 0.0,
        i3,
        i4,
    })
}

/// Relative defect of `G'' = 2 E_k + n (gamma - 1) E_i`, with `G''`
/// assembled from the quadratic-weight curvature integrals over all space.
pub fn virial_residual(snapshot: &FlowSnapshot, params: &GasParameters) -> Result<f64> {
    let terms = lemma1_terms(snapshot, &WeightFunction::Quadratic, Region::AllSpace, params)?;
    let c = conserved(snapshot, params)?;
    let lhs = terms.i1 + terms.i2 + terms.i3;
    let rhs = 2.0 * c.kinetic + params.internal_coefficient() * c.internal;
    if c.total == 0.0 && (lhs != 0.0 || rhs != 0.0) {
        return Err(Error::Degenerate("zero total energy with nonzero virial terms".into()));
    }
    Ok((lhs - rhs).abs() / c.total.max(VIRIAL_NORM_FLOOR))
}

/// `(lambda1, lambda2, lambda3) = (2-n, (1-n)(2-n), 2-n)` for `n >= 3`.
pub fn lambda_constants(n: usize) -> Result<(f64, f64, f64)> {
    if n < 3 {
        return Err(Error::UnsupportedDimension {
            n,
            reason: "the excluding-pressure constants are only provided for n >= 3",
        });
    }
    let n = n as f64;
    Ok((2.0 - n, (1.0 - n) * (2.0 - n), 2.0 - n))
}
