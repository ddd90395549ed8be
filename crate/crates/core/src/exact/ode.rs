//! The scalar deformation-rate equation
//!
//! ```text
//! a' = -a^2 + K exp(-m b),   b' = a,   a(0) = a0,   b(0) = 0
//! ```
//!
//! with `m = (gamma - 1) n + 2`, integrated by an embedded Dormand-Prince
//! 5(4) pair under PI step-size control.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::GasParameters;
use crate::grid::unit_sphere_area;

use super::profiles::{internal_and_moment, ProfilePair};

/// Forcing constant, decay exponent and initial rate of the deformation ODE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationODE {
    pub forcing: f64,
    pub exponent: f64,
    pub a0: f64,
}

impl DeformationODE {
    pub fn new(forcing: f64, exponent: f64, a0: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(Error::InvalidParameter(format!("decay exponent must be positive, got {exponent}")));
        }
        if !forcing.is_finite() || !a0.is_finite() {
            return Err(Error::InvalidParameter("forcing and initial rate must be finite".into()));
        }
        Ok(Self { forcing, exponent, a0 })
    }

    /// Same forcing with exponent `(gamma - 1) n + 2`.
    pub fn for_gas(forcing: f64, params: &GasParameters, a0: f64) -> Result<Self> {
        params.validate()?;
        Self::new(forcing, params.deformation_exponent(), a0)
    }

    pub fn with_initial_rate(mut self, a0: f64) -> Self {
        self.a0 = a0;
        self
    }

    #[inline]
    pub fn rate(&self, a: f64, b: f64) -> f64 {
        -a * a + self.forcing * (-self.exponent * b).exp()
    }
}

/// `K1 = n (gamma - 1) E_i(0) / (2 G(0))`, from `G' = 2 a G`, the virial
/// identity and `E_i(t) = E_i(0) exp(-n (gamma - 1) b)`.
pub fn deformation_constant(pair: &ProfilePair, params: &GasParameters) -> Result<DeformationODE> {
    let (e_i, g) = internal_and_moment(pair.grid(), pair.rho0(), pair.p0(), params)?;
    if !(g > 0.0) {
        return Err(Error::Degenerate(format!("G(0) = {g}; no deformation constant")));
    }
    DeformationODE::for_gas(params.internal_coefficient() * e_i / (2.0 * g), params, 0.0)
}

/// `K2 = p(0,0) G_phi(0)^{n-2} / (omega_{n-1} (2-n)^2)` for the power weight.
pub fn excluding_pressure_constant(p_origin: f64, g_phi0: f64, params: &GasParameters) -> Result<DeformationODE> {
    params.validate()?;
    let n = params.n;
    if n < 3 {
        return Err(Error::UnsupportedDimension { n, reason: "the excluding-pressure construction needs n >= 3" });
    }
    if !(p_origin >= 0.0 && p_origin.is_finite()) {
        return Err(Error::InvalidParameter(format!("origin pressure must be >= 0, got {p_origin}")));
    }
    if !(g_phi0 > 0.0 && g_phi0.is_finite()) {
        return Err(Error::InvalidParameter(format!("G_phi(0) must be positive, got {g_phi0}")));
    }
    let d = (2.0 - n as f64).powi(2);
    let forcing = p_origin * g_phi0.powi(n as i32 - 2) / (unit_sphere_area(n) * d);
    DeformationODE::for_gas(forcing, params, 0.0)
}

/// Accepted steps of an integrated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationSolution {
    ode: DeformationODE,
    t: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    local_error: Vec<f64>,
}

impl DeformationSolution {
    pub fn ode(&self) -> &DeformationODE {
        &self.ode
    }
    pub fn t(&self) -> &[f64] {
        &self.t
    }
    pub fn a(&self) -> &[f64] {
        &self.a
    }
    pub fn b(&self) -> &[f64] {
        &self.b
    }
    /// Error estimate of the step ending at each sample (0 at `t = 0`).
    pub fn local_error(&self) -> &[f64] {
        &self.local_error
    }
    pub fn horizon(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    /// `(a(t), b(t))` by cubic Hermite interpolation between accepted steps.
    pub fn at(&self, t: f64) -> Result<(f64, f64)> {
        let (start, end) = self.horizon();
        if !(t >= start && t <= end) {
            return Err(Error::OutsideHorizon { t, start, end });
        }
        let j = self.t.partition_point(|&x| x < t);
        if j < self.t.len() && self.t[j] == t {
            return Ok((self.a[j], self.b[j]));
        }
        let (i0, i1) = (j - 1, j);
        let h = self.t[i1] - self.t[i0];
        let s = (t - self.t[i0]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let (a0, a1, b0, b1) = (self.a[i0], self.a[i1], self.b[i0], self.b[i1]);
        let da0 = self.ode.rate(a0, b0);
        let da1 = self.ode.rate(a1, b1);
        let a = h00 * a0 + h10 * h * da0 + h01 * a1 + h11 * h * da1;
        let b = h00 * b0 + h10 * h * a0 + h01 * b1 + h11 * h * a1;
        Ok((a, b))
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const MAX_STEPS: usize = 10_000_000;

/// Adaptive integration on `[0, t_end]`.
///
/// A step of size `h` is accepted when its error estimate is at most
/// `tol * h * max(1, |y|)` per component, i.e. `tol` per unit time.
pub fn integrate_deformation(ode: &DeformationODE, t_end: f64, tol: f64) -> Result<DeformationSolution> {
    if ode.forcing < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "forcing constant must be >= 0 for a global solution, got {}",
            ode.forcing
        )));
    }
    if !(t_end > 0.0 && t_end.is_finite()) || !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("need t_end > 0 and tol > 0 (got {t_end}, {tol})")));
    }
    let f = |y: [f64; 2]| [ode.rate(y[0], y[1]), y[0]];
    // error-per-step exponent is 4 after dividing by h
    let expo = 0.25 - 0.75 * BETA;

    let mut t = 0.0;
    let mut y = [ode.a0, 0.0];
    let mut out = DeformationSolution { ode: *ode, t: vec![0.0], a: vec![y[0]], b: vec![0.0], local_error: vec![0.0] };
    let mut h = (tol.powf(0.25)).min(1e-2).min(t_end);
    let mut err_prev: f64 = 1e-4;
    let mut k = [[0.0; 2]; 7];
    k[0] = f(y);

    for _ in 0..MAX_STEPS {
        if t >= t_end {
            return Ok(out);
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h });
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s][j] * kj[0];
                ys[1] += h * A[s][j] * kj[1];
            }
            k[s] = f(ys);
        }
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            y_new[0] += h * A[6][j] * kj[0];
            y_new[1] += h * A[6][j] * kj[1];
        }
        let mut err: f64 = 0.0;
        for c in 0..2 {
            let e: f64 = (0..7).map(|j| E[j] * k[j][c]).sum::<f64>() * h;
            let sc = tol * h * y[c].abs().max(y_new[c].abs()).max(1.0);
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            h *= 0.1;
            continue;
        }
        if err <= 1.0 {
            let fac = (err.max(1e-10).powf(expo) / err_prev.powf(BETA) / SAFETY).clamp(0.1, 5.0);
            err_prev = err.max(1e-4);
            t = if last { t_end } else { t + h };
            y = y_new;
            // first-same-as-last: stage 7 is f at the new point
            k[0] = k[6];
            out.t.push(t);
            out.a.push(y[0]);
            out.b.push(y[1]);
            out.local_error.push(err * tol * h);
            h /= fac;
        } else {
            let fac = (err.powf(expo) / SAFETY).min(10.0);
            h /= fac;
        }
    }
    Err(Error::StepUnderflow { t, h })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pressureless_riccati() {
        let ode = DeformationODE::new(0.0, 4.0, 1.0).unwrap();
        let sol = integrate_deformation(&ode, 10.0, 1e-10).unwrap();
        let worst = sol.t().iter().zip(sol.a()).map(|(t, a)| (a - 1.0 / (1.0 + t)).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "max error {worst}");
        let (a1, b1) = sol.at(1.0).unwrap();
        assert!((a1 - 0.5).abs() < 1e-9);
        assert!((b1 - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn closed_form_for_unit_forcing() {
        // K = 1, m = 4, a0 = 0 has a = t / (1 + t^2), b = ln(1 + t^2) / 2
        let ode = DeformationODE::new(1.0, 4.0, 0.0).unwrap();
        let sol = integrate_deformation(&ode, 10.0, 1e-10).unwrap();
        for &t in &[0.37, 1.0, 4.2, 10.0] {
            let (a, b) = sol.at(t).unwrap();
            assert!((a - t / (1.0 + t * t)).abs() < 1e-9, "a({t})");
            assert!((b - 0.5 * (1.0 + t * t).ln()).abs() < 1e-9, "b({t})");
        }
        assert_eq!(sol.horizon(), (0.0, 10.0));
        assert!(sol.at(10.5).is_err());
    }

    #[test]
    fn rejects_negative_forcing_and_bad_tolerances() {
        let ode = DeformationODE::new(-1.0, 4.0, 0.0).unwrap();
        assert!(integrate_deformation(&ode, 1.0, 1e-8).is_err());
        let ode = DeformationODE::new(1.0, 4.0, 0.0).unwrap();
        assert!(integrate_deformation(&ode, 0.0, 1e-8).is_err());
        assert!(integrate_deformation(&ode, 1.0, 0.0).is_err());
        assert!(DeformationODE::new(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn excluding_pressure_constant_examples() {
        let params = GasParameters::new(3, 5.0 / 3.0).unwrap();
        let k = excluding_pressure_constant(1.0, 1.0, &params).unwrap();
        assert!((k.forcing - 1.0 / (4.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert_eq!(k.exponent, 4.0);
        assert_eq!(excluding_pressure_constant(0.0, 1.0, &params).unwrap().forcing, 0.0);
        let k2 = excluding_pressure_constant(1.0, 2.0, &params).unwrap();
        assert_eq!(k2.forcing, 2.0 * k.forcing);
        let flat = GasParameters::new(2, 5.0 / 3.0).unwrap();
        assert!(excluding_pressure_constant(1.0, 1.0, &flat).is_err());
    }

    #[test]
    fn b_is_integral_of_a() {
        let ode = DeformationODE::new(2.0, 3.2, -0.4).unwrap();
        let sol = integrate_deformation(&ode, 5.0, 1e-11).unwrap();
        let h = 1e-4;
        for &t in &[0.5, 1.5, 3.0, 4.5] {
            let (a, _) = sol.at(t).unwrap();
            let db = (sol.at(t + h).unwrap().1 - sol.at(t - h).unwrap().1) / (2.0 * h);
            assert!((db - a).abs() < 1e-6, "t = {t}: {db} vs {a}");
        }
    }
}
