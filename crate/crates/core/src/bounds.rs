//! Decay classes of solutions and the growth conditions they must meet for
//! a global smooth solution to exist.
//!
//! A class bounds each field along trajectories outside a ball,
//! `|f(t, x)| <= M_f(t) |x|^alpha_f` for `|x| > R0`, `t > T`. Together with
//! conservation of energy this caps the momentum of mass `G(t)` from above,
//! while the virial identity bounds it from below by a quadratic in `t`.
//! If the cap grows too slowly the two bounds cross, which certifies that
//! no global solution of that class exists.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::GasParameters;
use crate::grid::unit_sphere_area;
use crate::snapshot::FlowSnapshot;

const EXPONENT_TOL: f64 = 1e-12;

/// Ratios up to `1 + MEMBERSHIP_TOL` count as meeting the bound, absorbing
/// the rounding of numerically differentiated fields.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Time envelope `M(t)`, `t >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Envelope {
    Const {
        value: f64,
    },
    /// `scale (1 + t)^exponent`
    Power {
        scale: f64,
        exponent: f64,
    },
    /// `scale (1 + ln(1 + t))`
    Log {
        scale: f64,
    },
    /// Linear interpolation of samples, constant beyond the ends.
    Table {
        t: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Envelope {
    pub fn constant(value: f64) -> Self {
        Self::Const { value }
    }

    pub fn power(scale: f64, exponent: f64) -> Self {
        Self::Power { scale, exponent }
    }

    pub fn log(scale: f64) -> Self {
        Self::Log { scale }
    }

    pub fn table(t: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let e = Self::Table { t, values };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        let fine = match self {
            Self::Const { value } => ok(*value),
            Self::Power { scale, exponent } => ok(*scale) && exponent.is_finite(),
            Self::Log { scale } => ok(*scale),
            Self::Table { t, values } => {
                if t.is_empty() || t.len() != values.len() {
                    return Err(Error::InvalidInput(
                        "envelope table needs matching, non-empty t and value columns".into(),
                    ));
                }
                if t.windows(2).any(|w| !(w[1] > w[0])) || !t[0].is_finite() || !t[t.len() - 1].is_finite() {
                    return Err(Error::InvalidInput("envelope table times must be finite and increasing".into()));
                }
                values.iter().all(|&v| ok(v))
            }
        };
        if fine {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("envelope must be finite and nonnegative: {self:?}")))
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Const { value } => *value,
            Self::Power { scale, exponent } => scale * (1.0 + t).powf(*exponent),
            Self::Log { scale } => scale * (1.0 + t.ln_1p()),
            Self::Table { t: ts, values } => table_value(ts, values, t),
        }
    }

    /// `int_0^t M(tau) d tau`.
    pub fn integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Const { value } => value * t,
            Self::Power { scale, exponent } => {
                let k1 = exponent + 1.0;
                if k1.abs() < EXPONENT_TOL {
                    scale * t.ln_1p()
                } else {
                    scale * ((1.0 + t).powf(k1) - 1.0) / k1
                }
            }
            Self::Log { scale } => scale * (1.0 + t) * t.ln_1p(),
            Self::Table { t: ts, values } => {
                // piecewise linear, so the trapezoid rule on the breakpoints is exact
                let mut knots = vec![0.0];
                knots.extend(ts.iter().copied().filter(|&x| x > 0.0 && x < t));
                knots.push(t);
                knots
                    .windows(2)
                    .map(|w| 0.5 * (w[1] - w[0]) * (table_value(ts, values, w[0]) + table_value(ts, values, w[1])))
                    .sum()
            }
        }
    }
}

fn table_value(ts: &[f64], values: &[f64], t: f64) -> f64 {
    let last = ts.len() - 1;
    if t <= ts[0] {
        return values[0];
    }
    if t >= ts[last] {
        return values[last];
    }
    let j = ts.partition_point(|&x| x <= t);
    let s = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
    values[j - 1] + s * (values[j] - values[j - 1])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassTag {
    /// Navier-Stokes with heat conduction.
    Ns,
    /// Navier-Stokes without heat conduction; temperature decay is free.
    Ns0,
    /// Gas dynamics; velocity may grow up to linearly in `|x|`.
    Gd,
}

/// Envelopes of the five bounded quantities, in the order
/// velocity, velocity gradient, density, pressure, temperature.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelopes {
    #[serde(default)]
    pub v: Option<Envelope>,
    #[serde(default)]
    pub dv: Option<Envelope>,
    #[serde(default)]
    pub rho: Option<Envelope>,
    #[serde(default)]
    pub p: Option<Envelope>,
    #[serde(default)]
    pub theta: Option<Envelope>,
}

impl Envelopes {
    fn iter(&self) -> [Option<&Envelope>; 5] {
        [self.v.as_ref(), self.dv.as_ref(), self.rho.as_ref(), self.p.as_ref(), self.theta.as_ref()]
    }
}

/// A decay class `K(M(t), alpha)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayClassSpec {
    pub class: ClassTag,
    /// `(alpha_v, alpha_Dv, alpha_rho, alpha_p, alpha_theta)`
    pub alpha: [f64; 5],
    #[serde(default)]
    pub envelopes: Envelopes,
    pub r0: f64,
    #[serde(default)]
    pub t0: f64,
    pub epsilon: f64,
}

impl DecayClassSpec {
    /// `alpha = (-n, -n-1, -n-2-eps, -n-eps, -n)`.
    pub fn ns(n: usize, epsilon: f64, r0: f64) -> Result<Self> {
        let nf = n as f64;
        Self::new(ClassTag::Ns, [-nf, -nf - 1.0, -nf - 2.0 - epsilon, -nf - epsilon, -nf], r0, 0.0, epsilon)
    }

    /// As [`DecayClassSpec::ns`] with a free temperature exponent.
    pub fn ns0(n: usize, epsilon: f64, r0: f64, alpha_theta: f64) -> Result<Self> {
        let nf = n as f64;
        Self::new(ClassTag::Ns0, [-nf, -nf - 1.0, -nf - 2.0 - epsilon, -nf - epsilon, alpha_theta], r0, 0.0, epsilon)
    }

    /// `alpha = (alpha_v, alpha_Dv, -n-2-eps, -n-eps, alpha_theta)`, `alpha_v <= 1`.
    pub fn gd(n: usize, epsilon: f64, r0: f64, alpha_v: f64, alpha_dv: f64, alpha_theta: f64) -> Result<Self> {
        let nf = n as f64;
        Self::new(ClassTag::Gd, [alpha_v, alpha_dv, -nf - 2.0 - epsilon, -nf - epsilon, alpha_theta], r0, 0.0, epsilon)
    }

    pub fn new(class: ClassTag, alpha: [f64; 5], r0: f64, t0: f64, epsilon: f64) -> Result<Self> {
        Ok(Self { class, alpha, envelopes: Envelopes::default(), r0, t0, epsilon })
    }

    pub fn with_envelopes(mut self, envelopes: Envelopes) -> Self {
        self.envelopes = envelopes;
        self
    }

    pub fn with_start_time(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    /// Checks the exponents against the class tag in dimension `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(Error::InvalidParameter(format!("R0 must be positive, got {}", self.r0)));
        }
        if !(self.t0 >= 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidParameter(format!("T must be >= 0, got {}", self.t0)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("decay exponents must be finite".into()));
        }
        for e in self.envelopes.iter().into_iter().flatten() {
            e.validate()?;
        }
        let nf = n as f64;
        let eps = self.epsilon;
        let [av, adv, arho, ap, atheta] = self.alpha;
        let expect = |name: &str, got: f64, want: f64| -> Result<()> {
            if (got - want).abs() > EXPONENT_TOL * want.abs().max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{:?} class needs {name} = {want}, got {got}",
                    self.class
                )));
            }
            Ok(())
        };
        match self.class {
            ClassTag::Ns | ClassTag::Ns0 => {
                expect("alpha_v", av, -nf)?;
                expect("alpha_Dv", adv, -nf - 1.0)?;
                expect("alpha_rho", arho, -nf - 2.0 - eps)?;
                expect("alpha_p", ap, -nf - eps)?;
                if self.class == ClassTag::Ns {
                    expect("alpha_theta", atheta, -nf)?;
                }
            }
            ClassTag::Gd => {
                if av > 1.0 {
                    return Err(Error::InvalidParameter(format!("GD class needs alpha_v <= 1, got {av}")));
                }
                expect("alpha_rho", arho, -nf - 2.0 - eps)?;
                expect("alpha_p", ap, -nf - eps)?;
            }
        }
        Ok(())
    }
}

/// Worst ratio `|f| / (M(t) r^alpha)` per field, `None` where no envelope is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub t: f64,
    pub nodes_checked: usize,
    pub v: Option<f64>,
    pub dv: Option<f64>,
    pub rho: Option<f64>,
    pub p: Option<f64>,
    pub theta: Option<f64>,
    pub member: bool,
}

/// Evaluates the class bounds on the nodes of `snapshot` with `r > R0`.
///
/// The velocity gradient of the radial field `v(r) x / r` has eigenvalues
/// `v'(r)` and `v / r`; its operator norm is bounded.
pub fn classify_snapshot(
    snapshot: &FlowSnapshot,
    spec: &DecayClassSpec,
    params: &GasParameters,
) -> Result<MembershipReport> {
    params.validate()?;
    spec.validate(params.n)?;
    let t = snapshot.t();
    if t < spec.t0 {
        return Err(Error::InvalidInput(format!("snapshot time {t} precedes the class start time {}", spec.t0)));
    }
    let r = snapshot.r();
    let outside: Vec<usize> = (0..r.len()).filter(|&i| r[i] > spec.r0).collect();
    if outside.is_empty() {
        return Err(Error::InsufficientDomain(format!(
            "no grid nodes beyond R0 = {} (grid ends at {})",
            spec.r0,
            r[r.len() - 1]
        )));
    }
    let dv_radial = snapshot.grid().derivative(snapshot.v());
    let theta = snapshot.temperature(params);
    let v = snapshot.v();

    let field = |k: usize, i: usize| -> Option<f64> {
        match k {
            0 => Some(v[i].abs()),
            1 => Some(dv_radial[i].abs().max((v[i] / r[i]).abs())),
            2 => Some(snapshot.rho()[i]),
            3 => Some(snapshot.p()[i]),
            _ => theta[i],
        }
    };
    let mut ratios = [None; 5];
    for (k, env) in spec.envelopes.iter().into_iter().enumerate() {
        let Some(env) = env else { continue };
        let m = env.value(t);
        let worst = outside
            .iter()
            .filter_map(|&i| field(k, i).map(|f| ratio(f, m * r[i].powf(spec.alpha[k]))))
            .fold(0.0f64, f64::max);
        ratios[k] = Some(worst);
    }
    let member = ratios.iter().flatten().all(|&x| x <= 1.0 + MEMBERSHIP_TOL);
    Ok(MembershipReport {
        t,
        nodes_checked: outside.len(),
        v: ratios[0],
        dv: ratios[1],
        rho: ratios[2],
        p: ratios[3],
        theta: ratios[4],
        member,
    })
}

fn ratio(f: f64, bound: f64) -> f64 {
    if f == 0.0 {
        0.0
    } else if bound == 0.0 {
        f64::INFINITY
    } else {
        f / bound
    }
}

/// `G(t) >= (gamma - 1) n E t^2 / 2 + G'(0) t + G(0)`.
pub fn lower_bound_g(t: f64, e_total: f64, g0: f64, g0_rate: f64, params: &GasParameters) -> f64 {
    0.5 * params.internal_coefficient() * e_total * t * t + g0_rate * t + g0
}

/// Radius of a ball that contains the material volume started as `|x| <= R0`.
pub fn envelope_radius(spec: &DecayClassSpec, t: f64) -> Result<f64> {
    let av = spec.alpha[0];
    if av > 1.0 {
        return Err(Error::InvalidParameter(format!("alpha_v = {av} > 1 lies outside every decay class")));
    }
    let mv = spec
        .envelopes
        .v
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("the velocity envelope M_v is required".into()))?;
    let integral = mv.integral(t);
    if (1.0 - av).abs() < EXPONENT_TOL {
        return Ok(spec.r0 * integral.exp());
    }
    let k = 1.0 - av;
    Ok((k * integral + spec.r0.powf(k)).powf(1.0 / k))
}

/// `R(t)^2 m / 2 + M_rho(t) omega int_R^inf r^(2 + alpha_rho + n - 1) dr / 2`.
pub fn upper_bound_g(spec: &DecayClassSpec, t: f64, mass: f64, params: &GasParameters) -> Result<f64> {
    if !(spec.epsilon > 0.0) {
        return Err(Error::DivergentTail(format!("epsilon = {} must be positive", spec.epsilon)));
    }
    let tail_exp = 2.0 + spec.alpha[2] + params.n as f64;
    if tail_exp >= 0.0 {
        return Err(Error::DivergentTail(format!("density tail r^{} is not integrable against r^2", spec.alpha[2])));
    }
    let m_rho = spec
        .envelopes
        .rho
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("the density envelope M_rho is required".into()))?;
    let r = envelope_radius(spec, t)?;
    let tail = m_rho.value(t) * unit_sphere_area(params.n) * r.powf(tail_exp) / (-tail_exp);
    Ok(0.5 * r * r * mass + 0.5 * tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    ContradictionAt { t_star: f64 },
    NoContradictionOnHorizon { horizon: f64 },
}

/// Scanned lower and upper bounds on `G(t)` and the resulting verdict.
///
/// For a contradiction the trajectories stop at `t*`, the last sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub verdict: Verdict,
    pub t_grid: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl GrowthCertificate {
    pub fn t_star(&self) -> Option<f64> {
        match self.verdict {
            Verdict::ContradictionAt { t_star } => Some(t_star),
            Verdict::NoContradictionOnHorizon { .. } => None,
        }
    }
}

/// Density of the geometric time scan and the bisection tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanOptions {
    pub points_per_decade: usize,
    pub first_time: f64,
    pub rel_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { points_per_decade: 32, first_time: 1e-6, rel_tol: 1e-6 }
    }
}

/// Conserved data the bounds are built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthData {
    pub e_total: f64,
    pub g0: f64,
    pub g0_rate: f64,
    pub mass: f64,
}

/// First time on `[0, horizon]` where the quadratic lower bound on `G`
/// exceeds the class upper bound.
pub fn contradiction_time(
    spec: &DecayClassSpec,
    data: GrowthData,
    horizon: f64,
    params: &GasParameters,
    scan: ScanOptions,
) -> Result<GrowthCertificate> {
    params.validate()?;
    spec.validate(params.n)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    if !(data.e_total >= 0.0 && data.mass >= 0.0) {
        return Err(Error::InvalidParameter("energy and mass must be nonnegative".into()));
    }
    if scan.points_per_decade == 0 || !(scan.first_time > 0.0) || !(scan.rel_tol > 0.0) {
        return Err(Error::InvalidParameter(format!("invalid scan options {scan:?}")));
    }
    let lower = |t: f64| lower_bound_g(t, data.e_total, data.g0, data.g0_rate, params);
    let upper = |t: f64| upper_bound_g(spec, t, data.mass, params);

    let mut ts = vec![0.0];
    let first = scan.first_time.min(horizon);
    let decades = (horizon / first).log10();
    let steps = (decades * scan.points_per_decade as f64).ceil() as usize;
    for k in 0..=steps {
        let t = if k == steps { horizon } else { first * 10f64.powf(k as f64 / scan.points_per_decade as f64) };
        if t > ts[ts.len() - 1] {
            ts.push(t);
        }
    }

    let mut out = GrowthCertificate {
        verdict: Verdict::NoContradictionOnHorizon { horizon },
        t_grid: Vec::new(),
        lower: Vec::new(),
        upper: Vec::new(),
    };
    for (k, &t) in ts.iter().enumerate() {
        let (lo, up) = (lower(t), upper(t)?);
        if lo > up {
            let t_star = if k == 0 {
                0.0
            } else {
                let (mut a, mut b) = (ts[k - 1], t);
                while b - a > scan.rel_tol * b {
                    let mid = 0.5 * (a + b);
                    if lower(mid) > upper(mid)? {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                b
            };
            out.t_grid.push(t_star);
            out.lower.push(lower(t_star));
            out.upper.push(upper(t_star)?);
            out.verdict = Verdict::ContradictionAt { t_star };
            return Ok(out);
        }
        out.t_grid.push(t);
        out.lower.push(lo);
        out.upper.push(up);
    }
    Ok(out)
}
