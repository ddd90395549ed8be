//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::sync::Arc;

use genmom::bounds::{contradiction_time, DecayClassSpec, Envelope, Envelopes, GrowthData, ScanOptions, Verdict};
use genmom::exact::{
    build_compatible_profiles, build_pointwise_profiles, check_compatibility, deformation_constant,
    excluding_pressure_constant, integrate_deformation, reconstruct_on_grid, CompatibilityCheck, DeformationODE,
    DeformationSolution, GaussianShape, ProfileGrid, ProfilePair,
};
use genmom::grid::unit_sphere_area;
use genmom::lagrangian::{advect, boundary_pressure_flux, MaterialVolume, UniformDeformationField};
use genmom::momenta::{g_phi, g_phi_rate, lemma1_terms, Region, WeightFunction};
use genmom::solver::{pde_residual, run, ConservedState, SolverConfig};
use genmom::{conserved, FlowSnapshot, GasParameters, RadialGrid};

type Outcome = Result<(bool, String), genmom::Error>;
type Criterion = (&'static str, fn() -> Outcome);

fn params() -> GasParameters {
    GasParameters::new(3, 5.0 / 3.0).unwrap()
}

fn gaussian_pair(cells: usize) -> ProfilePair {
    build_compatible_profiles(Arc::new(GaussianShape), ProfileGrid::new(cells, 12.0).unwrap(), &params(), 1.0).unwrap()
}

fn exact_flow(t_end: f64) -> (ProfilePair, DeformationSolution) {
    let pair = gaussian_pair(4_000);
    let ode = deformation_constant(&pair, &params()).unwrap();
    let sol = integrate_deformation(&ode, t_end, 1e-12).unwrap();
    (pair, sol)
}

/// Fixed grid wide enough for the flow on `[0, t_max]`.
fn wide_grid(pair: &ProfilePair, sol: &DeformationSolution, t_max: f64, nodes: usize) -> RadialGrid {
    let (_, b) = sol.at(t_max).unwrap();
    RadialGrid::uniform(0.0, 12.0 * pair.scale() * b.exp(), nodes).unwrap()
}

/// Classical RK4 for the deformation ODE with a fixed step.
fn rk4_oracle(k: f64, m: f64, a0: f64, t_end: f64, dt: f64) -> (f64, f64) {
    let f = |a: f64, b: f64| (-a * a + k * (-m * b).exp(), a);
    let steps = (t_end / dt).round() as usize;
    let (mut a, mut b) = (a0, 0.0);
    for _ in 0..steps {
        let (k1a, k1b) = f(a, b);
        let (k2a, k2b) = f(a + 0.5 * dt * k1a, b + 0.5 * dt * k1b);
        let (k3a, k3b) = f(a + 0.5 * dt * k2a, b + 0.5 * dt * k2b);
        let (k4a, k4b) = f(a + dt * k3a, b + dt * k3b);
        a += dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        b += dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
    }
    (a, b)
}

fn virial_identity() -> Outcome {
    let p = params();
    let pair = gaussian_pair(10_000);
    let ode = deformation_constant(&pair, &p)?;
    let sol = integrate_deformation(&ode, 1.0, 1e-12)?;
    // moving flow at t = 1, on the stretched image of the profile grid
    let (_, b) = sol.at(1.0)?;
    let grid = RadialGrid::new(pair.grid().nodes().iter().map(|r| r * b.exp()).collect())?;
    let snap = reconstruct_on_grid(&sol, &pair, grid, 1.0, &p)?;
    let t = lemma1_terms(&snap, &WeightFunction::Quadratic, Region::AllSpace, &p)?;
    let c = conserved(&snap, &p)?;
    let res = ((t.i1 + t.i2 + t.i3) - (2.0 * c.kinetic + p.internal_coefficient() * c.internal)).abs() / c.total;
    Ok((res < 1e-6, format!("relative defect {res:.3e} (< 1e-6)")))
}

fn momentum_rate() -> Outcome {
    let p = params();
    let (pair, sol) = exact_flow(2.1);
    let grid = wide_grid(&pair, &sol, 2.01, 40_001);
    let w = WeightFunction::Quadratic;
    let g_at =
        |t: f64| -> genmom::Result<f64> { g_phi(&reconstruct_on_grid(&sol, &pair, grid.clone(), t, &p)?, &w, &p) };
    let dt = 1e-3;
    let mut worst = 0.0f64;
    for t in [0.5, 1.0, 2.0] {
        let fd = (g_at(t + dt)? - g_at(t - dt)?) / (2.0 * dt);
        let rate = g_phi_rate(&reconstruct_on_grid(&sol, &pair, grid.clone(), t, &p)?, &w, &p)?;
        worst = worst.max((fd - rate).abs() / rate.abs());
    }
    Ok((worst < 1e-4, format!("max relative mismatch {worst:.3e} at t in {{0.5, 1, 2}} (< 1e-4)")))
}

fn curvature_bounds() -> Outcome {
    let p = params();
    let (pair, sol) = exact_flow(5.1);
    let grid = wide_grid(&pair, &sol, 5.01, 40_001);
    let w = WeightFunction::Quadratic;
    let g_at =
        |t: f64| -> genmom::Result<f64> { g_phi(&reconstruct_on_grid(&sol, &pair, grid.clone(), t, &p)?, &w, &p) };
    let dt = 1e-3;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..=20 {
        let t = 0.25 * k as f64;
        let g2 = if k == 0 {
            (2.0 * g_at(0.0)? - 5.0 * g_at(dt)? + 4.0 * g_at(2.0 * dt)? - g_at(3.0 * dt)?) / (dt * dt)
        } else {
            (g_at(t + dt)? - 2.0 * g_at(t)? + g_at(t - dt)?) / (dt * dt)
        };
        let e = conserved(&reconstruct_on_grid(&sol, &pair, grid.clone(), t, &p)?, &p)?.total;
        let lo = p.internal_coefficient() * e;
        let hi = 2.0 * e;
        // positive when a bound is violated, relative to E
        worst = worst.max((lo - g2) / e).max((g2 - hi) / e);
    }
    Ok((worst <= 1e-3, format!("worst violation {worst:.3e} relative to E on t in [0, 5] (<= 1e-3)")))
}

fn riccati_case() -> Outcome {
    let sol = integrate_deformation(&DeformationODE::new(0.0, 4.0, 1.0)?, 10.0, 1e-10)?;
    let mut worst = 0.0f64;
    for k in 0..=10_000 {
        let t = 1e-3 * k as f64;
        let (a, _) = sol.at(t)?;
        worst = worst.max((a - 1.0 / (1.0 + t)).abs());
    }
    for (t, a) in sol.t().iter().zip(sol.a()) {
        worst = worst.max((a - 1.0 / (1.0 + t)).abs());
    }
    Ok((worst < 1e-8, format!("max |a - 1/(1+t)| = {worst:.3e} (< 1e-8)")))
}

fn decay_rate() -> Outcome {
    let ode = DeformationODE::new(1.0, 4.0, 0.0)?;
    let sol = integrate_deformation(&ode, 1e4, 1e-10)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..=900 {
        let t = 1e3 + 10.0 * k as f64;
        let (a, _) = sol.at(t)?;
        lo = lo.min(t * a);
        hi = hi.max(t * a);
    }
    let (a_ref, _) = rk4_oracle(1.0, 4.0, 0.0, 10.0, 1e-5);
    let (a10, _) = sol.at(10.0)?;
    let agree = (a10 - a_ref).abs() / a_ref.abs();
    let ok = lo >= 0.9 && hi <= 1.1 && agree < 1e-6;
    Ok((ok, format!("t a(t) in [{lo:.6}, {hi:.6}] on [1e3, 1e4]; RK4 agreement at t=10: {agree:.3e}")))
}

fn compatibility() -> Outcome {
    let p = params();
    let pair = gaussian_pair(4_000);
    let res = check_compatibility(&pair, &p, CompatibilityCheck::MassMomentum)?;
    // closed form for the Gaussian template exp(-u^2/2) in three dimensions:
    // K1 = n (gamma-1) E_i / (2 G) = (3/2) pi^(3/2) sqrt(2) s
    let closed = 1.5 * PI.powf(1.5) * 2f64.sqrt() * pair.scale();
    let ode = deformation_constant(&pair, &p)?;
    let sol = integrate_deformation(&ode, 0.1, 1e-12)?;
    let grid = wide_grid(&pair, &sol, 0.01, 20_001);
    let g_at = |t: f64| -> genmom::Result<f64> {
        g_phi(&reconstruct_on_grid(&sol, &pair, grid.clone(), t, &p)?, &WeightFunction::Quadratic, &p)
    };
    // G'' = 2 G (a' + 2 a^2) and a(0) = 0
    let dt = 1e-3;
    let g2 = (2.0 * g_at(0.0)? - 5.0 * g_at(dt)? + 4.0 * g_at(2.0 * dt)? - g_at(3.0 * dt)?) / (dt * dt);
    let a_prime = g2 / (2.0 * g_at(0.0)?);
    let mismatch = (a_prime - closed).abs() / closed;
    let ok = res < 1e-6 && mismatch < 1e-4 && (ode.forcing - closed).abs() < 1e-4 * closed;
    Ok((ok, format!("residual {res:.3e} (< 1e-6); a'(0) from G'' {a_prime:.8} vs closed-form K1 {closed:.8}: {mismatch:.3e} (< 1e-4)")))
}

fn pde_certificate() -> Outcome {
    let p = params();
    let (pair, sol) = exact_flow(1.5);
    let residual = |h: f64| -> genmom::Result<f64> {
        let r_max = 6.0;
        let grid = RadialGrid::uniform(0.0, r_max, (r_max / h).round() as usize + 1)?;
        let series = (0..5)
            .map(|k| reconstruct_on_grid(&sol, &pair, grid.clone(), 1.0 + (k as f64 - 2.0) * h, &p))
            .collect::<genmom::Result<Vec<FlowSnapshot>>>()?;
        Ok(pde_residual(&series, &p)?.max)
    };
    let coarse = residual(0.02)?;
    let fine = residual(0.01)?;
    let ratio = coarse / fine;
    Ok(((3.0..=5.0).contains(&ratio), format!("residual {coarse:.3e} -> {fine:.3e}, ratio {ratio:.3} (in [3, 5])")))
}

fn solver_cross_check() -> Outcome {
    let p = params();
    let pair = build_pointwise_profiles(Arc::new(GaussianShape), 1.0, ProfileGrid::new(4_000, 12.0)?, &p, 1.0)?;
    let ode = deformation_constant(&pair, &p)?;
    let sol = integrate_deformation(&ode, 0.6, 1e-12)?;
    let r_max = 6.0;
    let mut errors = Vec::new();
    let mut drift = 0.0f64;
    for cells in [100, 200, 400] {
        let s0 = ConservedState::from_fn(cells, r_max, 0.0, &p, |r| pair.rho0_at(r), |_| 0.0, |r| pair.p0_at(r))?;
        let out = run(s0, 0.5, None, &SolverConfig::default(), &p)?;
        drift = drift.max(out.mass_drift());
        let fin = &out.final_state;
        let exact = reconstruct_on_grid(&sol, &pair, fin.centers().clone(), 0.5, &p)?;
        let l1: f64 = (0..cells).map(|i| (fin.rho[i] - exact.rho()[i]).abs() * fin.volumes()[i]).sum::<f64>()
            * unit_sphere_area(3);
        errors.push(l1);
    }
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ok = orders.iter().all(|&o| o >= 0.8) && drift < 1e-10;
    Ok((
        ok,
        format!(
            "L1 errors {:.3e}, {:.3e}, {:.3e}; orders {:.3}, {:.3} (>= 0.8); mass drift {drift:.3e} (< 1e-10)",
            errors[0], errors[1], errors[2], orders[0], orders[1]
        ),
    ))
}

fn growth_certificate() -> Outcome {
    let p = params();
    let data = GrowthData { e_total: 1.0, g0: 1.0, g0_rate: 0.0, mass: 1.0 };
    let spec = |mv: Envelope, mrho: Envelope| {
        DecayClassSpec::ns0(3, 1.0, 1.0, 0.0)
            .map(|s| s.with_envelopes(Envelopes { v: Some(mv), rho: Some(mrho), ..Default::default() }))
    };
    let flat = spec(Envelope::constant(1.0), Envelope::constant(1.0))?;
    let base = contradiction_time(&flat, data, 1e6, &p, ScanOptions::default())?;
    let dense = contradiction_time(&flat, data, 1e6, &p, ScanOptions { points_per_decade: 64, ..Default::default() })?;
    let (Some(t1), Some(t2)) = (base.t_star(), dense.t_star()) else {
        return Ok((false, "constant envelopes produced no contradiction".into()));
    };
    let stable = (t1 - t2).abs() / t1;
    // alpha_v = -3: int M_v = (1+t)^(4.1) - 1 and M_rho = (1+t)^3
    let fast = spec(Envelope::power(4.1, 3.1), Envelope::power(1.0, 3.0))?;
    let cert = contradiction_time(&fast, data, 1e6, &p, ScanOptions::default())?;
    let none = matches!(cert.verdict, Verdict::NoContradictionOnHorizon { .. });
    Ok((
        t1.is_finite() && stable < 1e-4 && none,
        format!("t* = {t1:.8} (refined {t2:.8}, change {stable:.2e} < 1e-4); growing envelopes: no contradiction to 1e6 = {none}"),
    ))
}

fn lagrangian_consistency() -> Outcome {
    let (_, sol) = exact_flow(1.1);
    let field = UniformDeformationField { solution: &sol };
    let v0 = MaterialVolume::sphere([0.7, -0.2, 0.4], 0.5, 8, 16)?;
    let mut v = v0.clone();
    for _ in 0..1000 {
        v = advect(&v, &field, 1e-3)?;
    }
    let (_, b) = sol.at(v.t)?;
    let mut worst = 0.0f64;
    for (x, x0) in v.points().iter().zip(v0.points()) {
        let want = [x0[0] * b.exp(), x0[1] * b.exp(), x0[2] * b.exp()];
        let err = ((x[0] - want[0]).powi(2) + (x[1] - want[1]).powi(2) + (x[2] - want[2]).powi(2)).sqrt();
        worst = worst.max(err / (want[0].powi(2) + want[1].powi(2) + want[2].powi(2)).sqrt());
    }
    let line = MaterialVolume::interval(1.0, 3.0)?;
    let flux1 = boundary_pressure_flux(&line, &|_| 2.5, &[-1.0, 0.0, 0.0])?;
    let ball = MaterialVolume::sphere([3.0, 0.0, 0.0], 1.0, 64, 128)?;
    let flux3 = boundary_pressure_flux(&ball, &|_| 1.0, &[0.0; 3])?;
    // divergence theorem: (n-1) int_V |x - x0|^-1 dV = 8 pi / 9
    let oracle = 8.0 * PI / 9.0;
    let dev = (flux3 - oracle).abs() / oracle;
    let ok = worst < 1e-6 && flux1 == 0.0 && dev < 0.02;
    Ok((ok, format!("particle error {worst:.3e} (< 1e-6); 1-D flux {flux1}; sphere flux {flux3:.5} vs {oracle:.5} ({dev:.2e} < 2e-2)")))
}

fn construction_paths_agree() -> Outcome {
    let p = params();
    let pair = gaussian_pair(4_000);
    let k1 = deformation_constant(&pair, &p)?;
    let w = WeightFunction::power(3, 0.05 * pair.scale())?;
    let g_phi0 = g_phi(&pair.snapshot(0.0)?, &w, &p)?;
    let d = unit_sphere_area(3);
    // origin pressure for which K2 = p G_phi / omega equals K1, adjusted to the last bit
    let mut p_origin = k1.forcing * d / g_phi0;
    let mut k2 = excluding_pressure_constant(p_origin, g_phi0, &p)?;
    for _ in 0..64 {
        if k2.forcing == k1.forcing {
            break;
        }
        p_origin = if k2.forcing < k1.forcing { p_origin.next_up() } else { p_origin.next_down() };
        k2 = excluding_pressure_constant(p_origin, g_phi0, &p)?;
    }
    if k2 != k1 {
        return Ok((false, format!("could not match K2 = {} to K1 = {}", k2.forcing, k1.forcing)));
    }
    let a = integrate_deformation(&k1, 10.0, 1e-10)?;
    let b = integrate_deformation(&k2, 10.0, 1e-10)?;
    let same = a.t().len() == b.t().len()
        && a.t().iter().zip(b.t()).all(|(x, y)| x.to_bits() == y.to_bits())
        && a.a().iter().zip(b.a()).all(|(x, y)| x.to_bits() == y.to_bits())
        && a.b().iter().zip(b.b()).all(|(x, y)| x.to_bits() == y.to_bits());
    Ok((same, format!("K = {}; {} accepted steps, bitwise identical = {same}", k1.forcing, a.t().len())))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("virial identity on the Gaussian configuration", virial_identity),
        ("first derivative of G along the exact flow", momentum_rate),
        ("curvature bounds on G along the exact flow", curvature_bounds),
        ("deformation ODE, Riccati case", riccati_case),
        ("deformation ODE, O(1/t) decay", decay_rate),
        ("compatible profiles and forcing constant", compatibility),
        ("reconstruction solves the PDE to second order", pde_certificate),
        ("finite-volume solver against the exact flow", solver_cross_check),
        ("growth certificate", growth_certificate),
        ("material volume tracking and boundary flux", lagrangian_consistency),
        ("two forcing constructions give one trajectory", construction_paths_agree),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {detail} [{:.1}s]",
            k + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
