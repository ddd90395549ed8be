//! Radial grids and the quadrature kernels every functional is built on.
//!
//! Under radial symmetry an integral over all of space reduces to
//! `omega_{n-1} * int f(r) r^{n-1} dr`. The radial integral uses the
//! composite trapezoid rule on the (possibly nonuniform) node set, with
//! pairwise summation so results do not depend on evaluation order.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gas::GasParameters;

/// Relative size of the outermost integrand sample, compared to the peak,
/// above which truncation at `r_max` is reported.
pub const TAIL_WARNING_RATIO: f64 = 1e-12;

/// Strictly increasing radii, `r[0] >= 0`, at least two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.len() < 2 {
            return Err(Error::InvalidInput(format!("radial grid needs at least 2 nodes, got {}", r.len())));
        }
        for (i, &ri) in r.iter().enumerate() {
            if !ri.is_finite() {
                return Err(Error::NonFinite { index: i, r: ri });
            }
        }
        if r[0] < 0.0 {
            return Err(Error::InvalidInput(format!("first radius is negative: {}", r[0])));
        }
        if let Some(i) = r.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(format!(
                "radii not strictly increasing at node {}: {} then {}",
                i + 1,
                r[i],
                r[i + 1]
            )));
        }
        Ok(Self { r })
    }

    /// `nodes` equally spaced radii on `[r_min, r_max]`, endpoints included.
    pub fn uniform(r_min: f64, r_max: f64, nodes: usize) -> Result<Self> {
        if nodes < 2 || !(r_max > r_min) {
            return Err(Error::InvalidInput(format!(
                "uniform grid needs nodes >= 2 and r_max > r_min (got {nodes}, [{r_min}, {r_max}])"
            )));
        }
        let h = (r_max - r_min) / (nodes - 1) as f64;
        let mut r: Vec<f64> = (0..nodes).map(|i| r_min + h * i as f64).collect();
        r[nodes - 1] = r_max;
        Self::new(r)
    }

    /// Centers of `cells` equal cells covering `[0, r_max]`.
    pub fn cell_centers(r_max: f64, cells: usize) -> Result<Self> {
        if cells < 2 || !(r_max > 0.0) {
            return Err(Error::InvalidInput(format!(
                "cell-centred grid needs cells >= 2 and r_max > 0 (got {cells}, {r_max})"
            )));
        }
        let h = r_max / cells as f64;
        Self::new((0..cells).map(|i| (i as f64 + 0.5) * h).collect())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.r[0]
    }

    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    /// Spacing if the grid is uniform to relative `1e-9`, else `None`.
    pub fn uniform_spacing(&self) -> Option<f64> {
        let h = (self.r_max() - self.r_min()) / (self.len() - 1) as f64;
        self.r.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h).then_some(h)
    }

    /// Fourth-order derivative of nodal samples, from five-point
    /// stencils (one-sided near the ends).
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        derivative(&self.r, f)
    }

    /// Piecewise-linear interpolation of nodal samples; `None` outside the grid.
    pub fn interpolate(&self, f: &[f64], x: f64) -> Option<f64> {
        interpolate(&self.r, f, x)
    }
}

/// Pairwise (cascade) summation with a fixed split, independent of any
/// parallel schedule.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Composite trapezoid rule for `int f dr` over the nodes `r`.
pub fn trapezoid(r: &[f64], f: &[f64]) -> f64 {
    debug_assert_eq!(r.len(), f.len());
    let panels: Vec<f64> =
        r.windows(2).zip(f.windows(2)).map(|(rw, fw)| 0.5 * (fw[0] + fw[1]) * (rw[1] - rw[0])).collect();
    pairwise_sum(&panels)
}

/// `omega_{n-1} * int f(r) r^{n-1} dr` by the trapezoid rule, without
/// input validation. The building block for every functional.
pub fn radial_quadrature(r: &[f64], f: &[f64], n: usize) -> f64 {
    let weighted: Vec<f64> = r.iter().zip(f).map(|(&ri, &fi)| fi * radial_jacobian(ri, n)).collect();
    unit_sphere_area(n) * trapezoid(r, &weighted)
}

/// `r^{n-1}`, with `0^0 = 1`.
#[inline]
pub fn radial_jacobian(r: f64, n: usize) -> f64 {
    match n {
        1 => 1.0,
        2 => r,
        3 => r * r,
        _ => r.powi(n as i32 - 1),
    }
}

/// Integral over `R^n` of a radial function sampled on `grid`.
pub fn integrate_radial(grid: &RadialGrid, f: &[f64], params: &GasParameters) -> Result<f64> {
    if f.len() != grid.len() {
        return Err(Error::InvalidInput(format!("sample count {} does not match grid length {}", f.len(), grid.len())));
    }
    if let Some(i) = f.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index: i, r: grid.r[i] });
    }
    warn_on_tail(grid.nodes(), f, params.n);
    Ok(radial_quadrature(grid.nodes(), f, params.n))
}

pub(crate) fn warn_on_tail(r: &[f64], f: &[f64], n: usize) {
    let peak = r.iter().zip(f).map(|(&ri, &fi)| (fi * radial_jacobian(ri, n)).abs()).fold(0.0, f64::max);
    let last = r.len() - 1;
    let tail = (f[last] * radial_jacobian(r[last], n)).abs();
    if peak > 0.0 && tail > TAIL_WARNING_RATIO * peak {
        log::warn!(
            "integrand at r_max = {} is {:.3e} of its peak; the truncation may be too short",
            r[last],
            tail / peak
        );
    }
}

/// Surface area of the unit sphere in `R^n`: `2 pi^{n/2} / Gamma(n/2)`.
pub fn unit_sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// `Gamma(n / 2)` for integer `n >= 1`.
fn gamma_half(n: usize) -> f64 {
    if n <= 12 {
        if n.is_multiple_of(2) {
            // (n/2 - 1)!
            (1..n / 2).map(|k| k as f64).product()
        } else {
            // Gamma(k + 1/2) = (2k)! / (4^k k!) sqrt(pi), with k = (n - 1) / 2
            let k = (n - 1) / 2;
            let mut g = PI.sqrt();
            for j in 0..k {
                g *= j as f64 + 0.5;
            }
            g
        }
    } else {
        lanczos_gamma(n as f64 / 2.0)
    }
}

/// Lanczos approximation (g = 7, nine terms), valid for `x >= 0.5`.
fn lanczos_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Finite-difference weights for derivatives `0..=m` at `x0` on the
/// stencil `xs` (Fornberg's recursion). Returns `w[k][j]`.
pub fn fornberg_weights(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let np = xs.len();
    let mut w = vec![vec![0.0; np]; m + 1];
    w[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..np {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    w[k][i] = c1 * (k as f64 * w[k - 1][i - 1] - c5 * w[k][i - 1]) / c2;
                }
                w[0][i] = -c1 * c5 * w[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                w[k][j] = (c4 * w[k][j] - k as f64 * w[k - 1][j]) / c3;
            }
            w[0][j] = c4 * w[0][j] / c3;
        }
        c1 = c2;
    }
    w
}

/// First derivative of samples `f` on nodes `r` using five-point stencils.
pub fn derivative(r: &[f64], f: &[f64]) -> Vec<f64> {
    let len = r.len();
    let width = len.min(5);
    (0..len)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(len - width);
            let stencil = &r[start..start + width];
            let w = fornberg_weights(r[i], stencil, 1);
            w[1].iter().zip(&f[start..start + width]).map(|(wi, fi)| wi * fi).sum()
        })
        .collect()
}

/// Piecewise-linear interpolation; `None` outside `[r[0], r[last]]`.
pub fn interpolate(r: &[f64], f: &[f64], x: f64) -> Option<f64> {
    let last = r.len() - 1;
    if !(x >= r[0] && x <= r[last]) {
        return None;
    }
    let j = match r.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(j) => return Some(f[j]),
        Err(j) => j,
    };
    let (r0, r1) = (r[j - 1], r[j]);
    let s = (x - r0) / (r1 - r0);
    Some(f[j - 1] + s * (f[j] - f[j - 1]))
}

/// Window radii, resampled fields and source node indices.
type Clipped = (Vec<f64>, Vec<Vec<f64>>, Vec<Option<usize>>);

/// Nodes of `r` strictly inside `(lo, hi)` plus the endpoints themselves,
/// with every field linearly interpolated onto the endpoints.
///
/// Returns the window radii, the resampled fields and the original node
/// index of every window point (`None` for inserted endpoints).
pub(crate) fn window(r: &[f64], fields: &[&[f64]], lo: f64, hi: f64) -> Result<Clipped> {
    let last = r.len() - 1;
    if !(lo >= r[0] - 1e-12 * r[last].abs().max(1.0) && hi <= r[last] * (1.0 + 1e-12) && lo < hi) {
        return Err(Error::InsufficientDomain(format!(
            "integration window [{lo}, {hi}] not inside grid [{}, {}]",
            r[0], r[last]
        )));
    }
    let lo = lo.max(r[0]);
    let hi = hi.min(r[last]);
    let tol = 1e-12 * hi.abs().max(1.0);
    let mut rs = Vec::new();
    let mut idx = Vec::new();
    let mut out: Vec<Vec<f64>> = vec![Vec::new(); fields.len()];

    let push_interp = |x: f64, rs: &mut Vec<f64>, idx: &mut Vec<Option<usize>>, out: &mut Vec<Vec<f64>>| {
        rs.push(x);
        idx.push(None);
        for (o, f) in out.iter_mut().zip(fields) {
            o.push(interpolate(r, f, x).unwrap_or(f64::NAN));
        }
    };

    let first_inside = r.iter().position(|&x| x > lo + tol).unwrap_or(r.len());
    let starts_on_node = first_inside > 0 && (r[first_inside - 1] - lo).abs() <= tol;
    if starts_on_node {
        let j = first_inside - 1;
        rs.push(r[j]);
        idx.push(Some(j));
        for (o, f) in out.iter_mut().zip(fields) {
            o.push(f[j]);
        }
    } else {
        push_interp(lo, &mut rs, &mut idx, &mut out);
    }
    for j in first_inside..r.len() {
        if r[j] >= hi - tol {
            break;
        }
        rs.push(r[j]);
        idx.push(Some(j));
        for (o, f) in out.iter_mut().zip(fields) {
            o.push(f[j]);
        }
    }
    match r.iter().position(|&x| (x - hi).abs() <= tol) {
        Some(j) => {
            rs.push(r[j]);
            idx.push(Some(j));
            for (o, f) in out.iter_mut().zip(fields) {
                o.push(f[j]);
            }
        }
        None => push_interp(hi, &mut rs, &mut idx, &mut out),
    }
    Ok((rs, out, idx))
}
