//! Pressure profile templates.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::derivative;

/// A radial pressure template `u -> shape(u)`, even in `u`.
pub trait PressureShape: Send + Sync + fmt::Debug {
    fn value(&self, u: f64) -> f64;

    /// `d shape / du`; five-point central difference unless overridden.
    fn slope(&self, u: f64) -> f64 {
        let h = 1e-3 * u.abs().max(1.0);
        (self.value(u - 2.0 * h) - 8.0 * self.value(u - h) + 8.0 * self.value(u + h) - self.value(u + 2.0 * h))
            / (12.0 * h)
    }

    /// `shape'(u) / u`, continued to `shape''(0)` at the origin.
    fn slope_over_u(&self, u: f64) -> f64 {
        if u.abs() > 1e-4 {
            self.slope(u) / u
        } else {
            let h = 1e-2;
            (-self.value(2.0 * h) + 16.0 * self.value(h) - 30.0 * self.value(0.0) + 16.0 * self.value(-h)
                - self.value(-2.0 * h))
                / (12.0 * h * h)
        }
    }

    fn name(&self) -> String;
}

/// `exp(-u^2 / 2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianShape;

impl PressureShape for GaussianShape {
    fn value(&self, u: f64) -> f64 {
        (-0.5 * u * u).exp()
    }
    fn slope(&self, u: f64) -> f64 {
        -u * (-0.5 * u * u).exp()
    }
    fn slope_over_u(&self, u: f64) -> f64 {
        -(-0.5 * u * u).exp()
    }
    fn name(&self) -> String {
        "gaussian".into()
    }
}

/// Tabulated template, cubic Hermite between nodes, zero beyond the last node.
#[derive(Debug, Clone)]
pub struct TabulatedShape {
    u: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl TabulatedShape {
    pub fn new(u: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if u.len() < 5 || u.len() != values.len() {
            return Err(Error::InvalidShape(format!(
                "tabulated shape needs >= 5 matching (u, value) pairs, got {} and {}",
                u.len(),
                values.len()
            )));
        }
        if u[0] < 0.0 || u.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidShape("tabulated abscissae must be >= 0 and strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidShape("tabulated values must be finite".into()));
        }
        let mut slopes = derivative(&u, &values);
        if u[0] == 0.0 {
            slopes[0] = 0.0;
        }
        Ok(Self { u, values, slopes })
    }

    /// Reads `r,p` (or any two-column) CSV with a header line.
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let (mut u, mut v) = (vec![], vec![]);
        for (line, rec) in rdr.deserialize::<(f64, f64)>().enumerate() {
            let (a, b) = rec.map_err(|e| Error::InvalidShape(format!("row {}: {e}", line + 1)))?;
            u.push(a);
            v.push(b);
        }
        Self::new(u, v)
    }
}

impl PressureShape for TabulatedShape {
    fn value(&self, u: f64) -> f64 {
        let u = u.abs();
        let last = self.u.len() - 1;
        if u > self.u[last] {
            return 0.0;
        }
        if u <= self.u[0] {
            return self.values[0];
        }
        let j = self.u.partition_point(|&x| x < u).max(1);
        let (x0, x1) = (self.u[j - 1], self.u[j]);
        let h = x1 - x0;
        let s = (u - x0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.values[j - 1] + h10 * h * self.slopes[j - 1] + h01 * self.values[j] + h11 * h * self.slopes[j]
    }

    fn name(&self) -> String {
        format!("tabulated({} nodes)", self.u.len())
    }
}
