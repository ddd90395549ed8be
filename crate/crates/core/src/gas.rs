//! Polytropic gas parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::unit_sphere_area;

/// Space dimension, equation of state and transport coefficients.
///
/// With `mu = lambda_visc = k_heat = 0` the parameters describe the
/// inviscid gas-dynamics regime; otherwise Navier-Stokes. Only the
/// inviscid regime is ever time-integrated by this crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasParameters {
    pub n: usize,
    pub gamma: f64,
    #[serde(default = "default_r_gas")]
    pub r_gas: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default)]
    pub lambda_visc: f64,
    #[serde(default)]
    pub k_heat: f64,
}

fn default_r_gas() -> f64 {
    1.0
}

impl GasParameters {
    /// Inviscid, non-conducting gas with `R = 1`.
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        Self { n, gamma, r_gas: 1.0, mu: 0.0, lambda_visc: 0.0, k_heat: 0.0 }.validated()
    }

    pub fn with_transport(mut self, mu: f64, lambda_visc: f64, k_heat: f64) -> Result<Self> {
        self.mu = mu;
        self.lambda_visc = lambda_visc;
        self.k_heat = k_heat;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("space dimension must be >= 1".into()));
        }
        if !(self.gamma.is_finite() && self.gamma > 1.0) {
            return Err(Error::InvalidParameter(format!("gamma must exceed 1, got {}", self.gamma)));
        }
        if !(self.r_gas.is_finite() && self.r_gas > 0.0) {
            return Err(Error::InvalidParameter(format!("gas constant must be positive, got {}", self.r_gas)));
        }
        if !(self.mu >= 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be >= 0, got {}", self.mu)));
        }
        if !(self.lambda_visc + 2.0 / self.n as f64 * self.mu >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda + (2/n) mu must be >= 0, got lambda = {}",
                self.lambda_visc
            )));
        }
        if !(self.k_heat >= 0.0) {
            return Err(Error::InvalidParameter(format!("heat conduction must be >= 0, got {}", self.k_heat)));
        }
        Ok(())
    }

    /// True for the inviscid, non-conducting regime.
    pub fn is_gas_dynamics(&self) -> bool {
        self.mu == 0.0 && self.lambda_visc == 0.0 && self.k_heat == 0.0
    }

    /// Surface area of the unit sphere in `n` dimensions.
    pub fn sphere_area(&self) -> f64 {
        unit_sphere_area(self.n)
    }

    /// `n (gamma - 1)`, the internal-energy coefficient of the virial identity.
    pub fn internal_coefficient(&self) -> f64 {
        self.n as f64 * (self.gamma - 1.0)
    }

    /// `(gamma - 1) n + 2`.
    pub fn deformation_exponent(&self) -> f64 {
        (self.gamma - 1.0) * self.n as f64 + 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_gamma() {
        assert!(GasParameters::new(3, 1.0).is_err());
        assert!(GasParameters::new(3, 0.5).is_err());
        assert!(GasParameters::new(3, f64::NAN).is_err());
        assert!(GasParameters::new(0, 1.4).is_err());
    }

    #[test]
    fn viscosity_constraint() {
        let p = GasParameters::new(3, 1.4).unwrap();
        assert!(p.with_transport(1.0, -2.0 / 3.0, 0.0).is_ok());
        assert!(p.with_transport(1.0, -0.7, 0.0).is_err());
        assert!(p.with_transport(-1.0, 0.0, 0.0).is_err());
        assert!(p.with_transport(0.0, 0.0, -1.0).is_err());
        assert!(!p.with_transport(0.1, 0.0, 0.0).unwrap().is_gas_dynamics());
        assert!(p.is_gas_dynamics());
    }

    #[test]
    fn virial_coefficients() {
        let p = GasParameters::new(3, 5.0 / 3.0).unwrap();
        assert!((p.internal_coefficient() - 2.0).abs() < 1e-15);
        assert!((p.deformation_exponent() - 4.0).abs() < 1e-15);
    }
}
