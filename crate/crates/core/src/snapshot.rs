//! Radial flow snapshots, conserved functionals and the snapshot file format.
//!
//! A snapshot file is a CSV with header `r,rho,v,p` (one row per grid node)
//! plus a sidecar JSON record `{ "t": .., "n": .., "gamma": .. }` with an
//! optional string map `meta`. Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::GasParameters;
use crate::grid::{radial_quadrature, warn_on_tail, RadialGrid};

/// Density, radial velocity and pressure sampled on a radial grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSnapshot {
    grid: RadialGrid,
    rho: Vec<f64>,
    v: Vec<f64>,
    p: Vec<f64>,
    t: f64,
}

impl FlowSnapshot {
    pub fn new(grid: RadialGrid, rho: Vec<f64>, v: Vec<f64>, p: Vec<f64>, t: f64) -> Result<Self> {
        let len = grid.len();
        for (name, field) in [("rho", &rho), ("v", &v), ("p", &p)] {
            if field.len() != len {
                return Err(Error::InvalidInput(format!("{name} has {} samples, grid has {len}", field.len())));
            }
            if let Some(i) = field.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { index: i, r: grid.nodes()[i] });
            }
        }
        for (name, field) in [("rho", &rho), ("p", &p)] {
            if let Some(i) = field.iter().position(|&x| x < 0.0) {
                return Err(Error::InvalidInput(format!("{name} is negative at node {i} (r = {})", grid.nodes()[i])));
            }
        }
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("snapshot time is not finite: {t}")));
        }
        Ok(Self { grid, rho, v, p, t })
    }

    /// Builds a snapshot by evaluating closures at every node.
    pub fn from_fn(
        grid: RadialGrid,
        t: f64,
        rho: impl Fn(f64) -> f64,
        v: impl Fn(f64) -> f64,
        p: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let r = grid.nodes();
        let rho_s = r.iter().map(|&x| rho(x)).collect();
        let v_s = r.iter().map(|&x| v(x)).collect();
        let p_s = r.iter().map(|&x| p(x)).collect();
        Self::new(grid, rho_s, v_s, p_s, t)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    pub fn r(&self) -> &[f64] {
        self.grid.nodes()
    }
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }
    pub fn v(&self) -> &[f64] {
        &self.v
    }
    pub fn p(&self) -> &[f64] {
        &self.p
    }
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// Specific internal energy `p / ((gamma - 1) rho)`; `None` where `rho = 0`.
    pub fn internal_energy(&self, params: &GasParameters) -> Vec<Option<f64>> {
        self.rho.iter().zip(&self.p).map(|(&rho, &p)| (rho > 0.0).then(|| p / ((params.gamma - 1.0) * rho))).collect()
    }

    /// Temperature `p / (R rho)`; `None` where `rho = 0`.
    pub fn temperature(&self, params: &GasParameters) -> Vec<Option<f64>> {
        self.rho.iter().zip(&self.p).map(|(&rho, &p)| (rho > 0.0).then(|| p / (params.r_gas * rho))).collect()
    }

    /// Writes `<path>` (CSV) and the sidecar next to it (`<stem>.json`).
    pub fn write(&self, path: &Path, params: &GasParameters, header_comment: Option<&str>) -> Result<()> {
        fs::write(path, self.to_csv(header_comment))?;
        let meta = SnapshotMeta { t: self.t, n: params.n, gamma: params.gamma, meta: None };
        fs::write(sidecar_path(path), serde_json::to_string(&meta)? + "\n")?;
        Ok(())
    }

    pub fn to_csv(&self, header_comment: Option<&str>) -> String {
        let mut out = Vec::new();
        if let Some(c) = header_comment {
            writeln!(out, "# {c}").unwrap();
        }
        writeln!(out, "r,rho,v,p").unwrap();
        for i in 0..self.grid.len() {
            writeln!(out, "{:?},{:?},{:?},{:?}", self.grid.nodes()[i], self.rho[i], self.v[i], self.p[i]).unwrap();
        }
        String::from_utf8(out).unwrap()
    }

    /// Reads a snapshot CSV and its sidecar. Returns the snapshot and the
    /// gas parameters recorded in the sidecar.
    pub fn read(path: &Path) -> Result<(Self, GasParameters)> {
        let meta: SnapshotMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
        let params = GasParameters::new(meta.n, meta.gamma)?;
        let snap = Self::from_csv(fs::read(path)?.as_slice(), meta.t)?;
        Ok((snap, params))
    }

    pub fn from_csv<R: std::io::Read>(reader: R, t: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["r", "rho", "v", "p"] {
            return Err(Error::InvalidInput(format!(
                "snapshot header must be `r,rho,v,p`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let (mut r, mut rho, mut v, mut p) = (vec![], vec![], vec![], vec![]);
        for (line, rec) in rdr.deserialize::<(f64, f64, f64, f64)>().enumerate() {
            let (ri, rhoi, vi, pi) = rec.map_err(|e| Error::InvalidInput(format!("snapshot row {}: {e}", line + 1)))?;
            r.push(ri);
            rho.push(rhoi);
            v.push(vi);
            p.push(pi);
        }
        Self::new(RadialGrid::new(r)?, rho, v, p, t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotMeta {
    pub t: f64,
    pub n: usize,
    pub gamma: f64,
    /// Free-form provenance written by tools (version, config hash).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<BTreeMap<String, String>>,
}

/// `foo/bar.csv` -> `foo/bar.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Mass, radial momentum and energies of a snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedReport {
    pub mass: f64,
    pub momentum: f64,
    pub kinetic: f64,
    pub internal: f64,
    pub total: f64,
}

/// `m = int rho`, `P = int rho v`, `E_k = 1/2 int rho v^2`,
/// `E_i = int p / (gamma - 1)`, `E = E_k + E_i`.
pub fn conserved(snapshot: &FlowSnapshot, params: &GasParameters) -> Result<ConservedReport> {
    params.validate()?;
    let r = snapshot.r();
    let n = params.n;
    let rho = snapshot.rho();
    let v = snapshot.v();
    warn_on_tail(r, rho, n);
    let mom: Vec<f64> = rho.iter().zip(v).map(|(a, b)| a * b).collect();
    let kin: Vec<f64> = rho.iter().zip(v).map(|(a, b)| 0.5 * a * b * b).collect();
    let int: Vec<f64> = snapshot.p().iter().map(|p| p / (params.gamma - 1.0)).collect();
    let kinetic = radial_quadrature(r, &kin, n);
    let internal = radial_quadrature(r, &int, n);
    Ok(ConservedReport {
        mass: radial_quadrature(r, rho, n),
        momentum: radial_quadrature(r, &mom, n),
        kinetic,
        internal,
        total: kinetic + internal,
    })
}
