pub mod bounds;
pub mod exact;
pub mod momenta;
pub mod simulate;
pub mod verify;
pub mod volume;

use std::path::{Path, PathBuf};

use genmom::snapshot::sidecar_path;
use genmom::{FlowSnapshot, GasParameters};
use serde_json::Value;

use crate::failure::Failure;
use crate::output::{digest, OutputDir, Provenance};

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Context {
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Context {
    /// Opens the output directory stamped with the hash of `resolved`.
    pub fn open(&self, command: &str, resolved: Value, inputs: Vec<(String, String)>) -> Result<OutputDir, Failure> {
        let mut tree = serde_json::Map::new();
        tree.insert("command".into(), command.into());
        tree.insert("settings".into(), resolved);
        tree.insert(
            "inputs".into(),
            serde_json::to_value(inputs.into_iter().collect::<std::collections::BTreeMap<_, _>>()).unwrap(),
        );
        OutputDir::create(&self.out_dir, Provenance::of(&Value::Object(tree)))
    }
}

pub fn require<T>(value: Option<T>, what: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Config(format!("missing required setting `{what}`")))
}

pub fn positive(value: f64, what: &str) -> Result<f64, Failure> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Failure::Config(format!("`{what}` must be positive and finite, got {value}")))
    }
}

/// Content hash of an input file, failing early when it is unreadable.
pub fn input_digest(path: &Path) -> Result<String, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(digest(&bytes, 64))
}

/// Checks that a snapshot and its sidecar exist; returns their digests.
pub fn snapshot_inputs(path: &Path) -> Result<Vec<(String, String)>, Failure> {
    let side = sidecar_path(path);
    Ok(vec![(path.display().to_string(), input_digest(path)?), (side.display().to_string(), input_digest(&side)?)])
}

pub fn read_snapshot(path: &Path) -> Result<(FlowSnapshot, GasParameters), Failure> {
    FlowSnapshot::read(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// `name:<value>` or `name:key=<value>` descriptors.
pub fn descriptor_value(text: &str, prefix: &str) -> Option<Result<f64, Failure>> {
    let rest = text.strip_prefix(prefix)?;
    Some(rest.parse::<f64>().map_err(|_| Failure::Config(format!("cannot parse number in `{text}`"))))
}

pub fn point(values: &[f64], what: &str) -> Result<[f64; 3], Failure> {
    match values {
        [x, y, z] if values.iter().all(|v| v.is_finite()) => Ok([*x, *y, *z]),
        _ => Err(Failure::Config(format!("`{what}` needs three finite coordinates, got {values:?}"))),
    }
}
