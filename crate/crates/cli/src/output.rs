//! Output directory with atomic writes and provenance headers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use genmom::snapshot::{sidecar_path, SnapshotMeta};
use genmom::{FlowSnapshot, GasParameters};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::failure::Failure;

pub const TOOL: &str = "genmom";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex prefix of the SHA-256 of `bytes`.
pub fn digest(bytes: &[u8], chars: usize) -> String {
    let hash = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for b in hash.iter() {
        write!(hex, "{b:02x}").unwrap();
    }
    hex.truncate(chars);
    hex
}

/// Version and configuration hash stamped on every artifact.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub config_hash: String,
}

impl Provenance {
    /// Hashes the canonical (sorted-key) JSON of the resolved settings.
    pub fn of(resolved: &Value) -> Self {
        let canonical = serde_json::to_string(resolved).expect("settings serialize");
        Self { config_hash: digest(canonical.as_bytes(), 16) }
    }

    pub fn header(&self) -> String {
        format!("{TOOL} {VERSION} config={}", self.config_hash)
    }

    pub fn meta(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("tool".to_string(), TOOL.to_string()),
            ("version".to_string(), VERSION.to_string()),
            ("config".to_string(), self.config_hash.clone()),
        ])
    }
}

/// Writes artifacts into one directory; each file goes through a temp file
/// in the same directory and is renamed into place.
pub struct OutputDir {
    root: PathBuf,
    provenance: Provenance,
}

impl OutputDir {
    pub fn create(root: &Path, provenance: Provenance) -> Result<Self, Failure> {
        std::fs::create_dir_all(root)
            .map_err(|e| Failure::Config(format!("cannot create output directory {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf(), provenance })
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
        let path = self.root.join(name);
        let io = |e: std::io::Error| Failure::Compute(format!("writing {}: {e}", path.display()));
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root).map_err(io)?;
        tmp.write_all(bytes).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644)).map_err(io)?;
        }
        tmp.persist(&path).map_err(|e| io(e.error))?;
        Ok(path)
    }

    /// CSV with a `# genmom <version> config=<hash>` first line. Floats use
    /// the shortest representation that round-trips (exponent form for very
    /// small or large magnitudes).
    pub fn write_csv(&mut self, name: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf, Failure> {
        let mut out = String::new();
        writeln!(out, "# {}", self.provenance.header()).unwrap();
        writeln!(out, "{}", columns.join(",")).unwrap();
        for row in rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        self.write_bytes(name, out.as_bytes())
    }

    /// Pretty JSON object with a `meta` record added.
    pub fn write_json(&mut self, name: &str, mut body: Map<String, Value>) -> Result<PathBuf, Failure> {
        body.insert("meta".into(), serde_json::to_value(self.provenance.meta()).unwrap());
        let text = serde_json::to_string_pretty(&Value::Object(body)).unwrap() + "\n";
        self.write_bytes(name, text.as_bytes())
    }

    /// Snapshot CSV plus its sidecar, both stamped.
    pub fn write_snapshot(
        &mut self,
        name: &str,
        snap: &FlowSnapshot,
        params: &GasParameters,
    ) -> Result<PathBuf, Failure> {
        let path = self.write_bytes(name, snap.to_csv(Some(&self.provenance.header())).as_bytes())?;
        let meta = SnapshotMeta { t: snap.t(), n: params.n, gamma: params.gamma, meta: Some(self.provenance.meta()) };
        let sidecar = sidecar_path(Path::new(name));
        let text = serde_json::to_string_pretty(&meta).unwrap() + "\n";
        self.write_bytes(&sidecar.to_string_lossy(), text.as_bytes())?;
        Ok(path)
    }
}

/// Builds a JSON object from `(key, value)` pairs.
#[macro_export]
macro_rules! object {
    ($($key:expr => $value:expr),* $(,)?) => {{
        let mut m = serde_json::Map::new();
        $( m.insert($key.to_string(), serde_json::to_value(&$value).expect("serializable")); )*
        m
    }};
}
