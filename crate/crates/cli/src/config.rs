//! TOML scenario files.
//!
//! ```toml
//! [run]
//! out_dir = "out"
//! seed = 7
//! threads = 4
//!
//! [flow]        # exact and volume
//! shape = "gaussian"
//! gamma = 1.6666666666666667
//!
//! [exact]
//! t_end = 10.0
//! times = [0.0, 1.0]
//!
//! [bounds]
//! horizon = 1e6
//! [bounds.spec]
//! class = "ns0"
//! alpha = [-3.0, -4.0, -6.0, -4.0, 0.0]
//! r0 = 1.0
//! epsilon = 1.0
//! envelopes.v = { kind = "const", value = 1.0 }
//! ```
//!
//! Sections `momenta`, `volume`, `simulate` and `verify` take the same keys as
//! the corresponding flags, with `_` in place of `-`. Unknown keys are
//! rejected. Relative paths are resolved against the file's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::args::{
    rebase, rebase_descriptor, BoundsArgs, ExactArgs, FlowArgs, MomentaArgs, SimulateArgs, VerifyArgs, VolumeArgs,
};
use crate::failure::Failure;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub flow: FlowArgs,
    #[serde(default)]
    pub exact: ExactArgs,
    #[serde(default)]
    pub momenta: MomentaArgs,
    #[serde(default)]
    pub bounds: BoundsArgs,
    #[serde(default)]
    pub volume: VolumeArgs,
    #[serde(default)]
    pub simulate: SimulateArgs,
    #[serde(default)]
    pub verify: VerifyArgs,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("{}: cannot read configuration: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)
            .map_err(|(line, col, msg)| Failure::Config(format!("{}:{line}:{col}: {msg}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(dir);
        Ok(cfg)
    }

    /// Parses TOML text; errors carry a 1-based line and column.
    pub fn parse(text: &str) -> Result<Self, (usize, usize, String)> {
        let table: toml::Table = toml::from_str(text).map_err(|e| located(text, &e))?;
        if table.is_empty() {
            return Err((1, 1, "configuration file is empty (expected at least one section)".into()));
        }
        toml::from_str(text).map_err(|e| located(text, &e))
    }

    fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(x) = p {
                *x = rebase(x, dir);
            }
        };
        fix(&mut self.run.out_dir);
        fix(&mut self.momenta.snapshot);
        fix(&mut self.bounds.spec_file);
        fix(&mut self.bounds.snapshot);
        fix(&mut self.simulate.snapshot);
        rebase_descriptor(&mut self.flow.shape, dir);
        rebase_descriptor(&mut self.volume.field, dir);
    }
}

fn located(text: &str, e: &toml::de::Error) -> (usize, usize, String) {
    let offset = e.span().map(|s| s.start).unwrap_or(0).min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    (line, col, e.message().trim().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_comment_only_files_are_rejected_at_line_one() {
        for text in ["", "\n\n", "# nothing here\n"] {
            let (line, _, msg) = ScenarioConfig::parse(text).unwrap_err();
            assert_eq!(line, 1);
            assert!(msg.contains("empty"));
        }
    }

    #[test]
    fn unknown_keys_report_their_line() {
        let text = "[exact]\nt_end = 2.0\n\n[simulate]\ncells = 10\nbogus = 1\n";
        let (line, _, msg) = ScenarioConfig::parse(text).unwrap_err();
        assert_eq!(line, 6, "{msg}");
        assert!(msg.contains("bogus"), "{msg}");
    }

    #[test]
    fn syntax_errors_report_their_line() {
        let (line, _, _) = ScenarioConfig::parse("[exact]\nt_end = = 2\n").unwrap_err();
        assert_eq!(line, 2);
    }

    #[test]
    fn sections_deserialize() {
        let text = r#"
[run]
seed = 3
[flow]
shape = "gaussian"
profile = "pointwise"
variant = "excluding-pressure"
[exact]
t_end = 4.0
times = [0.0, 2.0]
[bounds.spec]
class = "ns0"
alpha = [-3.0, -4.0, -6.0, -4.0, 0.0]
r0 = 1.0
epsilon = 1.0
envelopes.v = { kind = "const", value = 1.0 }
[simulate]
flux = "hll"
"#;
        let cfg = ScenarioConfig::parse(text).unwrap();
        assert_eq!(cfg.run.seed, Some(3));
        assert_eq!(cfg.exact.times.as_deref(), Some(&[0.0, 2.0][..]));
        assert_eq!(cfg.flow.profile, Some(crate::args::ProfileChoice::Pointwise));
        assert!(cfg.bounds.class.unwrap().envelopes.v.is_some());
        assert_eq!(cfg.simulate.flux, Some(crate::args::FluxChoice::Hll));
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let mut cfg =
            ScenarioConfig::parse("[simulate]\nsnapshot = \"a.csv\"\n[flow]\nshape = \"file:p.csv\"\n").unwrap();
        cfg.rebase(Path::new("/data/run"));
        assert_eq!(cfg.simulate.snapshot.unwrap(), PathBuf::from("/data/run/a.csv"));
        assert_eq!(cfg.flow.shape.unwrap(), "file:/data/run/p.csv");
    }
}
