use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::args::{BuildGraphArgs, RunArgs, SweepArgs, TuneArgs};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
const MANIFEST_FORMAT: &str = "ping-manifest";

/// Fully resolved command settings; enough to re-execute the command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "settings", rename_all = "kebab-case")]
pub enum Invocation {
    BuildGraph(BuildGraphArgs),
    Run(RunArgs),
    Sweep(SweepArgs),
    Tune(TuneArgs),
}

impl Invocation {
    pub fn name(&self) -> &'static str {
        match self {
            Self::BuildGraph(_) => "build-graph",
            Self::Run(_) => "run",
            Self::Sweep(_) => "sweep",
            Self::Tune(_) => "tune",
        }
    }

    pub fn out_dir(&self) -> &Path {
        match self {
            Self::BuildGraph(a) => &a.io.out,
            Self::Run(a) => &a.io.out,
            Self::Sweep(a) => &a.io.out,
            Self::Tune(a) => &a.io.out,
        }
    }

    pub fn set_out_dir(&mut self, dir: PathBuf) {
        match self {
            Self::BuildGraph(a) => a.io.out = dir,
            Self::Run(a) => a.io.out = dir,
            Self::Sweep(a) => a.io.out = dir,
            Self::Tune(a) => a.io.out = dir,
        }
    }

    pub fn input_mut(&mut self) -> &mut PathBuf {
        match self {
            Self::BuildGraph(a) => &mut a.io.input,
            Self::Run(a) => &mut a.io.input,
            Self::Sweep(a) => &mut a.io.input,
            Self::Tune(a) => &mut a.io.input,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Self::BuildGraph(a) => a.io.seed,
            Self::Run(a) => a.io.seed,
            Self::Sweep(a) => a.io.seed,
            Self::Tune(a) => a.io.seed,
        }
    }
}

/// Written next to a command's outputs once they are all in place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub tool_version: String,
    pub seed: u64,
    #[serde(flatten)]
    pub invocation: Invocation,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
    pub started_at: String,
    pub finished_at: String,
}

impl RunManifest {
    pub fn new(invocation: Invocation, outputs: Vec<String>, started_at: String, finished_at: String) -> Self {
        Self {
            format: MANIFEST_FORMAT.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed: invocation.seed(),
            invocation,
            outputs,
            started_at,
            finished_at,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| Error::malformed(&e))?;
        if m.format != MANIFEST_FORMAT {
            return Err(Error::MalformedFile {
                line: 1,
                column: 1,
                message: format!("expected format `{MANIFEST_FORMAT}`, found `{}`", m.format),
            });
        }
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join(MANIFEST_FILE), &(serde_json::to_string_pretty(self)? + "\n"))
    }
}

/// Writes through a temporary sibling and renames it into place, so readers
/// never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("output");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
