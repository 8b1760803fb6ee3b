use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::settings::Settings;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Simulate,
    Estimate,
    Xcorr,
    Sweep,
    Bench,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Simulate => "simulate",
            CommandKind::Estimate => "estimate",
            CommandKind::Xcorr => "xcorr",
            CommandKind::Sweep => "sweep",
            CommandKind::Bench => "bench",
        }
    }
}

/// Written next to every output set; `settings` alone is enough to rerun.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: CommandKind,
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub settings: Settings,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: CommandKind, settings: &Settings, out_dir: &Path) -> Self {
        let inputs = [&settings.input_x, &settings.input_y, &settings.k_true]
            .into_iter()
            .flatten()
            .cloned()
            .collect();
        let mut settings = settings.clone();
        settings.out = Some(out_dir.to_path_buf());
        Self {
            command,
            inputs,
            out_dir: out_dir.to_path_buf(),
            seed: settings.seed,
            settings,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        }
    }

    pub fn write(&self) -> Result<()> {
        crate::io::write_json(&self.out_dir.join(MANIFEST_FILE), self)
    }

    pub fn read(path: &Path) -> Result<Self> {
        crate::io::read_json(path)
    }
}
