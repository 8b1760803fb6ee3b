//! Subcommand implementations. Each writes its files plus a manifest into
//! the output directory and returns a one-line report.

pub mod bench;
pub mod estimate;
pub mod simulate;
pub mod sweep;

use std::path::{Path, PathBuf};

use residence_core::TimeSeries;

use crate::error::{invalid, Result};
use crate::manifest::{CommandKind, RunManifest};
use crate::settings::Settings;

pub fn run(command: CommandKind, settings: &Settings) -> Result<String> {
    let out_dir = settings.out_dir(command.name());
    crate::io::ensure_dir(&out_dir)?;
    RunManifest::new(command, settings, &out_dir).write()?;
    match command {
        CommandKind::Simulate => simulate::run(settings, &out_dir),
        CommandKind::Estimate => estimate::run_am(settings, &out_dir),
        CommandKind::Xcorr => estimate::run_xcorr(settings, &out_dir),
        CommandKind::Sweep => sweep::run(settings, &out_dir),
        CommandKind::Bench => bench::run(settings, &out_dir),
    }
}

/// Replays a manifest, optionally into another directory.
pub fn rerun(manifest: &Path, out: Option<PathBuf>) -> Result<String> {
    let m = RunManifest::read(manifest)?;
    let mut settings = m.settings;
    if out.is_some() {
        settings.out = out;
    }
    run(m.command, &settings)
}

pub(crate) fn read_pair(settings: &Settings) -> Result<(TimeSeries, TimeSeries)> {
    let x = crate::io::read_series(settings.require_path(&settings.input_x, "input-x")?)?;
    let y = crate::io::read_series(settings.require_path(&settings.input_y, "input-y")?)?;
    if x.len() != y.len() {
        return invalid(format!(
            "input lengths differ: x has {} rows, y has {}",
            x.len(),
            y.len()
        ));
    }
    Ok((x, y))
}
