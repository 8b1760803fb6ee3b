//! Command-line front end: file formats, run settings, manifests and the
//! `simulate`, `estimate`, `xcorr`, `sweep` and `bench` commands.

pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod settings;

pub use error::{CliError, Result};
pub use manifest::{CommandKind, RunManifest};
pub use settings::Settings;
