pub mod control_bench;
pub mod identify;
pub mod rho_sweep;
pub mod simulate;

use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Resolve and create the output directory: the `--out` override wins,
/// otherwise the config's `output_dir` relative to the config file.
pub fn output_dir(base: &Path, configured: &str, type_override: &Option<PathBuf>) -> CliResult<PathBuf> {
    let dir = match type_override {
        Some(d) => d.clone(),
        None => crate::config::resolve(base, configured),
    };
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

pub fn write_text(path: &Path, content: &str) -> CliResult<()> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Io(e))
        .map(|_| ())
}
