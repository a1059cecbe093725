pub mod bench;
pub mod evaluate;
pub mod explain;
pub mod fit;
pub mod ingest;

use std::fs;
use std::path::Path;

use anyhow::Context;

use crate::config::CliError;

/// Create the output directory if needed.
pub fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(())
}

/// Write a string to a file with context on failure.
pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
