//! Atomic file output: write to a temporary file in the target directory,
//! then rename over the destination.

use std::io::Write;
use std::path::Path;

use crate::CliError;

pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir),
        None => tempfile::NamedTempFile::new_in("."),
    }
    .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.flush())
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn write_pattern_csv(path: &Path, pattern: &spdc_core::Pattern) -> Result<(), CliError> {
    let mut buf = Vec::new();
    pattern
        .write_csv(&mut buf)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    atomic_write(path, &buf)
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

pub fn read_pattern_csv(path: &Path) -> Result<spdc_core::Pattern, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    spdc_core::Pattern::read_csv(std::io::BufReader::new(file))
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}
