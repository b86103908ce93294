//! Atomic file output: write to a temp file beside the target, then rename.

use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::Failure;

/// Fails before touching anything if a target exists and `force` is off.
pub fn check_targets(paths: &[PathBuf], force: bool) -> Result<(), Failure> {
    if force {
        return Ok(());
    }
    let existing: Vec<String> = paths
        .iter()
        .filter(|p| p.exists())
        .map(|p| format!("{} already exists (use --force to overwrite)", p.display()))
        .collect();
    if existing.is_empty() {
        Ok(())
    } else {
        Err(Failure::usage(existing.join("\n")))
    }
}

pub fn write_atomic(path: &Path, contents: &str, force: bool) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    if force {
        tmp.persist(path)?;
    } else {
        tmp.persist_noclobber(path)
            .map_err(|e| Failure::usage(format!("{}: {}", path.display(), e.error)))?;
    }
    Ok(())
}
