//! Small shared helpers.

use std::io::Write as _;
use std::path::Path;

/// Writes `text` (plus a trailing newline) to `path` atomically: the
/// content lands in a temporary file in the same directory and is renamed
/// into place, so readers never observe a partial file.
pub(crate) fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    if !text.is_empty() && !text.ends_with('\n') {
        tmp.write_all(b"\n")?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
