//! Configuration, bundled fixtures, and file output.

pub mod config;
pub mod csv;
pub mod figures;
pub mod fixtures;
pub mod report;
pub mod svg;

use std::io::Write;
use std::path::Path;

pub use config::{load_config, parse_config, ConfigError, FieldError, ProjectConfig};
pub use fixtures::PaperFixtures;

/// Write `bytes` to a temporary file beside `path`, then rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
