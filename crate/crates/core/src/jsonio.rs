//! JSON document helpers shared by every file format.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Missing or unreadable input documents are schema errors: the caller
/// supplied something that is not a valid document.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::schema(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::schema(format!("{}: {e}", path.display())))
}

/// Pretty-printed; missing parent directories are created.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let text = serde_json::to_string_pretty(value).expect("serializable document");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

