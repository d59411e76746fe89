//! Report writing: CSV or JSON to stdout or to a file, with files replaced
//! atomically and accompanied by a provenance sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::io(e.to_string()))
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::io(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(e.to_string()))?;
    tmp.flush().map_err(|e| CliError::io(e.to_string()))?;
    tmp.persist(path)
        .map_err(|e| CliError::io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".provenance.json");
    path.with_file_name(name)
}

pub fn provenance(command: &str, parameters: Value, tolerances: Value) -> Value {
    json!({
        "command": command,
        "parameters": parameters,
        "tolerances": tolerances,
        "git_describe": env!("PDANGLES_GIT_DESCRIBE"),
        "version": env!("CARGO_PKG_VERSION"),
    })
}

/// Emits a report to stdout, or to `path` plus its provenance sidecar.
pub fn emit(path: Option<&Path>, bytes: &[u8], provenance: &Value) -> Result<(), CliError> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).map_err(|e| CliError::io(e.to_string()))?;
            out.flush().map_err(|e| CliError::io(e.to_string()))
        }
        Some(p) => {
            write_atomic(p, bytes)?;
            write_atomic(&sidecar_path(p), &json_bytes(provenance)?)
        }
    }
}
