//! Row serialization: RFC-4180-style CSV with a header row, or a JSON array
//! of objects keyed by the same field names. Floats are written in Rust's
//! shortest round-trip form, so every emitted file parses back losslessly.

use crate::config::OutputFormat;
use crate::error::HarnessError;
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Serialize rows to bytes in the requested format.
pub fn render_rows<T: Serialize>(rows: &[T], format: OutputFormat) -> Result<Vec<u8>, HarnessError> {
    match format {
        OutputFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            for row in rows {
                writer
                    .serialize(row)
                    .map_err(|e| HarnessError::Usage(format!("CSV serialization failed: {e}")))?;
            }
            writer
                .into_inner()
                .map_err(|e| HarnessError::Usage(format!("CSV flush failed: {e}")))
        }
        OutputFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(rows)
                .map_err(|e| HarnessError::Usage(format!("JSON serialization failed: {e}")))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

/// Write rows to a file, or to stdout when no path is given.
pub fn write_rows<T: Serialize>(
    rows: &[T],
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<(), HarnessError> {
    let bytes = render_rows(rows, format)?;
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&bytes)
                .and_then(|()| stdout.flush())
                .map_err(|source| HarnessError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| HarnessError::Usage(format!(
        "cannot open CSV {}: {e}",
        path.display()
    )))?;
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| HarnessError::Usage(format!("bad CSV {}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text)
        .map_err(|e| HarnessError::Usage(format!("bad JSON {}: {e}", path.display())))
}
