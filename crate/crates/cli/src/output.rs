//! Artifact writers. Every file embeds the resolved configuration and the
//! schema version; floats in CSV use 17 significant digits so downstream
//! fits reproduce bit-exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CmdError;

/// Full round-trip decimal rendering of a float for CSV cells.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Joins the output directory with a configured file name.
pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CmdError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CmdError::Config(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    std::fs::write(path, bytes)
        .map_err(|e| CmdError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Writes a JSON document of the shape
/// `{"schema_version": .., "config": .., <payload key>: ..}`.
pub fn write_json<C: Serialize, P: Serialize>(
    path: &Path,
    config: &C,
    payload_key: &str,
    payload: &P,
) -> Result<(), CmdError> {
    let doc = serde_json::json!({
        "schema_version": crate::config::SCHEMA_VERSION,
        "config": config,
        payload_key: payload,
    });
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CmdError::Numerical(format!("serialization failed: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Writes a CSV file with the resolved config flattened into leading `#`
/// comment lines, then a header row, then the data rows.
pub fn write_csv<C: Serialize>(
    path: &Path,
    config: &C,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CmdError> {
    let mut text = String::new();
    writeln!(text, "# schema_version = {}", crate::config::SCHEMA_VERSION).unwrap();
    let value = serde_json::to_value(config)
        .map_err(|e| CmdError::Numerical(format!("serialization failed: {e}")))?;
    let mut pairs = Vec::new();
    flatten("", &value, &mut pairs);
    for (key, rendered) in pairs {
        writeln!(text, "# {key} = {rendered}").unwrap();
    }
    writeln!(text, "{}", header.join(",")).unwrap();
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writeln!(text, "{}", row.join(",")).unwrap();
    }
    write_atomic(path, text.as_bytes())
}

fn flatten(prefix: &str, value: &serde_json::Value, out: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        serde_json::Value::Array(items) => {
            let rendered: Vec<String> = items.iter().map(render_scalar).collect();
            out.push((prefix.to_string(), rendered.join(", ")));
        }
        other => out.push((prefix.to_string(), render_scalar(other))),
    }
}

fn render_scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
