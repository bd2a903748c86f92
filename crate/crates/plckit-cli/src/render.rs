//! Output rendering: pretty JSON (declaration field order) or an
//! indented key/value table, written to stdout or `--output`.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::{CommonOpts, Format, InputError};

/// A report rendered ahead of emission: JSON text plus a tree for the
/// table format.
pub struct Rendered {
    json: String,
    tree: Value,
}

/// Serializes a report once for both output formats.
pub fn rendered<T: Serialize>(report: &T) -> Result<Rendered, InputError> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| InputError(format!("serialization failed: {e}")))?;
    let tree = serde_json::to_value(report)
        .map_err(|e| InputError(format!("serialization failed: {e}")))?;
    Ok(Rendered { json, tree })
}

/// Writes the report in the requested format.
pub fn emit(rendered: &Rendered, common: &CommonOpts) -> std::io::Result<()> {
    let mut text = match common.format {
        Format::Json => rendered.json.clone(),
        Format::Table => {
            let mut out = String::new();
            table_into(&rendered.tree, 0, None, &mut out);
            out.pop();
            out
        }
    };
    text.push('\n');
    match &common.output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Flat inline form for small arrays (scalars or scalar rows).
fn inline_array(items: &[Value]) -> Option<String> {
    let mut parts = Vec::with_capacity(items.len());
    for item in items {
        match item {
            v if is_scalar(v) => parts.push(scalar_text(v)),
            Value::Array(inner) if inner.iter().all(is_scalar) => {
                let row: Vec<String> = inner.iter().map(scalar_text).collect();
                parts.push(format!("[{}]", row.join(" ")));
            }
            _ => return None,
        }
    }
    Some(parts.join(", "))
}

fn table_into(value: &Value, indent: usize, key: Option<&str>, out: &mut String) {
    let pad = "  ".repeat(indent);
    let label = key.map(|k| format!("{k}: ")).unwrap_or_default();
    match value {
        Value::Object(map) => {
            if let Some(k) = key {
                out.push_str(&format!("{pad}{k}:\n"));
            }
            let next = if key.is_some() { indent + 1 } else { indent };
            for (k, v) in map {
                table_into(v, next, Some(k), out);
            }
        }
        Value::Array(items) => {
            if let Some(flat) = inline_array(items) {
                out.push_str(&format!("{pad}{label}[{flat}]\n"));
            } else {
                out.push_str(&format!("{pad}{label}\n"));
                for (idx, item) in items.iter().enumerate() {
                    table_into(item, indent + 1, Some(&format!("[{idx}]")), out);
                }
            }
        }
        scalar => out.push_str(&format!("{pad}{label}{}\n", scalar_text(scalar))),
    }
}
