//! Deterministic report persistence.
//!
//! Reports are JSON with sorted keys and every floating-point value printed
//! with 17 significant digits in scientific notation, so two runs of the
//! same config produce byte-identical files. Timestamps and wall-clock
//! durations go to a separate `meta.json`.

use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};

/// Render a JSON value deterministically: object keys sorted (the default
/// `serde_json` map is ordered), floats as `d.dddddddddddddddde[+-]x`.
pub fn to_json_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(value: &Value, indent: usize, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(f) = n.as_f64() {
                // 17 significant digits: 1 leading + 16 fractional
                out.push_str(&format!("{f:.16e}"));
            } else {
                out.push_str("null");
            }
        }
        Value::String(s) => write_string(s, out),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(indent + 1, out);
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                push_indent(indent + 1, out);
                write_string(k, out);
                out.push_str(": ");
                write_value(v, indent + 1, out);
            }
            out.push('\n');
            push_indent(indent, out);
            out.push('}');
        }
    }
}

fn push_indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_string(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Write `name` under `dir` with deterministic formatting.
pub fn write_report(dir: &Path, name: &str, value: &Value) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), to_json_string(value))?;
    Ok(())
}

/// Write the non-deterministic run metadata next to the report.
pub fn write_meta(dir: &Path, elapsed_seconds: f64) -> Result<()> {
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = serde_json::json!({
        "created_unix": created,
        "elapsed_seconds": elapsed_seconds,
    });
    write_report(dir, "meta.json", &meta)
}

/// Write rows of plot data as CSV.
pub fn write_plotdata(dir: &Path, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        let cols: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        text.push_str(&cols.join(","));
        text.push('\n');
    }
    std::fs::write(dir.join("plotdata.csv"), text)?;
    Ok(())
}

/// Parse a previously written report.
pub fn read_report(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read report '{}': {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("report '{}' is not valid JSON: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn float_formatting_seventeen_digits() {
        let v = json!({"x": 0.125, "n": 3, "s": "a\"b"});
        let text = to_json_string(&v);
        assert!(text.contains("1.2500000000000000e-1"), "{text}");
        assert!(text.contains("\"n\": 3"), "{text}");
        assert!(text.contains("\\\""), "{text}");
    }

    #[test]
    fn output_is_parseable_and_stable() {
        let v = json!({"b": [1.0, 2.5e-13], "a": {"inner": true}});
        let t1 = to_json_string(&v);
        let parsed: Value = serde_json::from_str(&t1).unwrap();
        assert_eq!(parsed["b"][1], json!(2.5e-13));
        let t2 = to_json_string(&parsed);
        assert_eq!(t1, t2);
    }

    #[test]
    fn keys_are_sorted() {
        let v = json!({"zeta": 1, "alpha": 2});
        let text = to_json_string(&v);
        assert!(text.find("alpha").unwrap() < text.find("zeta").unwrap());
    }
}
