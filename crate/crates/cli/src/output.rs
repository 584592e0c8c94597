//! CSV and JSON report writers. Both carry the effective configuration.

use std::fs;
use std::io::{self, Write};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::{CliError, Format, Global};

#[derive(Serialize)]
struct Report<'a> {
    config: &'a Map<String, Value>,
    results: &'a [Value],
}

/// Writes `{config, results}` as JSON, or as CSV with a `# key=value`
/// header and one row per result (nested objects flattened with dots).
pub fn emit(g: &Global, config: &Map<String, Value>, results: &[Value]) -> Result<(), CliError> {
    let text = match g.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&Report { config, results }).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => csv(config, results),
    };
    match &g.out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn csv(config: &Map<String, Value>, results: &[Value]) -> String {
    let mut s = String::new();
    for (k, v) in config {
        s.push_str(&format!("# {k}={}\n", scalar(v)));
    }
    let rows: Vec<Vec<(String, String)>> = results
        .iter()
        .map(|r| {
            let mut cells = Vec::new();
            flatten("", r, &mut cells);
            cells
        })
        .collect();
    if let Some(first) = rows.first() {
        let head: Vec<String> = first.iter().map(|(k, _)| field(k)).collect();
        s.push_str(&head.join(","));
        s.push('\n');
    }
    for row in &rows {
        let cells: Vec<String> = row.iter().map(|(_, v)| field(v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
