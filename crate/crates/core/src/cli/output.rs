use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::Command as Process;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

use super::{Common, Format};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    pub git_describe: String,
    pub outputs: Vec<PathBuf>,
}

fn git_describe() -> String {
    Process::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) if n.is_f64() => format!("{:.16e}", n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        _ => unreachable!("flattened"),
    }
}

fn flatten_into(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten_into(&key(k), x, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten_into(&key(&i.to_string()), x, out)),
        _ => out.push((prefix.to_string(), scalar(v))),
    }
}

/// CSV with one row per element when `v` is an array of records, otherwise a
/// single row of dotted leaf paths. Floats carry 17 significant digits.
pub fn flatten_csv(v: &Value) -> String {
    let rows: Vec<Vec<(String, String)>> = match v {
        Value::Array(items) if items.iter().all(Value::is_object) && !items.is_empty() => items
            .iter()
            .map(|x| {
                let mut r = Vec::new();
                flatten_into("", x, &mut r);
                r
            })
            .collect(),
        _ => {
            let mut r = Vec::new();
            flatten_into("", v, &mut r);
            vec![r]
        }
    };
    let mut header: Vec<String> = Vec::new();
    for r in &rows {
        for (k, _) in r {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let line: Vec<String> =
            header.iter().map(|h| r.iter().find(|(k, _)| k == h).map(|(_, v)| v.clone()).unwrap_or_default()).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// What `--format csv` prints.
pub(crate) enum Table {
    /// The result flattened to one row.
    Result,
    /// An array of records, one row each.
    Rows(Value),
    /// Pre-rendered CSV.
    Text(String),
}

/// Writes the command result (JSON or CSV) and the run manifest.
pub(crate) fn emit(command: &str, common: &Common, seed: u64, result: &Value, table: Table) -> Result<()> {
    let body = match common.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(result)?;
            s.push('\n');
            s
        }
        Format::Csv => match table {
            Table::Result => flatten_csv(result),
            Table::Rows(rows) => flatten_csv(&rows),
            Table::Text(text) => text,
        },
    };
    let manifest = RunManifest {
        command: command.to_string(),
        config_path: common.config.clone(),
        seed,
        git_describe: git_describe(),
        outputs: common.out.iter().cloned().collect(),
    };
    match &common.out {
        Some(path) => {
            fs::write(path, body)?;
            let mut mpath = path.clone().into_os_string();
            mpath.push(".manifest.json");
            fs::write(mpath, serde_json::to_string_pretty(&manifest)? + "\n")?;
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            eprintln!("{}", serde_json::to_string(&manifest)?);
        }
    }
    Ok(())
}
