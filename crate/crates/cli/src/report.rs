//! JSON-lines reports, their CSV summaries and the metadata sidecar.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::settings::Settings;
use crate::CliError;

pub const SCHEMA: &str = "subvertlab/1";

/// One line of a report file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub schema: String,
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub config: Value,
    pub result: Value,
}

impl Record {
    pub fn new(command: &str, settings: &Settings, result: impl Serialize) -> Self {
        Record {
            schema: SCHEMA.into(),
            command: command.into(),
            config_hash: settings.hash(),
            seed: settings.seed,
            config: serde_json::to_value(settings).expect("plain struct"),
            result: serde_json::to_value(result).expect("plain struct"),
        }
    }
}

/// Scalars as plain text, objects flattened with dotted keys, everything
/// else as JSON.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        Value::Array(a) if prefix.ends_with("ci95") && a.len() == 2 => {
            out.push((format!("{prefix}_lo"), a[0].to_string()));
            out.push((format!("{prefix}_hi"), a[1].to_string()));
        }
        Value::String(s) => out.push((prefix.into(), s.clone())),
        Value::Null => out.push((prefix.into(), String::new())),
        other => out.push((prefix.into(), other.to_string())),
    }
}

fn csv_row(r: &Record) -> Vec<(String, String)> {
    let mut row = vec![
        ("schema".to_string(), r.schema.clone()),
        ("command".to_string(), r.command.clone()),
        ("config_hash".to_string(), r.config_hash.clone()),
        (
            "seed".to_string(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
        ),
    ];
    let mut rest = Vec::new();
    flatten("", &r.result, &mut rest);
    // the result's own copies of the provenance columns are redundant
    rest.retain(|(k, _)| !matches!(k.as_str(), "seed" | "config"));
    row.extend(rest);
    row
}

/// CSV over the union of columns, in order of first appearance.
pub fn write_csv(records: &[Record], w: impl Write) -> Result<(), CliError> {
    let rows: Vec<_> = records.iter().map(csv_row).collect();
    let mut header: Vec<String> = Vec::new();
    for row in &rows {
        for (k, _) in row {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(&header).map_err(CliError::io)?;
    for row in rows {
        let line: Vec<&str> = header
            .iter()
            .map(|h| {
                row.iter()
                    .find(|(k, _)| k == h)
                    .map_or("", |(_, v)| v.as_str())
            })
            .collect();
        out.write_record(line).map_err(CliError::io)?;
    }
    out.flush().map_err(CliError::io)?;
    Ok(())
}

pub fn to_jsonl(records: &[Record]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&serde_json::to_string(r).expect("plain struct"));
        s.push('\n');
    }
    s
}

pub fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

#[derive(Serialize)]
struct Meta<'a> {
    schema: &'a str,
    command: &'a str,
    argv: Vec<String>,
    version: &'a str,
    started_at: String,
    finished_at: String,
    report: String,
    config_hashes: Vec<&'a str>,
}

fn now() -> String {
    time::OffsetDateTime::now_utc()
        .format(&time::format_description::well_known::Rfc3339)
        .unwrap_or_default()
}

pub struct Clock {
    started_at: String,
}

impl Clock {
    pub fn start() -> Self {
        Clock { started_at: now() }
    }
}

/// Writes the report to `path` (or stdout), the CSV summary next to it and
/// the timestamps into `<path>.meta.json`.
pub fn emit(
    command: &str,
    records: &[Record],
    path: Option<&Path>,
    clock: Clock,
) -> Result<(), CliError> {
    let Some(path) = path else {
        std::io::stdout()
            .write_all(to_jsonl(records).as_bytes())
            .map_err(CliError::io)?;
        return Ok(());
    };
    std::fs::write(path, to_jsonl(records)).map_err(CliError::io)?;
    let csv = std::fs::File::create(sibling(path, "csv")).map_err(CliError::io)?;
    write_csv(records, csv)?;
    let meta = Meta {
        schema: SCHEMA,
        command,
        argv: std::env::args().collect(),
        version: env!("CARGO_PKG_VERSION"),
        started_at: clock.started_at,
        finished_at: now(),
        report: path.display().to_string(),
        config_hashes: records.iter().map(|r| r.config_hash.as_str()).collect(),
    };
    std::fs::write(
        sibling(path, "meta.json"),
        serde_json::to_string_pretty(&meta).expect("plain struct") + "\n",
    )
    .map_err(CliError::io)?;
    Ok(())
}

/// Reads every record of a report, rejecting other schema versions.
pub fn read_records(path: &Path) -> Result<Vec<Record>, CliError> {
    let f = std::fs::File::open(path)
        .map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(f).lines().enumerate() {
        let line = line.map_err(CliError::io)?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Map<String, Value> = serde_json::from_str(&line)
            .map_err(|e| CliError::Config(format!("{} line {}: {e}", path.display(), i + 1)))?;
        let schema = v.get("schema").and_then(Value::as_str).unwrap_or("<none>");
        if schema != SCHEMA {
            return Err(CliError::Config(format!(
                "schema mismatch in {} line {}: found {schema:?}, expected {SCHEMA:?}",
                path.display(),
                i + 1
            )));
        }
        out.push(
            serde_json::from_value(Value::Object(v))
                .map_err(|e| CliError::Config(format!("{} line {}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

/// Concatenates the records of all `paths`; every file is checked before
/// anything is returned.
pub fn merge(paths: &[PathBuf]) -> Result<Vec<Record>, CliError> {
    let mut bad = Vec::new();
    let mut all = Vec::new();
    for p in paths {
        match read_records(p) {
            Ok(r) => all.extend(r),
            Err(CliError::Config(msg)) => bad.push(msg),
            Err(e) => return Err(e),
        }
    }
    if !bad.is_empty() {
        return Err(CliError::Config(bad.join("; ")));
    }
    Ok(all)
}
