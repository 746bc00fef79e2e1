//! Experiment configuration: command-line flags layered over a JSON config
//! file, expanded over an optional parameter grid.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const SEED_ENV: &str = "SUBVERTLAB_SEED";

/// Flags shared by every experiment command. Unset flags fall back to the
/// config file, then to the defaults in [`Settings`].
#[derive(Args, Debug, Default, Serialize)]
pub struct Opts {
    /// JSON config file; flags override its values
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Master seed (falls back to SUBVERTLAB_SEED)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Number of trials
    #[arg(long = "N", visible_alias = "trials")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,

    /// Attack key length in bits
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<usize>,

    /// Hidden message length (a power of two)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ml: Option<usize>,

    /// Rejection-sampling cutoff
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_bits: Option<usize>,

    /// Documents per hidden message (default from ml and beta)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outl: Option<usize>,

    /// Signature coin bits
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,

    /// Signature tag bits
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,

    /// Cycle length of scheme channels
    #[arg(long, visible_alias = "ell")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle: Option<usize>,

    /// Host scheme: randpad:<r>[:<ml>] or det[:<ml>]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub host: Option<String>,

    /// Channel: uniform:<bits>, pointmass:<bits>, or a host scheme name
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<String>,

    /// History to sample after, in hex
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history: Option<String>,

    /// Documents to sample
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,

    /// Hidden message in hex (random when absent)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,

    /// Attack key in hex (generated when absent)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,

    /// Report produced by an earlier embed or run
    #[arg(long)]
    #[serde(skip)]
    pub input: Option<PathBuf>,

    /// CPA adversaries, comma separated
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adversary: Option<Vec<String>>,

    /// Watchdogs, comma separated
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub watchdog: Option<Vec<String>>,

    /// Wardens, comma separated
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warden: Option<Vec<String>>,

    /// Forgers, comma separated
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forger: Option<Vec<String>>,

    /// Brute-force forger guesses
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,

    /// History length wardens and encoders start from
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefix_len: Option<usize>,

    /// Restart segments for reboot-reliability
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<usize>,

    /// Oracle queries per output (default from the attack)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub query: Option<u64>,

    /// Signature fixture: coin-injective, coin-extractable or unique
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sig: Option<String>,

    /// Lower-bound attack: rejsam or fabricating
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attack: Option<String>,

    /// Grid axis as key=v1,v2,...; repeat for a product
    #[arg(long = "grid", value_name = "KEY=VALUES")]
    #[serde(skip)]
    pub grid: Vec<String>,

    /// JSON-lines report path; the CSV summary and metadata go next to it
    #[arg(long = "out", visible_alias = "output-path")]
    #[serde(skip)]
    pub output_path: Option<PathBuf>,

    /// Worker threads
    #[arg(long)]
    #[serde(skip)]
    pub jobs: Option<usize>,
}

fn default_n() -> u64 {
    1000
}
fn default_kappa() -> usize {
    128
}
fn default_ml() -> usize {
    8
}
fn default_s() -> usize {
    64
}
fn default_one() -> usize {
    1
}
fn default_host() -> String {
    "randpad:8".into()
}
fn default_channel() -> String {
    "uniform:8".into()
}
fn default_count() -> usize {
    16
}
fn default_r() -> usize {
    4
}
fn default_t() -> usize {
    64
}
fn default_adversaries() -> Vec<String> {
    vec!["chi2".into()]
}
fn default_budget() -> u64 {
    256
}
fn default_sig() -> String {
    "coin-extractable".into()
}
fn default_attack() -> String {
    "rejsam".into()
}
fn default_forgers() -> Vec<String> {
    vec!["replay".into()]
}

/// A list, or one comma-separated string.
fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(String),
        Many(Vec<String>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(s) => s.split(',').map(str::to_owned).collect(),
        OneOrMany::Many(v) => v,
    })
}

/// Effective configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub seed: Option<u64>,
    #[serde(rename = "N", default = "default_n")]
    pub n: u64,
    #[serde(alias = "κ", default = "default_kappa")]
    pub kappa: usize,
    #[serde(default = "default_ml")]
    pub ml: usize,
    #[serde(default = "default_s")]
    pub s: usize,
    #[serde(alias = "β", default)]
    pub beta: Option<f64>,
    #[serde(default = "default_one")]
    pub block_bits: usize,
    #[serde(default)]
    pub outl: Option<usize>,
    #[serde(default = "default_r")]
    pub r: usize,
    #[serde(default = "default_t")]
    pub t: usize,
    #[serde(alias = "ℓ", default = "default_one")]
    pub cycle: usize,
    #[serde(default = "default_host")]
    pub host: String,
    #[serde(default = "default_channel")]
    pub channel: String,
    #[serde(default)]
    pub history: Option<String>,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub message: Option<String>,
    #[serde(default)]
    pub key: Option<String>,
    #[serde(default = "default_adversaries", deserialize_with = "one_or_many")]
    pub adversary: Vec<String>,
    #[serde(default = "default_adversaries", deserialize_with = "one_or_many")]
    pub watchdog: Vec<String>,
    #[serde(default = "default_adversaries", deserialize_with = "one_or_many")]
    pub warden: Vec<String>,
    #[serde(default = "default_forgers", deserialize_with = "one_or_many")]
    pub forger: Vec<String>,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub prefix_len: Option<usize>,
    #[serde(default = "default_one")]
    pub tau: usize,
    #[serde(default)]
    pub query: Option<u64>,
    #[serde(default = "default_sig")]
    pub sig: String,
    #[serde(default = "default_attack")]
    pub attack: String,
}

impl Settings {
    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| {
            CliError::Config(format!(
                "a seed is required: pass --seed, set \"seed\" in the config, or set {SEED_ENV}"
            ))
        })
    }

    /// SHA-256 of the canonical JSON form (keys sorted).
    pub fn hash(&self) -> String {
        let v = serde_json::to_value(self).expect("plain struct");
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }
}

/// Config file layer: plain settings plus an optional `grid` of lists and
/// an `output_path`.
#[derive(Default)]
pub struct FileConfig {
    pub values: Map<String, Value>,
    pub grid: BTreeMap<String, Vec<Value>>,
    pub output_path: Option<PathBuf>,
}

pub fn read_config(path: &std::path::Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
    let Value::Object(mut values) = v else {
        return Err(CliError::Config(format!(
            "config {} must be a JSON object",
            path.display()
        )));
    };
    let mut cfg = FileConfig::default();
    if let Some(grid) = values.remove("grid") {
        cfg.grid = serde_json::from_value(grid)
            .map_err(|e| CliError::Config(format!("grid must map keys to lists: {e}")))?;
    }
    if let Some(out) = values.remove("output_path") {
        let out = out
            .as_str()
            .ok_or_else(|| CliError::Config("output_path must be a string".into()))?;
        cfg.output_path = Some(out.into());
    }
    cfg.values = values;
    Ok(cfg)
}

fn parse_grid_flag(axis: &str) -> Result<(String, Vec<Value>), CliError> {
    let (key, vals) = axis
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("grid axis {axis:?} is not KEY=VALUES")))?;
    let vals = vals
        .split(',')
        .map(|v| serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.into())))
        .collect();
    Ok((key.into(), vals))
}

/// Every run described by `base` (lowest precedence), the config file and
/// the flags, one per point of the grid.
pub fn resolve(
    base: Map<String, Value>,
    opts: &Opts,
) -> Result<(Vec<Settings>, Option<PathBuf>), CliError> {
    let file = match &opts.config {
        Some(p) => read_config(p)?,
        None => FileConfig::default(),
    };
    let mut merged = base;
    merged.extend(file.values);
    let Value::Object(flags) = serde_json::to_value(opts).expect("plain struct") else {
        unreachable!()
    };
    merged.extend(flags);
    if !merged.contains_key("seed") {
        if let Ok(s) = std::env::var(SEED_ENV) {
            let seed: u64 = s
                .parse()
                .map_err(|_| CliError::Config(format!("{SEED_ENV}={s:?} is not a u64")))?;
            merged.insert("seed".into(), seed.into());
        }
    }

    let mut grid = file.grid;
    for axis in &opts.grid {
        let (k, v) = parse_grid_flag(axis)?;
        grid.insert(k, v);
    }
    let mut points = vec![merged];
    for (key, vals) in grid {
        if vals.is_empty() {
            return Err(CliError::Config(format!("grid axis {key:?} is empty")));
        }
        points = points
            .into_iter()
            .flat_map(|p| {
                vals.iter()
                    .map(|v| {
                        let mut q = p.clone();
                        q.insert(key.clone(), v.clone());
                        q
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    let runs = points
        .into_iter()
        .map(|p| {
            serde_json::from_value(Value::Object(p))
                .map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
        })
        .collect::<Result<Vec<Settings>, _>>()?;
    Ok((runs, opts.output_path.clone().or(file.output_path)))
}
