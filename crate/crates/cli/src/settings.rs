//! Key-value configuration files and their resolution into a `SystemConfig`.
//!
//! A file holds one `key = value` per line; `#` starts a comment. Keys are
//! the long flag names without the leading dashes (`m`, `rates-u1`, ...). Run
//! manifests use the same format, so a manifest can be fed back as a config;
//! the manifest-only keys (`version`, `timestamp`, `command`, `samples`, `output.*`) are
//! ignored on input.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use mimo_noma::config::{db_grid, DEFAULT_SEED, DEFAULT_TRIALS};
use mimo_noma::{Config64, Detector, OutageTarget, Policy, RateTargets, Scheme};

pub const CONFIG_KEYS: [&str; 15] = [
    "m",
    "n",
    "rates-u1",
    "rates-u2",
    "policy",
    "target-multiplier",
    "target-fixed",
    "rho-db-start",
    "rho-db-stop",
    "rho-db-step",
    "trials",
    "seed",
    "scheme",
    "detector-u1",
    "workers",
];

fn is_manifest_only(key: &str) -> bool {
    matches!(key, "version" | "timestamp" | "command" | "samples") || key.starts_with("output.")
}

pub type Entries = BTreeMap<String, String>;

/// Parses `key = value` lines.
pub fn parse_entries(text: &str) -> Result<Entries, String> {
    let mut out = Entries::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected 'key = value', got '{line}'", no + 1))?;
        let (key, value) = (key.trim(), value.trim());
        if is_manifest_only(key) {
            continue;
        }
        if !CONFIG_KEYS.contains(&key) {
            return Err(format!("line {}: unknown key '{key}'", no + 1));
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(format!("line {}: key '{key}' given twice", no + 1));
        }
    }
    Ok(out)
}

fn get<V: std::str::FromStr>(entries: &Entries, key: &str, default: V) -> Result<V, String> {
    match entries.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| format!("invalid value '{v}' for {key}")),
    }
}

fn rate_list(entries: &Entries, key: &str, default: f64, n: usize) -> Result<Vec<f64>, String> {
    let Some(text) = entries.get(key) else {
        return Ok(vec![default; n]);
    };
    let values = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid value '{text}' for {key}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    match values.len() {
        1 => Ok(vec![values[0]; n]),
        len if len == n => Ok(values),
        len => Err(format!("{key} lists {len} rates for n = {n} layers")),
    }
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub config: Config64,
    pub workers: usize,
    pub entries: Entries,
}

/// Builds and validates a configuration from resolved entries.
pub fn resolve(entries: Entries) -> Result<Settings, String> {
    let m: usize = get(&entries, "m", 3)?;
    let n: usize = get(&entries, "n", 3)?;
    let r1 = rate_list(&entries, "rates-u1", 1.0, n)?;
    let r2 = rate_list(&entries, "rates-u2", 2.0, n)?;
    let rates = RateTargets::new(r1, r2).map_err(|e| e.to_string())?;
    let policy_id: u8 = get(&entries, "policy", 1)?;
    let policy = match policy_id {
        1 => {
            let target = match (
                entries.get("target-multiplier"),
                entries.get("target-fixed"),
            ) {
                (Some(_), Some(_)) => {
                    return Err("give either target-multiplier or target-fixed, not both".into());
                }
                (_, Some(_)) => OutageTarget::Fixed(get(&entries, "target-fixed", 0.0)?),
                _ => OutageTarget::SnrCoupled {
                    multiplier: get(&entries, "target-multiplier", 2.0)?,
                },
            };
            Policy::One {
                targets: vec![target; n],
            }
        }
        2 => Policy::Two,
        other => return Err(format!("policy must be 1 or 2, got {other}")),
    };
    let grid = db_grid(
        get(&entries, "rho-db-start", 0.0)?,
        get(&entries, "rho-db-stop", 50.0)?,
        get(&entries, "rho-db-step", 5.0)?,
    )
    .map_err(|e| e.to_string())?;
    let scheme: Scheme = get(&entries, "scheme", Scheme::ProposedNoma)?;
    let detector: Detector = get(&entries, "detector-u1", Detector::ZeroForcing)?;
    let config = Config64 {
        m,
        n,
        rates,
        policy,
        rho_grid_db: grid,
        trials: get(&entries, "trials", DEFAULT_TRIALS)?,
        seed: get(&entries, "seed", DEFAULT_SEED)?,
        detector_user1: detector,
        scheme,
    };
    config.validate().map_err(|e| e.to_string())?;
    Ok(Settings {
        config,
        workers: get(&entries, "workers", 0)?,
        entries,
    })
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

/// Manifest text: resolved configuration first, then run metadata.
pub fn manifest(
    settings: &Settings,
    command: &str,
    timestamp: u64,
    outputs: &[(String, String)],
) -> String {
    let c = &settings.config;
    let e = &settings.entries;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("m", c.m.to_string());
    kv("n", c.n.to_string());
    kv("rates-u1", join(c.rates.r1()));
    kv("rates-u2", join(c.rates.r2()));
    match &c.policy {
        Policy::One { targets } => {
            kv("policy", "1".into());
            match targets[0] {
                OutageTarget::Fixed(p) => kv("target-fixed", p.to_string()),
                OutageTarget::SnrCoupled { multiplier } => {
                    kv("target-multiplier", multiplier.to_string())
                }
            }
        }
        Policy::Two => kv("policy", "2".into()),
    }
    for key in ["rho-db-start", "rho-db-stop", "rho-db-step"] {
        let default = match key {
            "rho-db-start" => "0",
            "rho-db-stop" => "50",
            _ => "5",
        };
        kv(key, e.get(key).cloned().unwrap_or_else(|| default.into()));
    }
    kv("trials", c.trials.to_string());
    kv("seed", c.seed.to_string());
    kv("scheme", c.scheme.tag().into());
    kv("detector-u1", c.detector_user1.tag().into());
    kv("command", command.into());
    kv("version", env!("CARGO_PKG_VERSION").into());
    kv("timestamp", timestamp.to_string());
    for (name, path) in outputs {
        kv(&format!("output.{name}"), path.clone());
    }
    out
}
