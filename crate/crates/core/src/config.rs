//! Flat `key = value` experiment configs.
//!
//! One entry per line, `#` starts a comment, blocks use dotted keys
//! (`target.kind`, `sweep.dims`). Vectors are comma separated and lists of
//! vectors separate the vectors with `;`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    origins: BTreeMap<String, String>,
}

impl PartialEq for Config {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|part| {
            !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        })
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::new();
        for (idx, raw) in text.lines().enumerate() {
            let location = format!("line {}", idx + 1);
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = split_entry(line).map_err(|m| config_err(&location, m))?;
            if cfg.values.contains_key(key) {
                return Err(config_err(&location, format!("duplicate key '{key}'")));
            }
            cfg.insert(key, value, location);
        }
        Ok(cfg)
    }

    fn insert(&mut self, key: &str, value: &str, origin: String) {
        self.values.insert(key.to_string(), value.to_string());
        self.origins.insert(key.to_string(), origin);
    }

    /// Applies a `key=value` override, replacing any existing entry.
    pub fn apply_override(&mut self, entry: &str) -> Result<()> {
        let (key, value) = split_entry(entry).map_err(|m| config_err("--set", m))?;
        self.insert(key, value, format!("--set {key}"));
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.insert(key, &value.to_string(), format!("key '{key}'"));
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// One `key = value` line per entry, sorted by key.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    fn origin(&self, key: &str) -> String {
        self.origins.get(key).cloned().unwrap_or_else(|| format!("key '{key}'"))
    }

    fn typed_err(&self, key: &str, what: &str, value: &str) -> Error {
        config_err(&self.origin(key), format!("'{key}' expects {what}, got '{value}'"))
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require_str(&self, key: &str) -> Result<&str> {
        self.get_str(key).ok_or_else(|| missing(key))
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get_str(key)
            .map(|v| parse_f64(v).ok_or_else(|| self.typed_err(key, "a number", v)))
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.get_f64(key)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.get_f64(key)?.ok_or_else(|| missing(key))
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.get_str(key)
            .map(|v| v.parse::<u64>().map_err(|_| self.typed_err(key, "a non-negative integer", v)))
            .transpose()
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.get_u64(key)?.unwrap_or(default))
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>> {
        self.get_str(key)
            .map(|v| match v {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(self.typed_err(key, "a boolean", v)),
            })
            .transpose()
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        Ok(self.get_bool(key)?.unwrap_or(default))
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get_str(key)
            .map(|v| parse_list(v).ok_or_else(|| self.typed_err(key, "a comma-separated list of numbers", v)))
            .transpose()
    }

    pub fn get_u64_list(&self, key: &str) -> Result<Option<Vec<u64>>> {
        self.get_str(key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim().parse::<u64>().ok())
                    .collect::<Option<Vec<_>>>()
                    .filter(|l| !l.is_empty())
                    .ok_or_else(|| self.typed_err(key, "a comma-separated list of integers", v))
            })
            .transpose()
    }

    /// `;`-separated vectors of comma-separated numbers.
    pub fn get_vectors(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>> {
        self.get_str(key)
            .map(|v| {
                v.split(';')
                    .map(parse_list)
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| self.typed_err(key, "';'-separated vectors", v))
            })
            .transpose()
    }

    /// Error attributed to the line that defined `key`.
    pub fn error_at(&self, key: &str, message: impl Into<String>) -> Error {
        config_err(&self.origin(key), message.into())
    }
}

fn split_entry(line: &str) -> std::result::Result<(&str, &str), String> {
    let (key, value) = line
        .split_once('=')
        .ok_or_else(|| format!("expected 'key = value', got '{line}'"))?;
    let key = key.trim();
    let value = value.trim();
    if !valid_key(key) {
        return Err(format!("invalid key '{key}'"));
    }
    if value.is_empty() {
        return Err(format!("empty value for '{key}'"));
    }
    Ok((key, value))
}

fn parse_f64(v: &str) -> Option<f64> {
    match v.trim() {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        s => s.parse::<f64>().ok().filter(|x| !x.is_nan()),
    }
}

fn parse_list(v: &str) -> Option<Vec<f64>> {
    let out: Option<Vec<f64>> = v.split(',').map(parse_f64).collect();
    out.filter(|l| !l.is_empty())
}

fn config_err(location: &str, message: impl Into<String>) -> Error {
    Error::Config { location: location.to_string(), message: message.into() }
}

fn missing(key: &str) -> Error {
    config_err("config", format!("missing required key '{key}'"))
}

/// Comma-joined shortest round-trip representation.
pub fn format_list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}
