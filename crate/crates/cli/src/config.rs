//! Flat `key = value` experiment configuration.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment to end of line
//! key = value
//! ```
//!
//! Keys are case-sensitive identifiers (`n` and `N` differ). A value is a
//! single token, a comma-separated list, or an inclusive integer range
//! `lo..hi` with an optional step `lo..hi:step`; lists may mix both forms.
//! Repeated keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{config_err, HarnessError, Result};

/// Upper limit on the number of values a single range may expand to.
const MAX_EXPANSION: u64 = 1_000_000;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let Some((key, value)) = line.split_once('=') else {
                return config_err(format!("line {lineno}: expected `key = value`"));
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return config_err(format!("line {lineno}: invalid key `{key}`"));
            }
            if value.is_empty() {
                return config_err(format!("line {lineno}: empty value for `{key}`"));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return config_err(format!("line {lineno}: duplicate key `{key}`"));
            }
        }
        Ok(Config { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, experiment: &str, allowed: &[&str]) -> Result<()> {
        for key in self.keys() {
            if !allowed.contains(&key) && !GLOBAL_KEYS.contains(&key) {
                return config_err(format!("key `{key}` is not used by `{experiment}`"));
            }
        }
        Ok(())
    }

    pub fn string(&self, key: &str) -> Option<&str> {
        self.raw(key)
    }

    pub fn u64_opt(&self, key: &str) -> Result<Option<u64>> {
        self.raw(key).map(|v| parse_u64(key, v)).transpose()
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.u64_opt(key)?.unwrap_or(default))
    }

    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    /// Integer list with range expansion; `None` when the key is absent.
    pub fn u64_list_opt(&self, key: &str) -> Result<Option<Vec<u64>>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let mut out = Vec::new();
        for item in v.split(',').map(str::trim) {
            if let Some((lo, rest)) = item.split_once("..") {
                let (hi, step) = match rest.split_once(':') {
                    Some((hi, step)) => (hi, parse_u64(key, step)?),
                    None => (rest, 1),
                };
                let (lo, hi) = (parse_u64(key, lo)?, parse_u64(key, hi)?);
                if step == 0 || lo > hi {
                    return config_err(format!("`{key}`: empty or invalid range `{item}`"));
                }
                if (hi - lo) / step >= MAX_EXPANSION {
                    return config_err(format!("`{key}`: range `{item}` is too long"));
                }
                out.extend((lo..=hi).step_by(step as usize));
            } else {
                out.push(parse_u64(key, item)?);
            }
        }
        Ok(Some(out))
    }

    pub fn u64_list(&self, key: &str) -> Result<Vec<u64>> {
        self.u64_list_opt(key)?.ok_or_else(|| HarnessError::Config(format!("missing key `{key}`")))
    }

    pub fn u64_list_or(&self, key: &str, default: &[u64]) -> Result<Vec<u64>> {
        Ok(self.u64_list_opt(key)?.unwrap_or_else(|| default.to_vec()))
    }

    pub fn f64_list_opt(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        v.split(',').map(|s| parse_f64(key, s.trim())).collect::<Result<Vec<_>>>().map(Some)
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.f64_list_opt(key)?.ok_or_else(|| HarnessError::Config(format!("missing key `{key}`")))
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        Ok(self.f64_list_opt(key)?.unwrap_or_else(|| default.to_vec()))
    }

    /// One of `choices`, defaulting to the first.
    pub fn choice<'a>(&self, key: &str, choices: &[&'a str]) -> Result<&'a str> {
        match self.raw(key) {
            None => Ok(choices[0]),
            Some(v) => choices
                .iter()
                .find(|&&c| c == v)
                .copied()
                .ok_or_else(|| HarnessError::Config(format!("`{key}` must be one of {choices:?}, got `{v}`"))),
        }
    }
}

/// Keys accepted by every experiment.
pub const GLOBAL_KEYS: &[&str] = &["experiment", "out", "threads"];

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.trim().parse().map_err(|_| HarnessError::Config(format!("`{key}`: `{v}` is not a non-negative integer")))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => config_err(format!("`{key}`: `{v}` is not a finite number")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalars_lists_and_ranges() {
        let c = Config::parse("# sweep\nn = 2, 3, 10..12\nN=1\nk = 12..20:4 # weights\ndelta = 0.25\n").unwrap();
        assert_eq!(c.u64_list("n").unwrap(), vec![2, 3, 10, 11, 12]);
        assert_eq!(c.u64_list("k").unwrap(), vec![12, 16, 20]);
        assert_eq!(c.u64_or("N", 7).unwrap(), 1);
        assert_eq!(c.f64_or("delta", 0.3).unwrap(), 0.25);
        assert_eq!(c.u64_or("p", 2).unwrap(), 2);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(Config::parse("n 2").is_err());
        assert!(Config::parse("n = 2\nn = 3").is_err());
        assert!(Config::parse("n =").is_err());
        assert!(Config::parse("bad key = 1").is_err());
        let c = Config::parse("n = 5..2\nk = x\ndelta = nan").unwrap();
        assert!(c.u64_list("n").is_err());
        assert!(c.u64_list("k").is_err());
        assert!(c.f64_opt("delta").is_err());
        let c = Config::parse("kind = odd").unwrap();
        assert!(c.choice("kind", &["new", "full"]).is_err());
        assert!(c.check_keys("trace", &["n"]).is_err());
    }
}
