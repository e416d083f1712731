//! Persistent memo cache: an append-only log of checksummed entries.
//!
//! The log lives in `cache.log` inside the cache directory. The first line is
//! the format header; every further line is
//!
//! ```text
//! <sha256 hex of payload> <payload JSON>
//! ```
//!
//! A line whose checksum or payload does not verify marks the log corrupt:
//! its verified entries are kept, the rest discarded, and the log is rewritten
//! on the next flush. An unterminated last line is an append in progress (or
//! an interrupted one); readers skip it and a writer rewrites the log. One process writes at a time; readers only ever see
//! complete verified lines.

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use hecke_core::class_numbers;
use hecke_core::eichler_selberg::d_coefficient;
use hecke_core::special_functions::bessel_j;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "HECKE_SPECTRA_CACHE";

const HEADER: &str = "hecke-spectra-cache v1";
const LOG_NAME: &str = "cache.log";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CacheKey {
    pub function: String,
    /// Canonical argument encoding; floats appear as their bit patterns.
    pub args: String,
}

impl CacheKey {
    pub fn new(function: &str, args: String) -> Self {
        CacheKey { function: function.to_string(), args }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CacheValue {
    /// An exact rational written as `p` or `p/q`.
    Exact { value: String },
    Float { value: f64, error: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: CacheKey,
    pub value: CacheValue,
}

/// What loading the log found.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub entries: usize,
    /// Complete lines that failed verification.
    pub rejected: usize,
    /// The last line is unterminated: an append in progress or interrupted.
    pub torn_tail: bool,
    /// The log will be rewritten from its verified entries on flush.
    pub rebuild: bool,
}

#[derive(Debug, Default)]
pub struct Cache {
    dir: Option<PathBuf>,
    entries: RwLock<HashMap<CacheKey, CacheValue>>,
    pending: Mutex<Vec<CacheEntry>>,
    rebuild: Mutex<bool>,
    report: LoadReport,
}

fn checksum(payload: &str) -> String {
    hex::encode(Sha256::digest(payload.as_bytes()))
}

fn encode_line(entry: &CacheEntry) -> Result<String> {
    let payload = serde_json::to_string(entry)?;
    Ok(format!("{} {payload}\n", checksum(&payload)))
}

fn decode_line(line: &str) -> Option<CacheEntry> {
    let (sum, payload) = line.split_once(' ')?;
    if sum != checksum(payload) {
        return None;
    }
    serde_json::from_str(payload).ok()
}

/// Verified entries of a log, in file order, with what was rejected.
pub fn read_log(path: &Path) -> Result<(Vec<CacheEntry>, LoadReport)> {
    let text = match fs::read(path) {
        Ok(bytes) => bytes,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((Vec::new(), LoadReport::default())),
        Err(e) => return Err(e.into()),
    };
    let mut report = LoadReport::default();
    let mut entries = Vec::new();
    let mut lines = text.split(|&b| b == b'\n').collect::<Vec<_>>();
    // The split leaves an empty tail after a final newline, or the torn line.
    if !lines.pop().unwrap_or_default().is_empty() {
        report.torn_tail = true;
        report.rebuild = true;
    }
    let mut iter = lines.into_iter();
    match iter.next() {
        None => {}
        Some(h) if h == HEADER.as_bytes() => {}
        Some(_) => {
            report.rejected += 1 + iter.len();
            report.rebuild = true;
            return Ok((entries, report));
        }
    }
    for raw in iter {
        match std::str::from_utf8(raw).ok().and_then(decode_line) {
            Some(entry) => entries.push(entry),
            None => {
                report.rejected += 1;
                report.rebuild = true;
            }
        }
    }
    report.entries = entries.len();
    Ok((entries, report))
}

impl Cache {
    /// A cache that never touches disk.
    pub fn in_memory() -> Self {
        Cache::default()
    }

    /// Opens (creating if needed) the cache in `dir` and seeds the class
    /// number memo of the core library from it.
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let (entries, report) = read_log(&dir.join(LOG_NAME))?;
        let mut map = HashMap::with_capacity(entries.len());
        for e in entries {
            map.insert(e.key, e.value);
        }
        let cache = Cache {
            dir: Some(dir.to_path_buf()),
            entries: RwLock::new(map),
            pending: Mutex::new(Vec::new()),
            rebuild: Mutex::new(report.rebuild),
            report,
        };
        class_numbers::cache_preload(cache.class_number_entries());
        Ok(cache)
    }

    /// Opens the directory named by [`CACHE_ENV`], or an in-memory cache.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CACHE_ENV) {
            Some(dir) if !dir.is_empty() => Self::open(Path::new(&dir)),
            _ => Ok(Self::in_memory()),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn load_report(&self) -> LoadReport {
        self.report
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &CacheKey) -> Option<CacheValue> {
        self.entries.read().unwrap().get(key).cloned()
    }

    /// Stores a value; an existing entry for the key is kept.
    pub fn put(&self, key: CacheKey, value: CacheValue) {
        let mut map = self.entries.write().unwrap();
        if map.contains_key(&key) {
            return;
        }
        map.insert(key.clone(), value.clone());
        self.pending.lock().unwrap().push(CacheEntry { key, value });
    }

    fn get_or_compute(&self, key: CacheKey, compute: impl FnOnce() -> Result<CacheValue>) -> Result<CacheValue> {
        if let Some(v) = self.get(&key) {
            return Ok(v);
        }
        let v = compute()?;
        self.put(key, v.clone());
        Ok(v)
    }

    fn class_number_entries(&self) -> Vec<(i64, u64)> {
        let map = self.entries.read().unwrap();
        map.iter()
            .filter(|(k, _)| k.function == "class_number")
            .filter_map(|(k, v)| match v {
                CacheValue::Exact { value } => Some((k.args.parse().ok()?, value.parse().ok()?)),
                CacheValue::Float { .. } => None,
            })
            .collect()
    }

    /// Copies class numbers memoized by the core library into the cache.
    pub fn absorb_class_numbers(&self) {
        for (d, h) in class_numbers::cache_snapshot() {
            self.put(CacheKey::new("class_number", d.to_string()), CacheValue::Exact { value: h.to_string() });
        }
    }

    /// Hurwitz class number H(n), exact.
    pub fn hurwitz_h(&self, n: u64) -> Result<BigRational> {
        let v = self.get_or_compute(CacheKey::new("hurwitz_H", n.to_string()), || {
            Ok(CacheValue::Exact { value: class_numbers::hurwitz_H(n)?.to_string() })
        })?;
        match v {
            CacheValue::Exact { value } => parse_rational(&value),
            CacheValue::Float { .. } => Err(corrupt_kind("hurwitz_H")),
        }
    }

    /// D_N(t, n).
    #[allow(non_snake_case)]
    pub fn d_coefficient(&self, t: i64, n: u64, N: u64) -> Result<f64> {
        let key = CacheKey::new("D", format!("{N},{t},{n}"));
        match self.get_or_compute(key, || Ok(CacheValue::Float { value: d_coefficient(t, n, N)?, error: 0.0 }))? {
            CacheValue::Float { value, .. } => Ok(value),
            CacheValue::Exact { .. } => Err(corrupt_kind("D")),
        }
    }

    /// J_order(x) with its certified absolute error.
    pub fn bessel_j(&self, order: u32, x: f64) -> Result<(f64, f64)> {
        let key = CacheKey::new("bessel_j", format!("{order},{:016x}", x.to_bits()));
        let v = self.get_or_compute(key, || {
            let b = bessel_j(order, x)?;
            Ok(CacheValue::Float { value: b.value, error: b.abs_error_bound })
        })?;
        match v {
            CacheValue::Float { value, error } => Ok((value, error)),
            CacheValue::Exact { .. } => Err(corrupt_kind("bessel_j")),
        }
    }

    /// Appends new entries to the log, or rewrites it when loading found
    /// damage. A no-op for in-memory caches.
    pub fn flush(&self) -> Result<()> {
        self.absorb_class_numbers();
        let Some(dir) = &self.dir else {
            self.pending.lock().unwrap().clear();
            return Ok(());
        };
        let path = dir.join(LOG_NAME);
        let mut rebuild = self.rebuild.lock().unwrap();
        let mut pending = self.pending.lock().unwrap();
        let fresh = !path.exists();
        if *rebuild || fresh {
            let map = self.entries.read().unwrap();
            let mut all: Vec<(&CacheKey, &CacheValue)> = map.iter().collect();
            all.sort_by(|a, b| a.0.cmp(b.0));
            let mut body = format!("{HEADER}\n");
            for (key, value) in all {
                body.push_str(&encode_line(&CacheEntry { key: key.clone(), value: value.clone() })?);
            }
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(body.as_bytes())?;
            tmp.as_file().sync_all()?;
            tmp.persist(&path).map_err(|e| HarnessError::Io(e.error))?;
            *rebuild = false;
        } else if !pending.is_empty() {
            pending.sort_by(|a, b| a.key.cmp(&b.key));
            let mut body = String::new();
            for entry in pending.iter() {
                body.push_str(&encode_line(entry)?);
            }
            let mut f = OpenOptions::new().append(true).open(&path)?;
            f.write_all(body.as_bytes())?;
            f.sync_data()?;
        }
        pending.clear();
        Ok(())
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || HarnessError::Config(format!("cache: malformed rational `{s}`"));
    match s.split_once('/') {
        Some((p, q)) => {
            let (p, q): (BigInt, BigInt) = (p.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?);
            if q == BigInt::from(0) {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

fn corrupt_kind(function: &str) -> HarnessError {
    HarnessError::Config(format!("cache: entry for {function} has the wrong value kind"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_get_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::open(dir.path()).unwrap();
        let h = c.hurwitz_h(11).unwrap();
        let j = c.bessel_j(11, 4.0 * std::f64::consts::PI).unwrap();
        c.flush().unwrap();
        let c2 = Cache::open(dir.path()).unwrap();
        assert_eq!(c2.load_report().rejected, 0);
        assert_eq!(c2.get(&CacheKey::new("hurwitz_H", "11".into())), Some(CacheValue::Exact { value: h.to_string() }));
        let back = c2.bessel_j(11, 4.0 * std::f64::consts::PI).unwrap();
        assert_eq!((back.0.to_bits(), back.1.to_bits()), (j.0.to_bits(), j.1.to_bits()));
        assert_eq!(c2.hurwitz_h(11).unwrap(), h);
    }

    #[test]
    fn corrupt_line_is_rejected_and_rebuilt() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::open(dir.path()).unwrap();
        for n in [3, 4, 7, 8, 11, 12, 15] {
            c.hurwitz_h(n).unwrap();
        }
        c.flush().unwrap();
        let path = dir.path().join(LOG_NAME);
        let text = fs::read_to_string(&path).unwrap();
        let damaged = text.replacen("\"hurwitz_H\"", "\"hurwitz_X\"", 1);
        fs::write(&path, damaged).unwrap();
        let c2 = Cache::open(dir.path()).unwrap();
        let r = c2.load_report();
        assert!(r.rebuild && r.rejected == 1);
        c2.flush().unwrap();
        let c3 = Cache::open(dir.path()).unwrap();
        assert_eq!(c3.load_report().rejected, 0);
        assert_eq!(c3.load_report().entries, r.entries);
    }

    #[test]
    fn torn_tail_and_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(LOG_NAME);
        fs::write(&path, format!("{HEADER}\nabc")).unwrap();
        let r = Cache::open(dir.path()).unwrap().load_report();
        assert_eq!((r.entries, r.rejected, r.torn_tail, r.rebuild), (0, 0, true, true));
        fs::write(&path, "garbage\nmore\n").unwrap();
        let r = Cache::open(dir.path()).unwrap().load_report();
        assert_eq!((r.entries, r.rejected, r.rebuild), (0, 2, true));
    }
}
