//! Experiment records: one JSON object per line, plus a flat CSV view.
//!
//! ```text
//! {"experiment": "trace",
//!  "parameters": {"n": 2, "k": 12, "N": 1, "kind": "new"},
//!  "outputs": {"total": -0.5303300858899106, ...},
//!  "provenance": {"version": "0.1.0", "timestamp": "2026-...Z",
//!                 "truncation": {...}, "elapsed_seconds": 0.001}}
//! ```
//!
//! Outputs are numbers; the non-finite values NaN, inf and -inf are written
//! as the strings "NaN", "inf" and "-inf" so that every record round-trips.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub timestamp: String,
    /// Truncation parameters and certified bounds behind the outputs.
    #[serde(serialize_with = "ser_numbers", deserialize_with = "de_numbers")]
    pub truncation: BTreeMap<String, f64>,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub parameters: BTreeMap<String, Value>,
    #[serde(serialize_with = "ser_numbers", deserialize_with = "de_numbers")]
    pub outputs: BTreeMap<String, f64>,
    pub provenance: Provenance,
}

impl ExperimentRecord {
    pub fn new(experiment: &str) -> Self {
        ExperimentRecord {
            experiment: experiment.to_string(),
            parameters: BTreeMap::new(),
            outputs: BTreeMap::new(),
            provenance: Provenance {
                version: VERSION.to_string(),
                timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
                truncation: BTreeMap::new(),
                elapsed_seconds: 0.0,
            },
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn output(mut self, key: &str, value: f64) -> Self {
        self.outputs.insert(key.to_string(), value);
        self
    }

    pub fn truncation(mut self, key: &str, value: f64) -> Self {
        self.provenance.truncation.insert(key.to_string(), value);
        self
    }

    pub fn elapsed(mut self, seconds: f64) -> Self {
        self.provenance.elapsed_seconds = seconds;
        self
    }

    pub fn to_json_line(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        Ok(serde_json::from_str(line)?)
    }

    /// The record with wall-clock fields cleared, for run-to-run comparison.
    pub fn without_clock(&self) -> Self {
        let mut r = self.clone();
        r.provenance.timestamp.clear();
        r.provenance.elapsed_seconds = 0.0;
        r
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Number {
    Finite(f64),
    Special(String),
}

fn ser_numbers<S: Serializer>(map: &BTreeMap<String, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let encoded: BTreeMap<&String, Number> = map
        .iter()
        .map(|(k, &v)| {
            let n = if v.is_finite() {
                Number::Finite(v)
            } else if v.is_nan() {
                Number::Special("NaN".into())
            } else if v > 0.0 {
                Number::Special("inf".into())
            } else {
                Number::Special("-inf".into())
            };
            (k, n)
        })
        .collect();
    encoded.serialize(s)
}

fn de_numbers<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<String, f64>, D::Error> {
    let raw = BTreeMap::<String, Number>::deserialize(d)?;
    raw.into_iter()
        .map(|(k, n)| {
            let v = match n {
                Number::Finite(v) => v,
                Number::Special(s) => match s.as_str() {
                    "NaN" => f64::NAN,
                    "inf" => f64::INFINITY,
                    "-inf" => f64::NEG_INFINITY,
                    other => return Err(serde::de::Error::custom(format!("unknown number `{other}`"))),
                },
            };
            Ok((k, v))
        })
        .collect()
}

pub fn write_json_lines(records: &[ExperimentRecord], mut w: impl Write) -> Result<()> {
    for r in records {
        writeln!(w, "{}", r.to_json_line()?)?;
    }
    Ok(())
}

/// Flat CSV with columns `experiment`, then `param.*`, `out.*` and
/// `trunc.*` over the union of keys, in sorted order.
pub fn write_csv(records: &[ExperimentRecord], w: impl Write) -> Result<()> {
    let mut params = std::collections::BTreeSet::new();
    let mut outs = std::collections::BTreeSet::new();
    let mut truncs = std::collections::BTreeSet::new();
    for r in records {
        params.extend(r.parameters.keys().cloned());
        outs.extend(r.outputs.keys().cloned());
        truncs.extend(r.provenance.truncation.keys().cloned());
    }
    let mut writer = csv::Writer::from_writer(w);
    let mut header = vec!["experiment".to_string()];
    header.extend(params.iter().map(|k| format!("param.{k}")));
    header.extend(outs.iter().map(|k| format!("out.{k}")));
    header.extend(truncs.iter().map(|k| format!("trunc.{k}")));
    header.push("timestamp".into());
    writer.write_record(&header)?;
    for r in records {
        let mut row = vec![r.experiment.clone()];
        row.extend(params.iter().map(|k| match r.parameters.get(k) {
            Some(Value::String(s)) => s.clone(),
            Some(v) => v.to_string(),
            None => String::new(),
        }));
        row.extend(outs.iter().map(|k| r.outputs.get(k).map(|v| v.to_string()).unwrap_or_default()));
        row.extend(truncs.iter().map(|k| r.provenance.truncation.get(k).map(|v| v.to_string()).unwrap_or_default()));
        row.push(r.provenance.timestamp.clone());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_lossless() {
        let r = ExperimentRecord::new("trace")
            .param("n", 2)
            .param("kind", "new")
            .output("total", -0.5303300858899106)
            .output("tiny", 1.0e-300_f64 * 0.1234567890123)
            .output("nan", f64::NAN)
            .output("neg_inf", f64::NEG_INFINITY)
            .truncation("c_max", 1500.0);
        let line = r.to_json_line().unwrap();
        assert!(!line.contains('\n'));
        let back = ExperimentRecord::from_json_line(&line).unwrap();
        assert_eq!(back.parameters, r.parameters);
        assert_eq!(back.provenance, r.provenance);
        for (k, v) in &r.outputs {
            assert_eq!(back.outputs[k].to_bits(), v.to_bits(), "{k}");
        }
    }

    #[test]
    fn csv_has_union_of_columns() {
        let a = ExperimentRecord::new("trace").param("n", 2).output("total", 1.5);
        let b = ExperimentRecord::new("trace").param("k", 12).output("dim", 1.0);
        let mut buf = Vec::new();
        write_csv(&[a, b], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, "experiment,param.k,param.n,out.dim,out.total,timestamp");
        assert_eq!(text.lines().count(), 3);
    }
}
