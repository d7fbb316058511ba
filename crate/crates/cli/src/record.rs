use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::scenario::{Experiment, Scenario};

/// Everything one run produced. Identical scenario and seed give identical
/// records apart from `wall_clock_seconds`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub experiment: Experiment,
    /// SHA-256 of the canonical scenario and of every file it references.
    pub scenario_digest: String,
    pub seed: u64,
    pub trials: usize,
    pub passed: bool,
    pub results: Vec<Value>,
    pub aggregates: Value,
    /// Simulated hardware time in seconds, where the experiment has one.
    pub model_time: Option<f64>,
    pub wall_clock_seconds: f64,
}

pub fn scenario_digest(s: &Scenario) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(s)?);
    for p in [&s.target.circuit, &s.target.pattern].into_iter().flatten() {
        h.update(std::fs::read(p).with_context(|| format!("cannot read {}", p.display()))?);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Per-trial rows as CSV; columns follow the first row's keys.
pub fn results_csv(results: &[Value]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(Value::Object(first)) = results.first() {
        let header: Vec<&String> = first.keys().collect();
        w.write_record(&header)?;
        for row in results {
            w.write_record(header.iter().map(|k| cell(row.get(k.as_str()).unwrap_or(&Value::Null))))?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Writes `record.json`, `results.csv` and any traces into `dir`.
pub fn write_dir(dir: &Path, record: &RunRecord, traces: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    std::fs::write(dir.join("record.json"), serde_json::to_string_pretty(record)?)?;
    std::fs::write(dir.join("results.csv"), results_csv(&record.results)?)?;
    for (name, text) in traces {
        std::fs::write(dir.join(name), text)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_quotes_and_orders_columns() {
        let rows = vec![json!({"b": "x,y", "a": 1}), json!({"a": 2.5, "b": null})];
        assert_eq!(results_csv(&rows).unwrap(), "a,b\n1,\"x,y\"\n2.5,\n");
        assert_eq!(results_csv(&[]).unwrap(), "");
    }
}
