//! Experiment reports and their CSV / JSON forms.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "L")]
    pub l: u64,
    pub gamma: String,
    pub psi: i8,
    pub empirical: f64,
    pub predicted: f64,
    /// empirical/predicted, or |empirical| when nothing is predicted.
    pub ratio: f64,
    pub xi: Option<u8>,
    pub runtime_ms: u64,
}

impl Row {
    pub fn ratio_of(empirical: f64, predicted: f64) -> f64 {
        if predicted != 0.0 {
            empirical / predicted
        } else {
            empirical.abs()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub rows: Vec<Row>,
    pub constants: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        Self { experiment: experiment.to_string(), ..Self::default() }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn verdict(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict { name: name.to_string(), pass, detail: detail.into() });
    }

    pub fn clear_runtimes(&mut self) {
        self.rows.iter_mut().for_each(|r| r.runtime_ms = 0);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record(["experiment", "B", "L", "gamma", "psi", "empirical", "predicted", "ratio", "xi", "runtime_ms"])?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human summary: constants, then one line per verdict.
    pub fn summary(&self) -> String {
        let mut s = format!("experiment {}\n", self.experiment);
        for (k, v) in &self.constants {
            s += &format!("  {k} = {v:.10e}\n");
        }
        for w in &self.warnings {
            s += &format!("  warning: {w}\n");
        }
        for v in &self.verdicts {
            s += &format!("  [{}] {}: {}\n", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
        }
        s
    }
}
