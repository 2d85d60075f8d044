use serde::{Deserialize, Serialize};

/// Outcome of a bounded verification, serialized as
/// `{check, ring, bound, pass, witnesses}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub ring: String,
    pub bound: u64,
    pub pass: bool,
    pub witnesses: Vec<String>,
}

impl Report {
    pub fn new(check: &str, ring: &str, bound: u64) -> Self {
        Report { check: check.to_string(), ring: ring.to_string(), bound, pass: true, witnesses: Vec::new() }
    }

    /// Records a failure witness.
    pub fn fail(&mut self, witness: impl Into<String>) {
        self.pass = false;
        self.witnesses.push(witness.into());
    }

    /// Records an informational witness without affecting `pass`.
    pub fn note(&mut self, witness: impl Into<String>) {
        self.witnesses.push(witness.into());
    }

    pub fn summary_line(&self) -> String {
        format!("{} {} [{} bound={}]", if self.pass { "PASS" } else { "FAIL" }, self.check, self.ring, self.bound)
    }
}
