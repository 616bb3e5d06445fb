//! Check records produced by the verification probes and consumed by the
//! command-line driver.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Outcome of a single check. `TheoremViolation` marks a failure of a claim
/// that holds unconditionally, as opposed to an ordinary broken expectation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Skipped,
    Fail,
    TheoremViolation,
}

impl Status {
    /// Pass and Skipped count as acceptable outcomes.
    pub fn is_ok(self) -> bool {
        matches!(self, Status::Pass | Status::Skipped)
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::Pass => "pass",
            Status::Skipped => "skipped",
            Status::Fail => "fail",
            Status::TheoremViolation => "theorem-violation",
        };
        write!(f, "{s}")
    }
}

/// One named check with its parameters, outcome, exact numeric evidence, and
/// any witness elements rendered in the element grammar. Maps keep keys
/// sorted so serialization is canonical.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub parameters: BTreeMap<String, String>,
    pub status: Status,
    pub evidence: BTreeMap<String, i64>,
    pub witnesses: Vec<String>,
}

impl Report {
    pub fn new(name: &str) -> Report {
        Report {
            name: name.to_string(),
            parameters: BTreeMap::new(),
            status: Status::Pass,
            evidence: BTreeMap::new(),
            witnesses: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Report {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn evidence(mut self, key: &str, value: i64) -> Report {
        self.evidence.insert(key.to_string(), value);
        self
    }

    pub fn witness(mut self, w: impl Into<String>) -> Report {
        self.witnesses.push(w.into());
        self
    }

    pub fn status(mut self, status: Status) -> Report {
        self.status = status;
        self
    }

    /// Record a numeric fact after construction.
    pub fn note(&mut self, key: &str, value: i64) {
        self.evidence.insert(key.to_string(), value);
    }

    /// Keep the worse of the current status and `status`.
    pub fn escalate(&mut self, status: Status) {
        if status > self.status {
            self.status = status;
        }
    }
}
