use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportParams {
    pub p: Option<u32>,
    pub d: Option<usize>,
    pub truncation: Option<u32>,
    pub seed: Option<u64>,
    pub trials: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub description: String,
    pub status: CaseStatus,
    pub witness: serde_json::Value,
}

/// Outcome of one suite. Overall status is pass iff every case passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub params: ReportParams,
    pub cases: Vec<Case>,
    pub status: CaseStatus,
}

impl VerifyReport {
    pub fn new(suite: impl Into<String>, params: ReportParams) -> Self {
        VerifyReport {
            suite: suite.into(),
            params,
            cases: Vec::new(),
            status: CaseStatus::Pass,
        }
    }

    pub fn push(&mut self, description: impl Into<String>, ok: bool, witness: serde_json::Value) {
        let status = if ok { CaseStatus::Pass } else { CaseStatus::Fail };
        if !ok {
            self.status = CaseStatus::Fail;
        }
        self.cases.push(Case {
            description: description.into(),
            status,
            witness,
        });
    }

    /// Appends every case of `other`, prefixing descriptions with its suite.
    pub fn absorb(&mut self, other: VerifyReport) {
        for c in other.cases {
            self.push(
                format!("[{}] {}", other.suite, c.description),
                c.status == CaseStatus::Pass,
                c.witness,
            );
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CaseStatus::Pass
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| c.status == CaseStatus::Fail)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "suite {}: {} ({} cases, {} failed)",
            self.suite,
            if self.passed() { "PASS" } else { "FAIL" },
            self.cases.len(),
            self.failures().count()
        );
        for c in &self.cases {
            let tag = match c.status {
                CaseStatus::Pass => "ok  ",
                CaseStatus::Fail => "FAIL",
            };
            let _ = writeln!(s, "  {tag} {}", c.description);
            if c.status == CaseStatus::Fail && !c.witness.is_null() {
                let _ = writeln!(s, "       witness: {}", c.witness);
            }
        }
        s
    }
}
