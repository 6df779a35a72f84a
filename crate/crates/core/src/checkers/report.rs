use std::fmt;

use serde::Serialize;

use crate::graph::NodeId;
use crate::robots::RobotId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// Evidence for a failed check, checkable against the graph file alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    Node(NodeId),
    Edge(NodeId, NodeId),
    Robot(RobotId),
    Round(u64),
    Detail(String),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Node(u) => write!(f, "node {u}"),
            Witness::Edge(u, v) => write!(f, "edge ({u},{v})"),
            Witness::Robot(r) => write!(f, "robot {r}"),
            Witness::Round(t) => write!(f, "round {t}"),
            Witness::Detail(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: &'static str,
    pub verdict: Verdict,
    pub witness: Vec<Witness>,
    /// The property being verified, in plain words.
    pub claim: &'static str,
}

impl CheckReport {
    pub fn pass(check: &'static str, claim: &'static str) -> Self {
        CheckReport { check, verdict: Verdict::Pass, witness: Vec::new(), claim }
    }

    pub fn skipped(check: &'static str, claim: &'static str, why: &str) -> Self {
        CheckReport { check, verdict: Verdict::Skipped, witness: vec![Witness::Detail(why.into())], claim }
    }

    /// Fails when `witness` is non-empty, passes otherwise.
    pub fn from_witness(check: &'static str, claim: &'static str, witness: Vec<Witness>) -> Self {
        let verdict = if witness.is_empty() { Verdict::Pass } else { Verdict::Fail };
        CheckReport { check, verdict, witness, claim }
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports always serialize")
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "SKIP",
        };
        write!(f, "{tag} {}", self.check)?;
        if !self.witness.is_empty() {
            let shown: Vec<String> = self.witness.iter().take(8).map(Witness::to_string).collect();
            write!(f, ": {}", shown.join(", "))?;
            if self.witness.len() > 8 {
                write!(f, ", ... ({} total)", self.witness.len())?;
            }
        }
        Ok(())
    }
}

pub fn all_passed(reports: &[CheckReport]) -> bool {
    !reports.iter().any(CheckReport::failed)
}
