use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::graph::NodeId;
use crate::robots::{RobotId, RobotState, Travel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Comm,
    Compute,
    Move,
}

/// Snapshot of the audited robot variables. Ports use `-1` for "none".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vars {
    pub state: Travel,
    pub stage: u8,
    pub settled: u8,
    pub act_settled: u8,
    pub special: i8,
    pub terminate: u8,
    pub dist: u8,
    pub parent: i64,
    pub portentered: i64,
    pub virtualparent: i64,
    pub count: u32,
    pub count_prime: u32,
    pub phi: u32,
}

fn port_or_neg(p: Option<usize>) -> i64 {
    p.map_or(-1, |p| p as i64)
}

impl From<&RobotState> for Vars {
    fn from(s: &RobotState) -> Self {
        Vars {
            state: s.state,
            stage: s.stage,
            settled: s.settled as u8,
            act_settled: s.act_settled as u8,
            special: s.special,
            terminate: s.terminate as u8,
            dist: s.dist,
            parent: port_or_neg(s.parent),
            portentered: port_or_neg(s.portentered),
            virtualparent: port_or_neg(s.virtualparent),
            count: s.count,
            count_prime: s.count_prime,
            phi: s.phi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEvent {
    pub round: u64,
    pub step: Step,
    pub robot: RobotId,
    pub node: NodeId,
    pub action: String,
    pub vars: Vars,
}

impl TraceEvent {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace events always serialize")
    }

    pub fn from_json_line(line: &str) -> Result<TraceEvent, serde_json::Error> {
        serde_json::from_str(line)
    }
}

/// Receives every trace event in emission order.
pub trait TraceSink {
    fn record(&mut self, event: &TraceEvent) -> io::Result<()>;
}

impl TraceSink for Vec<TraceEvent> {
    fn record(&mut self, event: &TraceEvent) -> io::Result<()> {
        self.push(event.clone());
        Ok(())
    }
}

/// Writes one JSON object per line.
pub struct JsonLines<W: Write>(pub W);

impl<W: Write> TraceSink for JsonLines<W> {
    fn record(&mut self, event: &TraceEvent) -> io::Result<()> {
        serde_json::to_writer(&mut self.0, event)?;
        self.0.write_all(b"\n")
    }
}
