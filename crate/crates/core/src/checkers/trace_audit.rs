//! Streaming checks over the trace, usable as a sink so that long runs need
//! not keep their events in memory.

use std::collections::BTreeSet;
use std::io;

use crate::engine::{Step, TraceEvent, TraceSink};
use crate::graph::NodeId;
use crate::robots::RobotId;

#[derive(Debug, Clone, Default)]
pub struct TraceAudit {
    terminated: BTreeSet<RobotId>,
    /// Events emitted by a robot after its terminating compute step.
    pub after_termination: Vec<(RobotId, u64)>,
    /// Nodes where a member of the stage-1 group was seen.
    pub group_visited: BTreeSet<NodeId>,
    /// Rounds where the stream went backwards in round or step order.
    pub out_of_order: Vec<u64>,
    last: Option<(u64, Step)>,
    pub events: u64,
}

impl TraceAudit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, e: &TraceEvent) {
        self.events += 1;
        if let Some(last) = self.last {
            if (e.round, e.step) < last {
                self.out_of_order.push(e.round);
            }
        }
        self.last = Some((e.round, e.step));
        if self.terminated.contains(&e.robot) {
            self.after_termination.push((e.robot, e.round));
        }
        let group_member = e.vars.settled == 0 || (e.step == Step::Compute && e.action.contains("settle"));
        if group_member {
            self.group_visited.insert(e.node);
        }
        if e.step == Step::Move && e.vars.settled == 0 {
            if let Some(dest) = e.action.rsplit("-> ").next().and_then(|v| v.parse().ok()) {
                self.group_visited.insert(dest);
            }
        }
        if e.step == Step::Compute && e.action.split('+').any(|a| a == "terminate") {
            self.terminated.insert(e.robot);
        }
    }
}

impl TraceSink for TraceAudit {
    fn record(&mut self, event: &TraceEvent) -> io::Result<()> {
        self.observe(event);
        Ok(())
    }
}

/// Forwards every event to two sinks.
pub struct Tee<'a>(pub &'a mut dyn TraceSink, pub &'a mut dyn TraceSink);

impl TraceSink for Tee<'_> {
    fn record(&mut self, event: &TraceEvent) -> io::Result<()> {
        self.0.record(event)?;
        self.1.record(event)
    }
}
