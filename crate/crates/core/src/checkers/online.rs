//! Invariants asserted while a run is in progress.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{NodeId, PortLabeledGraph};
use crate::robots::{Decision, LastRole, Motion, Notes, RobotId, RobotState, Strategy, Travel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("round {round}: {check} violated by robots {robots:?}: {detail}")]
pub struct InvariantViolation {
    pub round: u64,
    pub check: &'static str,
    pub robots: Vec<RobotId>,
    pub detail: String,
}

/// Per-round view handed to the monitor by the engine.
pub struct RoundView<'a> {
    pub round: u64,
    pub graph: &'a PortLabeledGraph,
    pub robots: &'a [RobotState],
    pub pos: &'a [NodeId],
    pub homes: &'a [Option<NodeId>],
}

#[derive(Debug, Clone)]
struct Stay {
    node: NodeId,
    seen: BTreeSet<RobotId>,
}

#[derive(Debug, Clone)]
pub struct OnlineMonitor {
    strategy: Strategy,
    delta: u32,
    stay: Option<Stay>,
    /// Movers that stood at a distance-1 node in explore state at the last comm step.
    forward_at_one: BTreeSet<RobotId>,
}

impl OnlineMonitor {
    pub fn new(strategy: Strategy, delta: usize) -> Self {
        OnlineMonitor { strategy, delta: delta as u32, stay: None, forward_at_one: BTreeSet::new() }
    }

    fn group(v: &RoundView<'_>) -> Vec<usize> {
        (0..v.robots.len()).filter(|&i| !v.robots[i].settled && !v.robots[i].halted).collect()
    }

    /// Checks run on the comm step; `arrived` marks robots that moved last round.
    pub fn after_comm(&mut self, v: &RoundView<'_>, arrived: &[bool]) -> Result<(), InvariantViolation> {
        let fail = |check, robots: Vec<RobotId>, detail: String| {
            Err(InvariantViolation { round: v.round, check, robots, detail })
        };
        let group = Self::group(v);
        self.forward_at_one = v
            .robots
            .iter()
            .enumerate()
            .filter(|&(i, r)| {
                (group.contains(&i) || (r.role == LastRole::Replay && !r.halted))
                    && r.state == Travel::Explore
                    && r.dist == 1
                    && r.portentered.is_some()
            })
            .map(|(_, r)| r.id)
            .collect();
        if let Some(&g0) = group.first() {
            let node = v.pos[g0];
            let phi = v.robots[g0].phi;
            if let Some(&i) = group.iter().find(|&&i| v.pos[i] != node) {
                return fail("group cohesion", vec![v.robots[g0].id, v.robots[i].id], "group split".into());
            }
            if let Some(&i) = group.iter().find(|&&i| v.robots[i].phi != phi) {
                return fail(
                    "phi agreement",
                    vec![v.robots[g0].id, v.robots[i].id],
                    format!("{} vs {}", phi, v.robots[i].phi),
                );
            }
            if phi > self.delta {
                return fail("phi bound", vec![v.robots[g0].id], format!("phi {phi} > delta {}", self.delta));
            }
            let lead = &v.robots[g0];
            if self.strategy == Strategy::Main
                && lead.state == Travel::Explore
                && lead.dist == 1
                && lead.portentered.is_some()
            {
                self.unique_special(v, node, false)?;
            }
            if arrived[g0] {
                self.stay = Some(Stay { node, seen: BTreeSet::new() });
            }
            if let Some(stay) = self.stay.as_mut() {
                for (i, r) in v.robots.iter().enumerate() {
                    if r.settled && !r.halted && v.pos[i] == stay.node {
                        stay.seen.insert(r.id);
                    }
                }
            }
        }
        for (i, r) in v.robots.iter().enumerate() {
            if r.role == LastRole::Replay && !r.halted && r.state == Travel::Explore && r.dist == 1 {
                self.unique_special(v, v.pos[i], true)?;
            }
        }
        Ok(())
    }

    fn unique_special(&self, v: &RoundView<'_>, node: NodeId, act: bool) -> Result<(), InvariantViolation> {
        let specials: Vec<RobotId> = v
            .robots
            .iter()
            .enumerate()
            .filter(|&(i, r)| v.pos[i] == node && r.settled && !r.halted && r.special == 1)
            .filter(|(_, r)| !act || r.act_settled)
            .map(|(_, r)| r.id)
            .collect();
        if specials.len() == 1 {
            Ok(())
        } else {
            Err(InvariantViolation {
                round: v.round,
                check: "unique special",
                robots: specials.clone(),
                detail: format!("{} special robots at node {node}", specials.len()),
            })
        }
    }

    /// Checks run after every robot has computed, before moves are applied.
    /// `was_group` marks robots that were unsettled at the start of the round.
    pub fn after_compute(
        &mut self,
        v: &RoundView<'_>,
        decisions: &[Option<Decision>],
        was_group: &[bool],
    ) -> Result<(), InvariantViolation> {
        if self.strategy == Strategy::Main {
            for (i, r) in v.robots.iter().enumerate() {
                let Some(Some((Motion::Explore, _))) = decisions[i].map(|d| d.movement) else { continue };
                if self.forward_at_one.contains(&r.id) && r.dist == 2 {
                    self.virtual_parent_recorded(v, i)?;
                }
            }
        }

        let Some(stay) = self.stay.as_ref() else { return Ok(()) };
        let group_done = (0..v.robots.len()).any(|i| was_group[i] && decisions[i].is_some_and(|d| !d.is_quiet()));
        if !group_done {
            return Ok(());
        }
        let w = stay.node;
        let missed: Vec<RobotId> = v
            .robots
            .iter()
            .enumerate()
            .filter(|&(i, r)| {
                let just_settled = decisions[i].is_some_and(|d| d.notes.contains(Notes::SETTLE));
                r.settled
                    && !r.halted
                    && !just_settled
                    && v.homes[i].is_some_and(|h| h == w || v.graph.are_adjacent(h, w))
                    && !stay.seen.contains(&r.id)
            })
            .map(|(_, r)| r.id)
            .collect();
        self.stay = None;
        if missed.is_empty() {
            Ok(())
        } else {
            Err(InvariantViolation {
                round: v.round,
                check: "settled-robot reachability",
                robots: missed,
                detail: format!("not met during the wait at node {w}"),
            })
        }
    }

    fn virtual_parent_recorded(&self, v: &RoundView<'_>, mover: usize) -> Result<(), InvariantViolation> {
        let node = v.pos[mover];
        let entry = v.robots[mover].portentered;
        let act = v.robots[mover].role == LastRole::Replay;
        let ok = v.robots.iter().enumerate().any(|(i, r)| {
            v.pos[i] == node
                && r.settled
                && r.special == 1
                && (!act || r.act_settled)
                && r.virtualparent == entry
                && r.vp_port.is_some()
                && r.vp_port == r.osc.out
        });
        if ok {
            Ok(())
        } else {
            Err(InvariantViolation {
                round: v.round,
                check: "virtualparent recorded",
                robots: vec![v.robots[mover].id],
                detail: format!("leaving node {node} forward with no stored parent port"),
            })
        }
    }
}
