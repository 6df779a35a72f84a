//! Synchronous round scheduler.
//!
//! Each round: co-located robots exchange messages, every robot computes in
//! ascending id order, then all moves land at once.

mod audit;
mod ledger;
mod trace;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::checkers::online::{InvariantViolation, OnlineMonitor, RoundView};
use crate::graph::{EdgeId, NodeId, Port, PortLabeledGraph};
use crate::robots::{
    self, Decision, Fault, Inbox, LocalView, Message, Motion, Notes, Params, ProtocolError, RobotId, RobotState,
    Strategy,
};

pub use audit::{audit_memory, count_bound, MemoryViolation};
pub use ledger::{Direction, EdgeClass, EdgeRecord, TraversalLedger};
pub use trace::{JsonLines, Step, TraceEvent, TraceSink, Vars};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub strategy: Strategy,
    pub k: usize,
    pub root: NodeId,
    /// Defaults to `1..=k`.
    pub robot_ids: Option<Vec<RobotId>>,
    /// Required by the warm-up strategy.
    pub known_delta: Option<u32>,
    /// Defaults to [`default_round_cap`].
    pub max_rounds: Option<u64>,
    pub seed: u64,
    pub fault: Option<Fault>,
    pub online_checks: bool,
}

impl SimConfig {
    pub fn main(k: usize, root: NodeId) -> Self {
        SimConfig {
            strategy: Strategy::Main,
            k,
            root,
            robot_ids: None,
            known_delta: None,
            max_rounds: None,
            seed: 0,
            fault: None,
            online_checks: true,
        }
    }

    pub fn warmup(k: usize, root: NodeId, known_delta: u32) -> Self {
        SimConfig { strategy: Strategy::Warmup, known_delta: Some(known_delta), ..SimConfig::main(k, root) }
    }

    pub fn ids(&self) -> Vec<RobotId> {
        self.robot_ids.clone().unwrap_or_else(|| (1..=self.k as RobotId).collect())
    }

    pub fn validate(&self, g: &PortLabeledGraph) -> Result<(), ConfigError> {
        if self.k == 0 {
            return Err(ConfigError::NoRobots);
        }
        if self.root >= g.node_count() {
            return Err(ConfigError::RootOutOfRange { root: self.root, n: g.node_count() });
        }
        if let Some(ids) = &self.robot_ids {
            if ids.len() != self.k {
                return Err(ConfigError::IdCount { expected: self.k, found: ids.len() });
            }
            if ids.first() == Some(&0) {
                return Err(ConfigError::ZeroId);
            }
            if ids.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ConfigError::IdsNotIncreasing);
            }
        }
        if self.strategy == Strategy::Warmup {
            let kd = self.known_delta.ok_or(ConfigError::MissingKnownDelta)?;
            if (kd as usize) < g.max_degree() {
                return Err(ConfigError::KnownDeltaTooSmall { known: kd, delta: g.max_degree() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("at least one robot is required")]
    NoRobots,
    #[error("root {root} is not a node of a graph with {n} nodes")]
    RootOutOfRange { root: NodeId, n: usize },
    #[error("expected {expected} robot ids, found {found}")]
    IdCount { expected: usize, found: usize },
    #[error("robot ids must be positive")]
    ZeroId,
    #[error("robot ids must be strictly increasing")]
    IdsNotIncreasing,
    #[error("the warm-up strategy needs a known upper bound on the maximum degree")]
    MissingKnownDelta,
    #[error("known delta {known} is below the graph's maximum degree {delta}")]
    KnownDeltaTooSmall { known: u32, delta: usize },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("round {round}: {source}")]
    Protocol { round: u64, source: ProtocolError },
    #[error("round {round}: memory budget violated: {source}")]
    MemoryBudget { round: u64, source: MemoryViolation },
    #[error(transparent)]
    Invariant(#[from] InvariantViolation),
    #[error("round {round}: robot {robot} tried to leave node {node} through missing port {port}")]
    InvalidPort { round: u64, robot: RobotId, node: NodeId, port: Port },
    #[error("trace sink failed: {0}")]
    Trace(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaltReason {
    AllTerminated,
    AllSettled,
    RoundCap,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub strategy: Strategy,
    pub root: NodeId,
    /// Home node of every settled robot, ids ascending.
    pub placement: BTreeMap<NodeId, Vec<RobotId>>,
    /// Robots that never settled (only after a round cap), with their position.
    pub unsettled: Vec<(RobotId, NodeId)>,
    pub rounds_total: u64,
    /// Round in which the last robot settled.
    pub rounds_stage1: Option<u64>,
    pub ledger: TraversalLedger,
    pub robot_finals: Vec<RobotState>,
    pub halted_by: HaltReason,
    pub max_rounds: u64,
}

impl SimOutcome {
    pub fn k(&self) -> usize {
        self.robot_finals.len()
    }

    /// Number of robots settled at each occupied node.
    pub fn multiplicities(&self) -> BTreeMap<NodeId, usize> {
        self.placement.iter().map(|(&u, ids)| (u, ids.len())).collect()
    }
}

/// `4Δ(8m − 3n + 3) + 100`.
pub fn default_round_cap(g: &PortLabeledGraph) -> u64 {
    let (n, m, d) = (g.node_count() as i64, g.edge_count() as i64, g.max_degree() as i64);
    (4 * d * (8 * m - 3 * n + 3)).max(0) as u64 + 100
}

/// Messages of one round, grouped by node.
#[derive(Debug, Clone, Default)]
pub struct Mailboxes {
    msgs: Vec<Message>,
    /// Range of `msgs` shared by each robot's node; empty for halted robots.
    ranges: Vec<(usize, usize)>,
    ids: Vec<RobotId>,
}

impl Mailboxes {
    pub fn inbox(&self, robot: usize) -> Inbox<'_> {
        let (a, b) = self.ranges[robot];
        Inbox::new(&self.msgs[a..b], self.ids[robot])
    }
}

/// Full simulation state between rounds.
pub struct World<'g> {
    pub graph: &'g PortLabeledGraph,
    pub strategy: Strategy,
    pub params: Params,
    pub robots: Vec<RobotState>,
    pub pos: Vec<NodeId>,
    /// Arrival port of each robot's most recent move, if it moved last round.
    pub entered: Vec<Option<Port>>,
    pub homes: Vec<Option<NodeId>>,
    pub root: NodeId,
    pub round: u64,
    pub ledger: TraversalLedger,
    pub last_settle: Option<u64>,
    monitor: Option<OnlineMonitor>,
    company: Vec<Vec<RobotId>>,
    delta: usize,
}

impl<'g> World<'g> {
    pub fn new(graph: &'g PortLabeledGraph, config: &SimConfig) -> Result<Self, ConfigError> {
        config.validate(graph)?;
        let ids = config.ids();
        let delta = graph.max_degree();
        Ok(World {
            graph,
            strategy: config.strategy,
            params: Params { known_delta: config.known_delta.unwrap_or(delta as u32), fault: config.fault },
            robots: ids.iter().map(|&id| RobotState::new(id)).collect(),
            pos: vec![config.root; ids.len()],
            entered: vec![None; ids.len()],
            homes: vec![None; ids.len()],
            root: config.root,
            round: 0,
            ledger: TraversalLedger::default(),
            last_settle: None,
            monitor: config.online_checks.then(|| OnlineMonitor::new(config.strategy, delta)),
            company: vec![Vec::new(); ids.len()],
            delta,
        })
    }

    pub fn finished(&self) -> Option<HaltReason> {
        match self.strategy {
            Strategy::Main if self.robots.iter().all(|r| r.halted) => Some(HaltReason::AllTerminated),
            Strategy::Warmup if self.robots.iter().all(|r| r.settled) => Some(HaltReason::AllSettled),
            _ => None,
        }
    }

    pub fn deliver_messages(&self) -> Mailboxes {
        let mut order: Vec<usize> = (0..self.robots.len()).filter(|&i| !self.robots[i].halted).collect();
        order.sort_by_key(|&i| (self.pos[i], self.robots[i].id));
        let msgs: Vec<Message> = order.iter().map(|&i| self.robots[i].message()).collect();
        let mut ranges = vec![(0, 0); self.robots.len()];
        let mut start = 0;
        while start < order.len() {
            let node = self.pos[order[start]];
            let end = start + order[start..].iter().take_while(|&&i| self.pos[i] == node).count();
            for &i in &order[start..end] {
                ranges[i] = (start, end);
            }
            start = end;
        }
        Mailboxes { msgs, ranges, ids: self.robots.iter().map(|r| r.id).collect() }
    }

    fn view(&self) -> RoundView<'_> {
        RoundView { round: self.round, graph: self.graph, robots: &self.robots, pos: &self.pos, homes: &self.homes }
    }

    fn emit(
        &self,
        sink: &mut Option<&mut dyn TraceSink>,
        step: Step,
        i: usize,
        node: NodeId,
        action: String,
    ) -> std::io::Result<()> {
        if let Some(sink) = sink.as_mut() {
            sink.record(&TraceEvent {
                round: self.round,
                step,
                robot: self.robots[i].id,
                node,
                action,
                vars: Vars::from(&self.robots[i]),
            })?;
        }
        Ok(())
    }

    /// Executes one round.
    pub fn step_round(&mut self, sink: &mut Option<&mut dyn TraceSink>) -> Result<(), RunError> {
        let k = self.robots.len();
        let mail = self.deliver_messages();
        let arrived: Vec<bool> = self.entered.iter().map(Option::is_some).collect();
        if let Some(mut mon) = self.monitor.take() {
            let res = mon.after_comm(&self.view(), &arrived);
            self.monitor = Some(mon);
            res?;
        }
        for i in 0..k {
            if self.robots[i].halted {
                continue;
            }
            let with: Vec<RobotId> = mail.inbox(i).iter().map(|m| m.id).collect();
            if with != self.company[i] {
                let action = if with.is_empty() {
                    "alone".to_string()
                } else {
                    format!("with {}", with.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(","))
                };
                self.company[i] = with;
                self.emit(sink, Step::Comm, i, self.pos[i], action)?;
            }
        }

        let was_group: Vec<bool> = self.robots.iter().map(|r| !r.settled && !r.halted).collect();
        let mut decisions: Vec<Option<Decision>> = vec![None; k];
        for (i, slot) in decisions.iter_mut().enumerate() {
            if self.robots[i].halted {
                continue;
            }
            let view = LocalView { degree: self.graph.degree(self.pos[i]), entered: self.entered[i] };
            let d = robots::step(self.strategy, &mut self.robots[i], mail.inbox(i), view, &self.params)
                .map_err(|source| RunError::Protocol { round: self.round, source })?;
            audit_memory(&self.robots[i], self.delta, self.params.known_delta as usize)
                .map_err(|source| RunError::MemoryBudget { round: self.round, source })?;
            if d.notes.contains(Notes::SETTLE) {
                self.homes[i] = Some(self.pos[i]);
                self.last_settle = Some(self.round);
            }
            if !d.is_quiet() {
                self.emit(sink, Step::Compute, i, self.pos[i], d.label())?;
            }
            *slot = Some(d);
        }
        if let Some(mut mon) = self.monitor.take() {
            let res = mon.after_compute(&self.view(), &decisions, &was_group);
            self.monitor = Some(mon);
            res?;
        }

        self.update_ledger(&decisions, &was_group);

        for (i, d) in decisions.iter().enumerate() {
            self.entered[i] = None;
            let Some(port) = d.and_then(|d| d.port()) else { continue };
            let node = self.pos[i];
            let (v, q) = self.graph.neighbor(node, port).map_err(|_| RunError::InvalidPort {
                round: self.round,
                robot: self.robots[i].id,
                node,
                port,
            })?;
            self.pos[i] = v;
            self.entered[i] = Some(q);
            self.emit(sink, Step::Move, i, node, format!("port {port} -> {v}"))?;
        }
        self.round += 1;
        Ok(())
    }

    fn update_ledger(&mut self, decisions: &[Option<Decision>], was_group: &[bool]) {
        let Some(lead) = (0..self.robots.len()).find(|&i| was_group[i]) else { return };
        let node = self.pos[lead];
        let marks_tree = decisions.iter().enumerate().any(|(i, d)| {
            self.pos[i] == node
                && d.is_some_and(|d| {
                    (was_group[i] && d.notes.contains(Notes::SETTLE))
                        || d.notes.contains(Notes::STORE_VP)
                        || d.notes.contains(Notes::RECORD_ENTRY)
                })
        });
        if marks_tree {
            self.ledger.mark_pending_tree();
        }
        let group_move = (0..self.robots.len()).find_map(|i| {
            let (motion, port) = decisions[i]?.movement?;
            let dir = match motion {
                Motion::Explore => Direction::Explore,
                Motion::Backtrack => Direction::Backtrack,
                _ => return None,
            };
            was_group[i].then_some((dir, port))
        });
        if let Some((dir, port)) = group_move {
            if let Ok((v, _)) = self.graph.neighbor(node, port) {
                self.ledger.record_traversal(EdgeId::new(node, v), dir, self.round);
            }
        }
    }

    pub fn into_outcome(self, halted_by: HaltReason, max_rounds: u64) -> SimOutcome {
        let mut placement: BTreeMap<NodeId, Vec<RobotId>> = BTreeMap::new();
        let mut unsettled = Vec::new();
        for (i, r) in self.robots.iter().enumerate() {
            match self.homes[i] {
                Some(h) if r.settled => placement.entry(h).or_default().push(r.id),
                _ => unsettled.push((r.id, self.pos[i])),
            }
        }
        SimOutcome {
            strategy: self.strategy,
            root: self.root,
            placement,
            unsettled,
            rounds_total: self.round,
            rounds_stage1: self.last_settle,
            ledger: self.ledger,
            robot_finals: self.robots,
            halted_by,
            max_rounds,
        }
    }
}

pub fn run(graph: &PortLabeledGraph, config: &SimConfig) -> Result<SimOutcome, RunError> {
    run_traced(graph, config, None)
}

pub fn run_traced(
    graph: &PortLabeledGraph,
    config: &SimConfig,
    mut sink: Option<&mut dyn TraceSink>,
) -> Result<SimOutcome, RunError> {
    let mut world = World::new(graph, config)?;
    let cap = config.max_rounds.unwrap_or_else(|| default_round_cap(graph));
    let halted_by = loop {
        if let Some(reason) = world.finished() {
            break reason;
        }
        if world.round >= cap {
            break HaltReason::RoundCap;
        }
        world.step_round(&mut sink)?;
    };
    Ok(world.into_outcome(halted_by, cap))
}
