//! Robot state machines.
//!
//! A robot sees only the degree of its current node, the port it arrived
//! through (if it moved last round) and the messages of co-located robots.
//! Both strategies are pure transitions `(state, inbox, view) -> (state', decision)`.

mod main_algo;
mod warmup;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Port;

pub use main_algo::{
    dispatch, step_act_settled, step_last_robot, step_settled_stage1, step_unsettled, Branch,
};
pub use warmup::{step_warmup, step_warmup_settled, step_warmup_unsettled};

pub type RobotId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Main,
    Warmup,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "main" => Ok(Strategy::Main),
            "warmup" => Ok(Strategy::Warmup),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Strategy::Main => "main",
            Strategy::Warmup => "warmup",
        })
    }
}

/// Explore/backtrack state of a traversing robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Travel {
    Explore,
    Backtrack,
}

/// What the largest-id robot is doing once it has settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LastRole {
    #[default]
    None,
    /// Walking back to the root along parent pointers.
    Walk,
    /// Settled at the root; starts the replay next round.
    Launch,
    /// Replaying the traversal to let the others terminate.
    Replay,
}

/// Deliberate protocol faults, used to show that online checks are live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// The accompanying settled robot never records the parent port of the node.
    SkipVirtualParentWrite,
    /// A settled robot accompanies the group without raising its special flag.
    SkipSpecialFlag,
}

/// Parent pointer of the current node as learnt from a co-located robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParentInfo {
    Root,
    Port(Port),
}

/// Back-and-forth movement of a settled robot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Oscillation {
    /// Next home port to visit.
    pub next: Port,
    /// Home port the robot left through, while it is away.
    pub out: Option<Port>,
    /// Port leading back home from the neighbor.
    pub back: Option<Port>,
    /// Set on the round the robot walks home; cleared on arrival.
    pub homeward: bool,
}

impl Oscillation {
    pub fn at_home(&self) -> bool {
        self.out.is_none()
    }
}

/// Observations accumulated over one waiting period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Window {
    /// Accompanying special robot.
    pub special: Option<RobotId>,
    /// Smallest id among visiting settled robots with `special = 0`.
    pub min_visitor: Option<RobotId>,
    /// Some settled robot (other than the accompanying one) was seen.
    pub visited: bool,
    /// Parent pointer offered by a robot settled at this node.
    pub resident: Option<ParentInfo>,
    /// Parent pointer of this node offered by a neighbor's settled robot.
    pub virtual_parent: Option<Port>,
    /// Robot settled here during stage 1 that joins the replay on this visit.
    pub fresh_seat: Option<RobotId>,
}

/// Persistent memory of one robot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobotState {
    pub id: RobotId,
    pub state: Travel,
    pub stage: u8,
    pub settled: bool,
    pub act_settled: bool,
    pub special: i8,
    pub terminate: bool,
    /// Stopped for good: no further messages, moves or state changes.
    pub halted: bool,
    pub dist: u8,
    pub parent: Option<Port>,
    pub portentered: Option<Port>,
    pub virtualparent: Option<Port>,
    /// Home port behind which the node described by `virtualparent` lies.
    pub vp_port: Option<Port>,
    pub count: u32,
    pub count_prime: u32,
    pub phi: u32,

    pub wait_remaining: u32,
    pub osc: Oscillation,
    /// Frozen with the group (or the replaying robot) for the current stay.
    pub with_mover: bool,
    /// Joined the replay during the current stay of the replaying robot.
    pub fresh: bool,
    pub role: LastRole,
    /// One of the extra robots that settled together at the root.
    pub co_settled: bool,
    pub window: Window,
    /// Warm-up only: parent port of each neighbor, indexed by home port.
    pub table: Vec<Option<Port>>,
}

impl RobotState {
    pub fn new(id: RobotId) -> Self {
        RobotState {
            id,
            state: Travel::Explore,
            stage: 1,
            settled: false,
            act_settled: false,
            special: -1,
            terminate: false,
            halted: false,
            dist: 0,
            parent: None,
            portentered: None,
            virtualparent: None,
            vp_port: None,
            count: 0,
            count_prime: 0,
            phi: 0,
            wait_remaining: 0,
            osc: Oscillation::default(),
            with_mover: false,
            fresh: false,
            role: LastRole::None,
            co_settled: false,
            window: Window::default(),
            table: Vec::new(),
        }
    }

    /// The largest-id robot after it settled in stage 1.
    pub fn is_last(&self) -> bool {
        self.role != LastRole::None
    }

    /// Snapshot broadcast to co-located robots during the comm step.
    pub fn message(&self) -> Message {
        let away = !self.osc.at_home() && !self.osc.homeward;
        let here_vp = if self.settled && away && self.osc.out.is_some() {
            if self.table.is_empty() {
                self.virtualparent.filter(|_| self.vp_port == self.osc.out)
            } else {
                self.osc.out.and_then(|p| self.table.get(p).copied().flatten())
            }
        } else {
            None
        };
        Message {
            id: self.id,
            settled: self.settled,
            act_settled: self.act_settled,
            special: self.special,
            dist: self.dist,
            parent: if self.settled && self.dist == 0 { self.parent } else { None },
            virtualparent: here_vp,
            stage: self.stage,
            terminate: self.terminate,
            count: self.count,
            count_prime: self.count_prime,
            state: self.state,
            portentered: self.portentered,
            wait_remaining: self.wait_remaining,
            phi: self.phi,
            role: self.role,
            co_settled: self.co_settled,
        }
    }
}

/// Read-only snapshot of a robot, delivered to every co-located robot.
///
/// `parent` is only filled by a robot standing on its home node, and
/// `virtualparent` only when the sender stands on the node it describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Message {
    pub id: RobotId,
    pub settled: bool,
    pub act_settled: bool,
    pub special: i8,
    pub dist: u8,
    pub parent: Option<Port>,
    pub virtualparent: Option<Port>,
    pub stage: u8,
    pub terminate: bool,
    pub count: u32,
    pub count_prime: u32,
    pub state: Travel,
    pub portentered: Option<Port>,
    pub wait_remaining: u32,
    pub phi: u32,
    pub role: LastRole,
    pub co_settled: bool,
}

impl Message {
    /// Member of the stage-1 group.
    pub fn is_unsettled(&self) -> bool {
        !self.settled
    }

    /// Settled robot standing on its own node.
    pub fn is_resident(&self) -> bool {
        self.settled && self.dist == 0 && !self.terminate
    }

    pub fn resident_parent(&self) -> ParentInfo {
        match self.parent {
            None => ParentInfo::Root,
            Some(p) => ParentInfo::Port(p),
        }
    }

    /// The mover is in the last round of its wait and acts in this compute step.
    pub fn final_round(&self) -> bool {
        self.wait_remaining == 1
    }
}

/// Messages of the other robots at the same node, ascending by sender id.
#[derive(Debug, Clone, Copy)]
pub struct Inbox<'a> {
    all: &'a [Message],
    me: RobotId,
}

impl<'a> Inbox<'a> {
    /// `all` holds every message at the node, including the receiver's own.
    pub fn new(all: &'a [Message], me: RobotId) -> Self {
        Inbox { all, me }
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a Message> + 'a {
        let me = self.me;
        self.all.iter().filter(move |m| m.id != me)
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.iter().next().is_none()
    }
}

/// What a robot perceives of its node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalView {
    pub degree: usize,
    /// Port of arrival if the robot moved in the previous round.
    pub entered: Option<Port>,
}

/// Per-run knobs shared by every robot.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Params {
    /// Upper bound on the maximum degree, known to warm-up robots.
    pub known_delta: u32,
    pub fault: Option<Fault>,
}

/// How a robot leaves its node this round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motion {
    Explore,
    Backtrack,
    Accompany,
    Oscillate,
    Return,
    Walk,
    Launch,
}

impl Motion {
    fn name(self) -> &'static str {
        match self {
            Motion::Explore => "explore",
            Motion::Backtrack => "backtrack",
            Motion::Accompany => "accompany",
            Motion::Oscillate => "oscillate",
            Motion::Return => "return",
            Motion::Walk => "walk",
            Motion::Launch => "launch",
        }
    }
}

/// Bit set of noteworthy events in one compute step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Notes(u16);

impl Notes {
    pub const MEET: Notes = Notes(1);
    pub const SETTLE: Notes = Notes(1 << 1);
    pub const STORE_VP: Notes = Notes(1 << 2);
    pub const RECORD_ENTRY: Notes = Notes(1 << 3);
    pub const ACTIVATE: Notes = Notes(1 << 4);
    pub const TERMINATE: Notes = Notes(1 << 5);
    pub const AWARE: Notes = Notes(1 << 6);
    /// The largest id of the group settled and becomes `r_L`.
    pub const LAST: Notes = Notes(1 << 7);

    const NAMES: [(Notes, &'static str); 8] = [
        (Notes::MEET, "meet"),
        (Notes::SETTLE, "settle"),
        (Notes::STORE_VP, "store_vp"),
        (Notes::RECORD_ENTRY, "record_entry"),
        (Notes::ACTIVATE, "activate"),
        (Notes::TERMINATE, "terminate"),
        (Notes::AWARE, "aware"),
        (Notes::LAST, "last"),
    ];

    pub fn contains(self, other: Notes) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl std::ops::BitOr for Notes {
    type Output = Notes;
    fn bitor(self, rhs: Notes) -> Notes {
        Notes(self.0 | rhs.0)
    }
}

impl std::ops::BitOrAssign for Notes {
    fn bitor_assign(&mut self, rhs: Notes) {
        self.0 |= rhs.0;
    }
}

/// Outcome of one compute step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Decision {
    pub notes: Notes,
    pub movement: Option<(Motion, Port)>,
}

impl Decision {
    pub fn stay(notes: Notes) -> Self {
        Decision { notes, movement: None }
    }

    pub fn go(notes: Notes, motion: Motion, port: Port) -> Self {
        Decision { notes, movement: Some((motion, port)) }
    }

    pub fn port(&self) -> Option<Port> {
        self.movement.map(|(_, p)| p)
    }

    /// Nothing worth logging happened.
    pub fn is_quiet(&self) -> bool {
        self.notes.is_empty() && self.movement.is_none()
    }

    /// Trace label, e.g. `settle+accompany:0`.
    pub fn label(&self) -> String {
        let mut parts: Vec<String> = Notes::NAMES
            .iter()
            .filter(|(n, _)| self.notes.contains(*n))
            .map(|(_, s)| s.to_string())
            .collect();
        if let Some((motion, port)) = self.movement {
            parts.push(format!("{}:{port}", motion.name()));
        }
        if parts.is_empty() {
            "wait".into()
        } else {
            parts.join("+")
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("robot {robot}: no co-located robot supplied a parent pointer while backtracking")]
    MissingParentInfo { robot: RobotId },
    #[error("robot {robot}: exploring at distance 1 without an accompanying special robot")]
    MissingSpecial { robot: RobotId },
    #[error("robot {robot}: state matches no branch ({detail})")]
    UnreachableState { robot: RobotId, detail: String },
    #[error("robot {robot}: count' = {count_prime} overtook count = {count}")]
    CountOvershoot { robot: RobotId, count: u32, count_prime: u32 },
}

/// Runs one compute step of `state` under `strategy`.
pub fn step(
    strategy: Strategy,
    state: &mut RobotState,
    inbox: Inbox<'_>,
    view: LocalView,
    params: &Params,
) -> Result<Decision, ProtocolError> {
    match strategy {
        Strategy::Main => dispatch(state, inbox, view, params),
        Strategy::Warmup => step_warmup(state, inbox, view, params),
    }
}

/// Smallest and largest id among the receiver and its co-located group members.
pub(crate) fn group_rank(me: RobotId, inbox: Inbox<'_>) -> (bool, bool) {
    let mut is_min = true;
    let mut is_max = true;
    for m in inbox.iter().filter(|m| m.is_unsettled()) {
        if m.id < me {
            is_min = false;
        }
        if m.id > me {
            is_max = false;
        }
    }
    (is_min, is_max)
}

/// Handles the arrival bookkeeping of a settled robot's back-and-forth walk.
pub(crate) fn settle_arrival(state: &mut RobotState, view: LocalView) {
    if let Some(q) = view.entered {
        if state.osc.homeward {
            let out = state.osc.out.expect("homeward implies an outbound port");
            state.osc.next = (out + 1) % view.degree.max(1);
            state.osc.out = None;
            state.osc.back = None;
            state.osc.homeward = false;
        } else {
            state.osc.back = Some(q);
        }
    }
}

/// One step of the back-and-forth walk: out through the next port, or home.
pub(crate) fn oscillate(state: &mut RobotState, view: LocalView) -> Decision {
    match state.osc.out {
        None => {
            if view.degree == 0 {
                return Decision::stay(Notes::default());
            }
            let p = state.osc.next % view.degree;
            state.osc.out = Some(p);
            state.osc.back = None;
            state.dist = 1;
            Decision::go(Notes::default(), Motion::Oscillate, p)
        }
        Some(_) => go_home(state, Notes::default(), Motion::Oscillate),
    }
}

pub(crate) fn go_home(state: &mut RobotState, notes: Notes, motion: Motion) -> Decision {
    let back = state.osc.back.expect("a robot away from home knows its way back");
    state.osc.homeward = true;
    state.dist = 0;
    Decision::go(notes, motion, back)
}
