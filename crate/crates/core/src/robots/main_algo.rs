//! Dispersion at distance two with termination, O(log Δ) bits per robot.
//!
//! Stage 1 is a DFS by the group of unsettled robots. A settled robot
//! oscillates over its ports; the one standing with the group at a node one
//! hop from home (the special robot) remembers that node's parent port, so
//! nothing beyond one extra pointer per robot is ever stored. Stage 2 replays
//! stage 1 with the last settled robot `r_L` in place of the group; every
//! other robot terminates once it has met `r_L` as often as it met the group.

use super::{
    go_home, group_rank, oscillate, settle_arrival, Decision, Fault, Inbox, LastRole, LocalView, Message,
    Motion, Notes, Params, ParentInfo, ProtocolError, RobotState, Travel, Window,
};
use crate::graph::Port;

/// Sub-algorithm selected for a robot by its flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Unsettled,
    SettledStage1,
    LastRobot,
    ActSettled,
}

impl Branch {
    pub fn of(s: &RobotState) -> Result<Branch, ProtocolError> {
        match (s.settled, s.act_settled, s.terminate) {
            (false, false, false) => Ok(Branch::Unsettled),
            (true, false, false) => Ok(Branch::SettledStage1),
            (true, false, true) if s.is_last() => Ok(Branch::LastRobot),
            (true, true, _) => Ok(Branch::ActSettled),
            (settled, act, term) => Err(ProtocolError::UnreachableState {
                robot: s.id,
                detail: format!("settled={settled} act_settled={act} terminate={term} role={:?}", s.role),
            }),
        }
    }
}

pub fn dispatch(
    s: &mut RobotState,
    inbox: Inbox<'_>,
    view: LocalView,
    params: &Params,
) -> Result<Decision, ProtocolError> {
    if s.halted {
        return Ok(Decision::default());
    }
    match Branch::of(s)? {
        Branch::Unsettled => step_unsettled(s, inbox, view, params),
        Branch::SettledStage1 => step_settled_stage1(s, inbox, view, params),
        Branch::LastRobot => step_last_robot(s, inbox, view, params),
        Branch::ActSettled => step_act_settled(s, inbox, view, params),
    }
}

fn special_flag(params: &Params) -> i8 {
    if params.fault == Some(Fault::SkipSpecialFlag) {
        0
    } else {
        1
    }
}

fn settle_here(s: &mut RobotState, parent: Option<Port>) {
    s.settled = true;
    s.parent = parent;
    s.dist = 0;
    s.special = 0;
    s.wait_remaining = 0;
    s.osc = Default::default();
    s.with_mover = false;
    s.window = Window::default();
}

fn arrive(s: &mut RobotState, q: Port, degree: usize) {
    s.portentered = Some(q);
    s.phi = s.phi.max(degree as u32);
    s.wait_remaining = 2 * s.phi;
    s.window = Window::default();
}

fn explore(s: &mut RobotState, notes: Notes, p: Port, dist: u8) -> Decision {
    s.state = Travel::Explore;
    s.dist = dist;
    Decision::go(notes, Motion::Explore, p)
}

fn backtrack(s: &mut RobotState, notes: Notes, p: Port) -> Decision {
    s.state = Travel::Backtrack;
    Decision::go(notes, Motion::Backtrack, p)
}

fn halt(s: &mut RobotState, notes: Notes) -> Decision {
    s.terminate = true;
    s.halted = true;
    Decision::stay(notes | Notes::TERMINATE)
}

/// Parent port of the current node learnt during the wait.
fn parent_info(s: &RobotState) -> Result<ParentInfo, ProtocolError> {
    s.window
        .resident
        .or(s.window.virtual_parent.map(ParentInfo::Port))
        .ok_or(ProtocolError::MissingParentInfo { robot: s.id })
}

fn note_visitor(w: &mut Window, m: &Message) {
    w.visited = true;
    if m.special == 0 {
        w.min_visitor = Some(w.min_visitor.map_or(m.id, |v| v.min(m.id)));
    }
}

fn note_pointers(w: &mut Window, m: &Message) {
    if m.is_resident() {
        w.resident = Some(m.resident_parent());
    }
    if let Some(vp) = m.virtualparent {
        w.virtual_parent.get_or_insert(vp);
    }
}

fn absorb_stage1(s: &mut RobotState, inbox: Inbox<'_>) {
    for m in inbox.iter().filter(|m| m.settled) {
        if m.special == 1 {
            s.window.special = Some(m.id);
        } else {
            note_visitor(&mut s.window, m);
        }
        note_pointers(&mut s.window, m);
    }
}

/// Only act_settled robots count during the replay; a robot settled in
/// stage 1 and found at home is the seat that joins on this visit.
fn absorb_replay(s: &mut RobotState, inbox: Inbox<'_>) {
    for m in inbox.iter().filter(|m| m.settled && !m.co_settled) {
        if m.act_settled {
            if m.special == 1 {
                s.window.special = Some(m.id);
            } else if s.window.fresh_seat != Some(m.id) {
                note_visitor(&mut s.window, m);
            }
            note_pointers(&mut s.window, m);
        } else if m.is_resident() && s.window.fresh_seat.is_none() {
            s.window.fresh_seat = Some(m.id);
        }
    }
}

/// Counts down the wait; returns true on the round the mover acts.
fn tick(s: &mut RobotState) -> bool {
    s.wait_remaining = s.wait_remaining.saturating_sub(1);
    s.wait_remaining == 0
}

fn unreachable(s: &RobotState, what: &str) -> ProtocolError {
    ProtocolError::UnreachableState {
        robot: s.id,
        detail: format!("{what}: state={:?} dist={}", s.state, s.dist),
    }
}

/// Group member of stage 1.
pub fn step_unsettled(
    s: &mut RobotState,
    inbox: Inbox<'_>,
    view: LocalView,
    params: &Params,
) -> Result<Decision, ProtocolError> {
    if s.portentered.is_none() {
        return Ok(phase_zero(s, inbox, view, params));
    }
    if let Some(q) = view.entered {
        arrive(s, q, view.degree);
    }
    absorb_stage1(s, inbox);
    if !tick(s) {
        return Ok(Decision::default());
    }

    let q = s.portentered.expect("set on arrival");
    let next = (q + 1) % view.degree;
    match (s.state, s.dist) {
        (Travel::Explore, 1) => {
            let special = s.window.special.ok_or(ProtocolError::MissingSpecial { robot: s.id })?;
            if s.window.min_visitor.is_some_and(|v| v < special) || next == q {
                Ok(backtrack(s, Notes::default(), q))
            } else {
                Ok(explore(s, Notes::default(), next, 2))
            }
        }
        (Travel::Explore, 2) => {
            if s.window.visited {
                return Ok(backtrack(s, Notes::default(), q));
            }
            let (is_min, is_max) = group_rank(s.id, inbox);
            if is_min {
                settle_here(s, Some(q));
                if is_max {
                    return Ok(start_walk(s, q));
                }
                s.with_mover = true;
                if next == q {
                    return Ok(Decision::stay(Notes::SETTLE));
                }
                return Ok(accompany(s, params, Notes::SETTLE, next, Counter::Count));
            }
            s.dist = 0;
            if next == q {
                Ok(backtrack(s, Notes::default(), q))
            } else {
                Ok(explore(s, Notes::default(), next, 1))
            }
        }
        (Travel::Backtrack, _) => {
            let info = parent_info(s)?;
            s.dist = if s.window.resident.is_some() { 0 } else { 1 };
            match info {
                ParentInfo::Root if next == 0 => {
                    let (_, is_max) = group_rank(s.id, inbox);
                    settle_here(s, None);
                    if is_max {
                        s.terminate = true;
                        s.stage = 2;
                        s.role = LastRole::Launch;
                        Ok(Decision::stay(Notes::SETTLE | Notes::LAST))
                    } else {
                        s.co_settled = true;
                        Ok(Decision::stay(Notes::SETTLE))
                    }
                }
                ParentInfo::Root => Ok(explore(s, Notes::default(), next, 1)),
                ParentInfo::Port(pp) if next == pp => Ok(backtrack(s, Notes::default(), next)),
                ParentInfo::Port(_) => {
                    let d = s.dist + 1;
                    Ok(explore(s, Notes::default(), next, d))
                }
            }
        }
        _ => Err(unreachable(s, "group")),
    }
}

/// Round 0 at the root: the minimum id settles without waiting.
fn phase_zero(s: &mut RobotState, inbox: Inbox<'_>, view: LocalView, params: &Params) -> Decision {
    let (is_min, is_max) = group_rank(s.id, inbox);
    s.phi = view.degree as u32;
    if view.degree == 0 {
        settle_here(s, None);
        s.act_settled = true;
        return halt(s, Notes::SETTLE);
    }
    if is_min {
        settle_here(s, None);
        if is_max {
            s.act_settled = true;
            s.stage = 2;
            return halt(s, Notes::SETTLE);
        }
        s.with_mover = true;
        return accompany(s, params, Notes::SETTLE, 0, Counter::Count);
    }
    s.state = Travel::Explore;
    s.portentered = Some(0);
    explore(s, Notes::default(), 0, 1)
}

#[derive(Clone, Copy)]
enum Counter {
    Count,
    CountPrime,
}

/// A settled robot moves with the mover as its special robot.
fn accompany(s: &mut RobotState, params: &Params, notes: Notes, p: Port, counter: Counter) -> Decision {
    s.special = special_flag(params);
    match counter {
        Counter::Count => s.count += 1,
        Counter::CountPrime => s.count_prime += 1,
    }
    s.osc.out = Some(p);
    s.osc.back = None;
    s.dist = 1;
    s.window = Window::default();
    Decision::go(notes, Motion::Accompany, p)
}

/// The largest id settled off the root and heads back along parent pointers.
fn start_walk(s: &mut RobotState, q: Port) -> Decision {
    s.terminate = true;
    s.stage = 2;
    s.role = LastRole::Walk;
    s.state = Travel::Backtrack;
    Decision::go(Notes::SETTLE | Notes::LAST, Motion::Walk, q)
}

fn stored_vp(s: &mut RobotState, params: &Params, entry: Option<Port>) -> Notes {
    if params.fault == Some(Fault::SkipVirtualParentWrite) {
        return Notes::default();
    }
    s.virtualparent = entry;
    s.vp_port = s.osc.out;
    Notes::STORE_VP
}

fn track_lower(s: &mut RobotState, inbox: Inbox<'_>, act_only: bool) {
    let me = s.id;
    for m in inbox.iter() {
        if m.settled && m.special == 0 && m.id < me && (!act_only || m.act_settled) && !m.co_settled {
            s.window.min_visitor = Some(s.window.min_visitor.map_or(m.id, |v| v.min(m.id)));
        }
    }
}

/// Port the mover explores next from this robot's home, if it will explore.
fn predicted_explore(s: &RobotState, mover: &Message, degree: usize) -> Option<Port> {
    let q = mover.portentered?;
    let next = (q + 1) % degree;
    let blocked = match s.parent {
        None => next == 0,
        Some(pp) => next == pp,
    };
    (!blocked).then_some(next)
}

/// Settled robot of stage 1.
pub fn step_settled_stage1(
    s: &mut RobotState,
    inbox: Inbox<'_>,
    view: LocalView,
    params: &Params,
) -> Result<Decision, ProtocolError> {
    settle_arrival(s, view);
    let at_home = s.osc.at_home();
    if s.co_settled {
        return Ok(step_co_settled(s, inbox, view));
    }

    if let Some(rl) = inbox.iter().find(|m| m.terminate && !m.act_settled && m.settled) {
        let is_root = s.parent.is_none();
        match rl.role {
            LastRole::Walk | LastRole::Launch if at_home && is_root => {
                if rl.role == LastRole::Launch || rl.final_round() {
                    activate(s);
                    return Ok(accompany(s, params, Notes::ACTIVATE, 0, Counter::CountPrime));
                }
                return Ok(Decision::default());
            }
            LastRole::Replay if at_home => {
                activate(s);
                return act_with_mover(s, rl, inbox, view, params, Notes::ACTIVATE);
            }
            LastRole::Replay => {
                s.stage = 2;
                s.special = 0;
                s.with_mover = false;
                return Ok(go_home(s, Notes::AWARE, Motion::Return));
            }
            _ => {}
        }
    }

    if s.stage == 2 {
        // Aware of stage 2: wait at home for the replay.
        return Ok(if at_home {
            Decision::default()
        } else {
            go_home(s, Notes::default(), Motion::Return)
        });
    }
    if inbox.iter().any(|m| m.stage == 2 && m.act_settled) {
        s.stage = 2;
        s.special = 0;
        s.with_mover = false;
        return Ok(if at_home {
            Decision::stay(Notes::AWARE)
        } else {
            go_home(s, Notes::AWARE, Motion::Return)
        });
    }

    if let Some(g) = inbox.iter().find(|m| m.is_unsettled()) {
        let mut notes = Notes::default();
        if !s.with_mover {
            s.count += 1;
            s.with_mover = true;
            s.window = Window::default();
            notes |= Notes::MEET;
        }
        if !at_home {
            if s.special == 1 {
                track_lower(s, inbox, false);
                if g.final_round() && g.state == Travel::Explore && g.dist == 1 && s.window.min_visitor.is_none()
                {
                    notes |= stored_vp(s, params, g.portentered);
                }
            }
        } else if g.final_round() && g.state == Travel::Backtrack {
            if let Some(p) = predicted_explore(s, g, view.degree) {
                return Ok(accompany(s, params, notes, p, Counter::Count));
            }
        }
        return Ok(Decision::stay(notes));
    }

    if s.with_mover {
        s.with_mover = false;
        s.special = 0;
        s.window = Window::default();
        if !at_home {
            return Ok(go_home(s, Notes::default(), Motion::Return));
        }
    }
    Ok(oscillate(s, view))
}

/// Extra robots that settled together at the root wait for the replay to end.
fn step_co_settled(s: &mut RobotState, inbox: Inbox<'_>, view: LocalView) -> Decision {
    let ends_here = inbox.iter().any(|m| {
        m.terminate
            && m.role == LastRole::Replay
            && m.final_round()
            && m.state == Travel::Backtrack
            && m.portentered.is_some_and(|q| (q + 1) % view.degree.max(1) == 0)
    });
    if ends_here {
        halt(s, Notes::default())
    } else {
        Decision::default()
    }
}

fn activate(s: &mut RobotState) {
    s.act_settled = true;
    s.stage = 2;
    s.special = 0;
    s.count_prime = 0;
    s.virtualparent = None;
    s.vp_port = None;
    s.with_mover = true;
    s.fresh = true;
    s.window = Window::default();
}

fn replaying(inbox: Inbox<'_>) -> Option<&Message> {
    inbox.iter().find(|m| m.terminate && !m.act_settled && m.role == LastRole::Replay)
}

/// Act-settled robot co-located with the replaying `r_L`.
fn act_with_mover(
    s: &mut RobotState,
    rl: &Message,
    inbox: Inbox<'_>,
    view: LocalView,
    params: &Params,
    mut notes: Notes,
) -> Result<Decision, ProtocolError> {
    if !s.with_mover {
        s.count_prime += 1;
        s.with_mover = true;
        s.window = Window::default();
        notes |= Notes::MEET;
        check_overshoot(s)?;
    }
    let at_home = s.osc.at_home();
    if !at_home {
        if s.special == 1 {
            track_lower(s, inbox, true);
            if rl.final_round() && rl.state == Travel::Explore && rl.dist == 1 && s.window.min_visitor.is_none() {
                notes |= stored_vp(s, params, rl.portentered);
            }
        }
        return Ok(Decision::stay(notes));
    }
    if !rl.final_round() {
        return Ok(Decision::stay(notes));
    }
    let q = rl.portentered.expect("replaying robot has entered this node");
    match rl.state {
        Travel::Backtrack => {
            if s.parent.is_none() && (q + 1).is_multiple_of(view.degree) {
                return Ok(halt(s, notes));
            }
            if let Some(p) = predicted_explore(s, rl, view.degree) {
                let d = accompany(s, params, notes, p, Counter::CountPrime);
                check_overshoot(s)?;
                return Ok(d);
            }
        }
        Travel::Explore if rl.dist == 2 && s.fresh => {
            let next = (q + 1) % view.degree;
            if next != q {
                let d = accompany(s, params, notes, next, Counter::CountPrime);
                check_overshoot(s)?;
                return Ok(d);
            }
        }
        Travel::Explore => {}
    }
    Ok(Decision::stay(notes))
}

fn check_overshoot(s: &RobotState) -> Result<(), ProtocolError> {
    if s.count_prime > s.count {
        Err(ProtocolError::CountOvershoot { robot: s.id, count: s.count, count_prime: s.count_prime })
    } else {
        Ok(())
    }
}

/// Settled robot taking part in stage 2.
pub fn step_act_settled(
    s: &mut RobotState,
    inbox: Inbox<'_>,
    view: LocalView,
    params: &Params,
) -> Result<Decision, ProtocolError> {
    settle_arrival(s, view);
    if let Some(rl) = replaying(inbox) {
        return act_with_mover(s, rl, inbox, view, params, Notes::default());
    }
    if s.with_mover {
        s.with_mover = false;
        s.fresh = false;
        s.special = 0;
        s.window = Window::default();
        if !s.osc.at_home() {
            return Ok(go_home(s, Notes::default(), Motion::Return));
        }
    }
    if s.osc.at_home() && s.count_prime == s.count {
        return Ok(halt(s, Notes::default()));
    }
    Ok(oscillate(s, view))
}

/// `r_L`: walks back to the root, then replays stage 1.
pub fn step_last_robot(
    s: &mut RobotState,
    inbox: Inbox<'_>,
    view: LocalView,
    params: &Params,
) -> Result<Decision, ProtocolError> {
    match s.role {
        LastRole::Walk => walk(s, inbox, view),
        LastRole::Launch => Ok(launch(s, view)),
        LastRole::Replay => replay(s, inbox, view, params),
        LastRole::None => Err(unreachable(s, "terminate set without a role")),
    }
}

fn walk(s: &mut RobotState, inbox: Inbox<'_>, view: LocalView) -> Result<Decision, ProtocolError> {
    if let Some(q) = view.entered {
        arrive(s, q, view.degree);
    }
    for m in inbox.iter().filter(|m| m.settled) {
        note_pointers(&mut s.window, m);
    }
    if !tick(s) {
        return Ok(Decision::default());
    }
    match parent_info(s)? {
        ParentInfo::Root => Ok(launch(s, view)),
        ParentInfo::Port(p) => Ok(Decision::go(Notes::default(), Motion::Walk, p)),
    }
}

fn launch(s: &mut RobotState, view: LocalView) -> Decision {
    s.role = LastRole::Replay;
    s.phi = view.degree as u32;
    s.state = Travel::Explore;
    s.portentered = Some(0);
    s.dist = 1;
    s.wait_remaining = 0;
    s.window = Window::default();
    Decision::go(Notes::default(), Motion::Launch, 0)
}

fn replay(
    s: &mut RobotState,
    inbox: Inbox<'_>,
    view: LocalView,
    _params: &Params,
) -> Result<Decision, ProtocolError> {
    if let Some(q) = view.entered {
        arrive(s, q, view.degree);
    }
    absorb_replay(s, inbox);
    if !tick(s) {
        return Ok(Decision::default());
    }

    let q = s.portentered.expect("set on arrival");
    let next = (q + 1) % view.degree;
    match (s.state, s.dist) {
        (Travel::Explore, 1) => {
            let special = s.window.special.ok_or(ProtocolError::MissingSpecial { robot: s.id })?;
            if s.window.min_visitor.is_some_and(|v| v < special) || next == q {
                Ok(backtrack(s, Notes::default(), q))
            } else {
                Ok(explore(s, Notes::default(), next, 2))
            }
        }
        (Travel::Explore, 2) => {
            if s.window.fresh_seat.is_some() {
                s.dist = 0;
                if next == q {
                    Ok(backtrack(s, Notes::default(), q))
                } else {
                    Ok(explore(s, Notes::default(), next, 1))
                }
            } else if s.window.visited {
                Ok(backtrack(s, Notes::default(), q))
            } else {
                // Own stage-1 seat.
                s.act_settled = true;
                s.dist = 0;
                Ok(halt(s, Notes::default()))
            }
        }
        (Travel::Backtrack, _) => {
            let info = parent_info(s)?;
            s.dist = if s.window.resident.is_some() { 0 } else { 1 };
            match info {
                ParentInfo::Root if next == 0 => {
                    s.act_settled = true;
                    Ok(halt(s, Notes::default()))
                }
                ParentInfo::Root => Ok(explore(s, Notes::default(), next, 1)),
                ParentInfo::Port(pp) if next == pp => Ok(backtrack(s, Notes::default(), next)),
                ParentInfo::Port(_) => {
                    let d = s.dist + 1;
                    Ok(explore(s, Notes::default(), next, d))
                }
            }
        }
        _ => Err(unreachable(s, "replay")),
    }
}
