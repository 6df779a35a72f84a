//! Warm-up strategy: robots know an upper bound on Δ and a settled robot keeps
//! the parent port of every neighbor it has seen explored. O(Δ log Δ) bits.
//! There is no termination; the engine stops once every robot has settled.

use super::{
    go_home, group_rank, oscillate, settle_arrival, Decision, Inbox, LocalView, Motion, Notes, Params,
    ParentInfo, ProtocolError, RobotState, Travel, Window,
};
use crate::graph::Port;

pub fn step_warmup(
    s: &mut RobotState,
    inbox: Inbox<'_>,
    view: LocalView,
    params: &Params,
) -> Result<Decision, ProtocolError> {
    if s.halted {
        Ok(Decision::default())
    } else if s.settled {
        Ok(step_warmup_settled(s, inbox, view))
    } else {
        step_warmup_unsettled(s, inbox, view, params)
    }
}

fn settle(s: &mut RobotState, parent: Option<Port>, degree: usize) -> Decision {
    s.settled = true;
    s.special = 0;
    s.parent = parent;
    s.dist = 0;
    s.wait_remaining = 0;
    s.osc = Default::default();
    s.window = Window::default();
    s.table = vec![None; degree];
    Decision::stay(Notes::SETTLE)
}

fn go(s: &mut RobotState, state: Travel, p: Port) -> Decision {
    s.state = state;
    let motion = match state {
        Travel::Explore => Motion::Explore,
        Travel::Backtrack => Motion::Backtrack,
    };
    Decision::go(Notes::default(), motion, p)
}

/// Explore the next port, or backtrack when it wraps onto the entry port.
fn onward(s: &mut RobotState, q: Port, degree: usize) -> Decision {
    let next = (q + 1) % degree;
    if next == q {
        go(s, Travel::Backtrack, q)
    } else {
        go(s, Travel::Explore, next)
    }
}

pub fn step_warmup_unsettled(
    s: &mut RobotState,
    inbox: Inbox<'_>,
    view: LocalView,
    params: &Params,
) -> Result<Decision, ProtocolError> {
    let degree = view.degree;
    if s.portentered.is_none() {
        s.phi = degree as u32;
        let (is_min, _) = group_rank(s.id, inbox);
        if is_min || degree == 0 {
            return Ok(settle(s, None, degree));
        }
        s.portentered = Some(0);
        return Ok(go(s, Travel::Explore, 0));
    }
    if let Some(q) = view.entered {
        s.portentered = Some(q);
        s.phi = s.phi.max(degree as u32);
        s.wait_remaining = 2 * params.known_delta.max(1);
        s.window = Window::default();
    }
    for m in inbox.iter().filter(|m| m.settled) {
        if m.is_resident() {
            s.window.resident = Some(m.resident_parent());
        } else {
            s.window.visited = true;
            if let Some(entry) = m.virtualparent {
                s.window.virtual_parent.get_or_insert(entry);
            }
        }
    }
    s.wait_remaining = s.wait_remaining.saturating_sub(1);
    if s.wait_remaining > 0 {
        return Ok(Decision::default());
    }

    let q = s.portentered.expect("set on arrival");
    match s.state {
        Travel::Explore => {
            if s.window.resident.is_some() || s.window.virtual_parent.is_some() {
                Ok(go(s, Travel::Backtrack, q))
            } else if s.window.visited {
                Ok(onward(s, q, degree))
            } else if group_rank(s.id, inbox).0 {
                Ok(settle(s, Some(q), degree))
            } else {
                Ok(onward(s, q, degree))
            }
        }
        Travel::Backtrack => {
            let info = s
                .window
                .resident
                .or(s.window.virtual_parent.map(ParentInfo::Port))
                .ok_or(ProtocolError::MissingParentInfo { robot: s.id })?;
            let next = (q + 1) % degree;
            match info {
                ParentInfo::Root if next == 0 => Ok(settle(s, None, degree)),
                ParentInfo::Port(pp) if next == pp => Ok(go(s, Travel::Backtrack, next)),
                _ => Ok(go(s, Travel::Explore, next)),
            }
        }
    }
}

/// Settled warm-up robot: oscillates, freezes with the group, and records
/// the entry port of a neighbor the group explores for the first time.
pub fn step_warmup_settled(s: &mut RobotState, inbox: Inbox<'_>, view: LocalView) -> Decision {
    settle_arrival(s, view);
    if let Some(g) = inbox.iter().find(|m| m.is_unsettled()) {
        let mut notes = Notes::default();
        if !s.with_mover {
            s.with_mover = true;
            s.count += 1;
            notes |= Notes::MEET;
        }
        if let Some(o) = s.osc.out {
            let known = inbox.iter().any(|m| m.settled && (m.is_resident() || m.virtualparent.is_some()));
            if g.final_round() && g.state == Travel::Explore && !known && s.table[o].is_none() {
                s.table[o] = g.portentered;
                notes |= Notes::RECORD_ENTRY;
            }
        }
        return Decision::stay(notes);
    }
    if s.with_mover {
        s.with_mover = false;
        if !s.osc.at_home() {
            return go_home(s, Notes::default(), Motion::Return);
        }
    }
    oscillate(s, view)
}
