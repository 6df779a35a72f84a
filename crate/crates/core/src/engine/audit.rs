use thiserror::Error;

use crate::robots::{RobotId, RobotState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("robot {robot}: {field} = {value} exceeds its bound {bound}")]
pub struct MemoryViolation {
    pub robot: RobotId,
    pub field: &'static str,
    pub value: i64,
    pub bound: i64,
}

/// O(Δ²) ceiling on the meeting counters.
pub fn count_bound(delta: usize) -> u64 {
    16 * (delta as u64 + 1).pow(2)
}

/// Checks every persistent field against its O(log Δ) range.
/// `wait_delta` bounds the wait counter (the known Δ for the warm-up strategy).
pub fn audit_memory(s: &RobotState, delta: usize, wait_delta: usize) -> Result<(), MemoryViolation> {
    let fail = |field: &'static str, value: i64, bound: i64| {
        Err(MemoryViolation { robot: s.id, field, value, bound })
    };
    let max_port = delta as i64 - 1;
    for (field, port) in [
        ("parent", s.parent),
        ("portentered", s.portentered),
        ("virtualparent", s.virtualparent),
        ("vp_port", s.vp_port),
    ] {
        if let Some(p) = port {
            if p as i64 > max_port {
                return fail(field, p as i64, max_port);
            }
        }
    }
    if s.dist > 2 {
        return fail("dist", s.dist.into(), 2);
    }
    if !(-1..=1).contains(&s.special) {
        return fail("special", s.special.into(), 1);
    }
    if s.stage == 0 || s.stage > 2 {
        return fail("stage", s.stage.into(), 2);
    }
    if s.phi as usize > delta {
        return fail("phi", s.phi.into(), delta as i64);
    }
    let cb = count_bound(delta);
    if u64::from(s.count) > cb {
        return fail("count", s.count.into(), cb as i64);
    }
    if u64::from(s.count_prime) > cb {
        return fail("count_prime", s.count_prime.into(), cb as i64);
    }
    let wait_bound = 2 * wait_delta.max(delta) as i64;
    if i64::from(s.wait_remaining) > wait_bound {
        return fail("wait_remaining", s.wait_remaining.into(), wait_bound);
    }
    if s.table.len() > delta + 1 {
        return fail("table", s.table.len() as i64, delta as i64 + 1);
    }
    if let Some(&Some(p)) = s.table.iter().find(|e| e.is_some_and(|p| p as i64 > max_port)) {
        return fail("table entry", p as i64, max_port);
    }
    Ok(())
}
