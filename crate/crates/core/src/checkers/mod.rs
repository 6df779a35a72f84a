//! Post-run verification of placements, round counts, traversal accounting
//! and termination, plus the online monitor used by the engine.

pub mod online;
pub mod oracle;
mod placement;
mod report;
mod trace_audit;

use std::collections::BTreeSet;

use crate::engine::{EdgeClass, HaltReason, SimOutcome, TraversalLedger};
use crate::graph::{NodeId, PortLabeledGraph};
use crate::robots::Strategy;

pub use placement::{parse_placement, serialize_placement, Placement, PlacementError};
pub use report::{all_passed, CheckReport, Verdict, Witness};
pub use trace_audit::{Tee, TraceAudit};

fn occupied(g: &PortLabeledGraph, p: &Placement) -> Vec<bool> {
    let mut occ = vec![false; g.node_count()];
    for (&u, ids) in p {
        if u < occ.len() && !ids.is_empty() {
            occ[u] = true;
        }
    }
    occ
}

fn has_multiple(p: &Placement) -> bool {
    p.values().any(|ids| ids.len() >= 2)
}

fn out_of_range(g: &PortLabeledGraph, p: &Placement) -> Vec<Witness> {
    p.keys().filter(|&&u| u >= g.node_count()).map(|&u| Witness::Node(u)).collect()
}

pub fn check_independence(g: &PortLabeledGraph, p: &Placement) -> CheckReport {
    const CLAIM: &str = "no two occupied nodes are adjacent";
    let mut w = out_of_range(g, p);
    let occ = occupied(g, p);
    for (u, _, v, _) in g.edges() {
        if occ[u] && occ[v] {
            w.push(Witness::Edge(u, v));
        }
    }
    CheckReport::from_witness("independence", CLAIM, w)
}

pub fn check_no_vacant(g: &PortLabeledGraph, p: &Placement) -> CheckReport {
    const CLAIM: &str = "with robots doubled up, every vacant node has an occupied neighbor";
    if !has_multiple(p) {
        return CheckReport::skipped("no-vacant", CLAIM, "no node holds two robots");
    }
    let occ = occupied(g, p);
    let w = (0..g.node_count())
        .filter(|&u| !occ[u] && !g.neighbors(u).any(|v| occ[v]))
        .map(Witness::Node)
        .collect();
    CheckReport::from_witness("no-vacant", CLAIM, w)
}

pub fn check_mis(g: &PortLabeledGraph, p: &Placement) -> CheckReport {
    const CLAIM: &str = "with robots doubled up, the occupied nodes form a maximal independent set";
    if !has_multiple(p) {
        return CheckReport::skipped("mis", CLAIM, "no node holds two robots");
    }
    let mut w = out_of_range(g, p);
    w.extend(oracle::mis_defects(g, &occupied(g, p)).into_iter().map(|d| match d {
        oracle::MisDefect::Adjacent(u, v) => Witness::Edge(u, v),
        oracle::MisDefect::Addable(u) => Witness::Node(u),
    }));
    CheckReport::from_witness("mis", CLAIM, w)
}

pub fn check_multiplicity(p: &Placement, root: NodeId) -> CheckReport {
    const CLAIM: &str = "only the root holds more than one robot";
    let w = p
        .iter()
        .filter(|&(&u, ids)| u != root && ids.len() > 1)
        .map(|(&u, _)| Witness::Node(u))
        .collect();
    CheckReport::from_witness("multiplicity", CLAIM, w)
}

/// `(stage-1 bound, total bound)`: `2Δ(4m − 2n + 2)` and `2Δ(8m − 3n + 3)`.
pub fn round_bounds(g: &PortLabeledGraph) -> (u64, u64) {
    let (n, m, d) = (g.node_count() as i64, g.edge_count() as i64, g.max_degree() as i64);
    let s1 = 2 * d * (4 * m - 2 * n + 2);
    let total = 2 * d * (8 * m - 3 * n + 3);
    (s1.max(0) as u64, total.max(0) as u64)
}

pub fn check_round_bounds(o: &SimOutcome, g: &PortLabeledGraph) -> CheckReport {
    const CLAIM: &str = "stage 1 ends within 2Δ(4m-2n+2) rounds and the run within 2Δ(8m-3n+3)";
    let (b1, bt) = round_bounds(g);
    let mut w = Vec::new();
    if o.halted_by == HaltReason::RoundCap {
        w.push(Witness::Detail(format!("round cap {} reached", o.max_rounds)));
    }
    match o.rounds_stage1 {
        Some(s1) if s1 > b1 => w.push(Witness::Detail(format!("stage 1 took {s1} > {b1} rounds"))),
        None => w.push(Witness::Detail("no robot settled".into())),
        _ => {}
    }
    if o.strategy == Strategy::Main && o.rounds_total > bt {
        w.push(Witness::Detail(format!("run took {} > {bt} rounds", o.rounds_total)));
    }
    CheckReport::from_witness("round-bounds", CLAIM, w)
}

/// Stage 1 ended back at the root with robots to spare, so every edge the
/// group entered was also left again.
pub fn full_traversal(o: &SimOutcome) -> bool {
    o.placement.get(&o.root).is_some_and(|ids| ids.len() >= 2)
}

pub fn check_traversal_counts(o: &SimOutcome, g: &PortLabeledGraph) -> CheckReport {
    const CLAIM: &str = "tree edges are crossed at most twice, other edges at most four times";
    let full = full_traversal(o);
    let mut w = Vec::new();
    for (e, rec) in o.ledger.iter() {
        let bad = match rec.class {
            EdgeClass::Tree => rec.count > 2 || (full && rec.count != 2),
            EdgeClass::Nontree => rec.count > 4,
            EdgeClass::Untraversed => false,
        };
        if bad {
            w.push(Witness::Edge(e.lo, e.hi));
        }
    }
    let (n, m) = (g.node_count() as u64, g.edge_count() as u64);
    let limit = (4 * m + 2).saturating_sub(2 * n);
    if full && o.ledger.total() > limit {
        w.push(Witness::Detail(format!("{} traversals > {limit}", o.ledger.total())));
    }
    CheckReport::from_witness("traversal-counts", CLAIM, w)
}

pub fn check_tree_structure(ledger: &TraversalLedger, g: &PortLabeledGraph) -> CheckReport {
    const CLAIM: &str = "tree edges form a connected acyclic edge set with at most n-1 edges";
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut w = Vec::new();
    let mut touched = BTreeSet::new();
    let mut edges = 0;
    for (e, rec) in ledger.iter() {
        if rec.class != EdgeClass::Tree {
            continue;
        }
        edges += 1;
        touched.insert(e.lo);
        touched.insert(e.hi);
        let (a, b) = (find(&mut parent, e.lo), find(&mut parent, e.hi));
        if a == b {
            w.push(Witness::Edge(e.lo, e.hi));
        } else {
            parent[a] = b;
        }
    }
    let roots: BTreeSet<usize> = touched.iter().map(|&u| find(&mut parent, u)).collect();
    if roots.len() > 1 {
        w.push(Witness::Detail(format!("tree edges split into {} components", roots.len())));
    }
    if edges > n.saturating_sub(1) {
        w.push(Witness::Detail(format!("{edges} tree edges on {n} nodes")));
    }
    CheckReport::from_witness("tree-structure", CLAIM, w)
}

pub fn check_termination(o: &SimOutcome, trace: Option<&TraceAudit>) -> CheckReport {
    const CLAIM: &str = "every robot terminates with count' = count and never moves afterwards";
    if o.strategy == Strategy::Warmup {
        return CheckReport::skipped("termination", CLAIM, "the warm-up strategy does not terminate");
    }
    let mut w = Vec::new();
    for r in &o.robot_finals {
        if !r.terminate || !r.halted || (r.act_settled && r.count_prime != r.count) {
            w.push(Witness::Robot(r.id));
        }
    }
    if let Some(t) = trace {
        for &(robot, round) in &t.after_termination {
            w.push(Witness::Detail(format!("robot {robot} active in round {round} after terminating")));
        }
    }
    CheckReport::from_witness("termination", CLAIM, w)
}

/// Every node hosted the stage-1 group at least once (full traversals only).
pub fn check_full_visitation(o: &SimOutcome, g: &PortLabeledGraph, trace: &TraceAudit) -> CheckReport {
    const CLAIM: &str = "on a full traversal the group visits every node";
    if !full_traversal(o) {
        return CheckReport::skipped("full-visitation", CLAIM, "stage 1 did not end at the root");
    }
    let w = (0..g.node_count())
        .filter(|u| !trace.group_visited.contains(u))
        .map(Witness::Node)
        .collect();
    CheckReport::from_witness("full-visitation", CLAIM, w)
}

pub fn check_trace_order(trace: &TraceAudit) -> CheckReport {
    const CLAIM: &str = "trace rounds never decrease and steps run comm, compute, move";
    let w = trace.out_of_order.iter().map(|&r| Witness::Round(r)).collect();
    CheckReport::from_witness("trace-order", CLAIM, w)
}

/// Placement-level checks, usable on any externally supplied placement.
pub fn placement_suite(g: &PortLabeledGraph, p: &Placement, root: NodeId) -> Vec<CheckReport> {
    vec![check_independence(g, p), check_no_vacant(g, p), check_mis(g, p), check_multiplicity(p, root)]
}

/// Every applicable check for a completed run. Trace-based checks run when
/// `trace` is given.
pub fn run_suite(o: &SimOutcome, g: &PortLabeledGraph, trace: Option<&TraceAudit>) -> Vec<CheckReport> {
    let mut out = placement_suite(g, &o.placement, o.root);
    if !o.unsettled.is_empty() {
        let w = o.unsettled.iter().map(|&(r, _)| Witness::Robot(r)).collect();
        out.push(CheckReport::from_witness("all-settled", "every robot settles", w));
    }
    out.push(check_round_bounds(o, g));
    out.push(check_traversal_counts(o, g));
    out.push(check_tree_structure(&o.ledger, g));
    out.push(check_termination(o, trace));
    if let Some(t) = trace {
        out.push(check_full_visitation(o, g, t));
        out.push(check_trace_order(t));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_path;

    #[test]
    fn placement_checks_on_paths() {
        let p3 = gen_path(3).unwrap();
        let good = Placement::from([(0, vec![1]), (2, vec![2])]);
        assert!(all_passed(&placement_suite(&p3, &good, 0)));
        let bad = Placement::from([(0, vec![1]), (1, vec![2])]);
        assert_eq!(check_independence(&p3, &bad).witness, vec![Witness::Edge(0, 1)]);

        let p5 = gen_path(5).unwrap();
        let lonely = Placement::from([(0, vec![1, 2])]);
        let nv = check_no_vacant(&p5, &lonely);
        assert_eq!(nv.witness, vec![Witness::Node(2), Witness::Node(3), Witness::Node(4)]);
        let two = Placement::from([(0, vec![1, 2]), (2, vec![3])]);
        assert_eq!(check_mis(&p5, &two).witness, vec![Witness::Node(4)]);
        assert_eq!(check_no_vacant(&p5, &good).verdict, Verdict::Skipped);
    }

    #[test]
    fn multiplicity_off_root() {
        let p = Placement::from([(0, vec![1]), (3, vec![2, 4])]);
        assert_eq!(check_multiplicity(&p, 0).witness, vec![Witness::Node(3)]);
        assert!(!check_multiplicity(&p, 3).failed());
    }

    #[test]
    fn bounds_arithmetic() {
        let k2 = crate::graph::gen_clique(2, crate::graph::PortRule::Canonical, 0).unwrap();
        assert_eq!(round_bounds(&k2), (4, 10));
        let k3 = crate::graph::gen_ring(3).unwrap();
        assert_eq!(round_bounds(&k3), (32, 72));
    }
}
