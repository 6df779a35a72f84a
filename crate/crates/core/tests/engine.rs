mod common;

use std::collections::BTreeMap;

use d2d::checkers::{self, TraceAudit};
use d2d::engine::*;
use d2d::graph::*;
use d2d::robots::{RobotState, Strategy};

use common::golden_graph;

fn traced(g: &PortLabeledGraph, cfg: &SimConfig) -> (SimOutcome, Vec<TraceEvent>) {
    let mut events = Vec::new();
    let o = run_traced(g, cfg, Some(&mut events as &mut dyn TraceSink)).unwrap();
    (o, events)
}

fn edge(g: &SimOutcome, a: NodeId, b: NodeId) -> EdgeRecord {
    *g.ledger.get(EdgeId::new(a, b)).expect("edge traversed")
}

#[test]
fn k2_run() {
    let g = golden_graph("k2");
    let o = run(&g, &SimConfig::main(2, 0)).unwrap();
    assert_eq!(o.placement, BTreeMap::from([(0, vec![1, 2])]));
    assert_eq!(o.halted_by, HaltReason::AllTerminated);
    assert_eq!((o.rounds_stage1, o.rounds_total), (Some(4), 10));
    let e = edge(&o, 0, 1);
    assert_eq!((e.class, e.count), (EdgeClass::Tree, 2));
    let r1 = &o.robot_finals[0];
    assert_eq!((r1.count, r1.count_prime), (2, 2));
}

#[test]
fn p3_run() {
    let g = golden_graph("p3");
    let o = run(&g, &SimConfig::main(2, 0)).unwrap();
    assert_eq!(o.placement, BTreeMap::from([(0, vec![1]), (2, vec![2])]));
    assert_eq!((o.rounds_stage1, o.rounds_total), (Some(8), 25));
    for (a, b) in [(0, 1), (1, 2)] {
        let e = edge(&o, a, b);
        assert_eq!((e.class, e.count), (EdgeClass::Tree, 1));
    }
}

#[test]
fn k3_run() {
    let g = golden_graph("k3");
    let o = run(&g, &SimConfig::main(2, 0)).unwrap();
    assert_eq!(o.placement, BTreeMap::from([(0, vec![1, 2])]));
    assert_eq!((o.rounds_stage1, o.rounds_total), (Some(32), 66));
    let e = edge(&o, 1, 2);
    assert_eq!((e.class, e.count), (EdgeClass::Nontree, 4));
    assert_eq!(o.robot_finals[0].count, 8);
}

#[test]
fn single_robot_terminates_at_root() {
    for seed in 0..20 {
        let g = gen_random_connected(8, 12, seed).unwrap();
        let root = seed as usize % 8;
        let o = run(&g, &SimConfig::main(1, root)).unwrap();
        assert_eq!(o.placement, BTreeMap::from([(root, vec![1])]));
        assert!(o.rounds_total <= 2);
        assert_eq!(o.halted_by, HaltReason::AllTerminated);
    }
}

#[test]
fn deterministic_traces() {
    let g = gen_random_connected(12, 20, 5).unwrap();
    let cfg = SimConfig::main(7, 3);
    let (a, ta) = traced(&g, &cfg);
    let (b, tb) = traced(&g, &cfg);
    assert_eq!(ta, tb);
    assert_eq!(a.placement, b.placement);
    assert_eq!(a.rounds_total, b.rounds_total);
}

#[test]
fn trace_shape() {
    let g = gen_random_connected(10, 18, 9).unwrap();
    let (o, events) = traced(&g, &SimConfig::main(10, 0));
    let mut audit = TraceAudit::new();
    for e in &events {
        audit.observe(e);
    }
    assert!(audit.out_of_order.is_empty());
    assert!(audit.after_termination.is_empty());

    let mut moved = std::collections::BTreeSet::new();
    for e in events.iter().filter(|e| e.step == Step::Move) {
        assert!(moved.insert((e.round, e.robot)), "robot {} moved twice in round {}", e.robot, e.round);
        let dest: NodeId = e.action.rsplit(' ').next().unwrap().parse().unwrap();
        assert!(g.are_adjacent(e.node, dest));
    }

    // Ledger total equals the number of rounds in which the group moved.
    let group_moves: std::collections::BTreeSet<u64> =
        events.iter().filter(|e| e.step == Step::Move && e.vars.settled == 0).map(|e| e.round).collect();
    assert_eq!(o.ledger.total(), group_moves.len() as u64);

    for e in &events {
        assert_eq!(TraceEvent::from_json_line(&e.to_json_line()).unwrap(), *e);
    }
}

#[test]
fn inbox_delivery() {
    let g = gen_path(4).unwrap();
    let mut w = World::new(&g, &SimConfig::main(3, 0)).unwrap();
    let mail = w.deliver_messages();
    for i in 0..3 {
        let ids: Vec<_> = mail.inbox(i).iter().map(|m| m.id).collect();
        assert_eq!(ids.len(), 2);
        assert!(ids.windows(2).all(|p| p[0] < p[1]));
    }
    w.pos = vec![0, 2, 3];
    let mail = w.deliver_messages();
    assert!((0..3).all(|i| mail.inbox(i).is_empty()));
}

#[test]
fn arrival_is_visible_next_round() {
    let g = golden_graph("k2");
    let mut w = World::new(&g, &SimConfig::main(2, 0)).unwrap();
    w.step_round(&mut None).unwrap();
    // Round 0 moved the group and its special robot to node 1 together.
    assert_eq!(w.pos, vec![1, 1]);
    assert_eq!(w.deliver_messages().inbox(0).len(), 1);
}

#[test]
fn config_errors() {
    let g = gen_path(3).unwrap();
    assert!(matches!(run(&g, &SimConfig::main(0, 0)), Err(RunError::Config(ConfigError::NoRobots))));
    assert!(matches!(run(&g, &SimConfig::main(2, 3)), Err(RunError::Config(ConfigError::RootOutOfRange { .. }))));
    let mut cfg = SimConfig::warmup(2, 0, 1);
    assert!(matches!(run(&g, &cfg), Err(RunError::Config(ConfigError::KnownDeltaTooSmall { .. }))));
    cfg.known_delta = None;
    assert!(matches!(run(&g, &cfg), Err(RunError::Config(ConfigError::MissingKnownDelta))));
    let ids = SimConfig { robot_ids: Some(vec![3, 2]), ..SimConfig::main(2, 0) };
    assert!(run(&g, &ids).is_err());
}

#[test]
fn custom_ids() {
    let g = golden_graph("p3");
    let cfg = SimConfig { robot_ids: Some(vec![10, 40]), ..SimConfig::main(2, 0) };
    let o = run(&g, &cfg).unwrap();
    assert_eq!(o.placement, BTreeMap::from([(0, vec![10]), (2, vec![40])]));
}

#[test]
fn round_cap_is_reported() {
    let g = golden_graph("k3");
    let cfg = SimConfig { max_rounds: Some(10), ..SimConfig::main(2, 0) };
    let o = run(&g, &cfg).unwrap();
    assert_eq!(o.halted_by, HaltReason::RoundCap);
    assert_eq!(o.rounds_total, 10);
    assert!(checkers::check_round_bounds(&o, &g).failed());
    assert_eq!(default_round_cap(&g), 4 * 2 * (8 * 3 - 3 * 3 + 3) + 100);
}

#[test]
fn memory_audit_boundary() {
    let mut s = RobotState::new(1);
    assert!(audit_memory(&s, 3, 3).is_ok());
    s.count = count_bound(3) as u32;
    assert!(audit_memory(&s, 3, 3).is_ok());
    s.count += 1;
    let v = audit_memory(&s, 3, 3).unwrap_err();
    assert_eq!(v.field, "count");
    let mut s = RobotState::new(1);
    s.dist = 3;
    assert!(audit_memory(&s, 3, 3).is_err());
}

#[test]
fn warmup_settles_everyone_independently() {
    for seed in 0..30 {
        let g = gen_random_connected(12, 18, seed).unwrap();
        for k in [2, 6, 15] {
            let cfg = SimConfig::warmup(k, 0, g.max_degree() as u32 + 1);
            let o = run(&g, &cfg).unwrap();
            assert_eq!(o.strategy, Strategy::Warmup);
            assert_eq!(o.halted_by, HaltReason::AllSettled);
            assert_eq!(o.k(), k);
            assert!(!checkers::check_independence(&g, &o.placement).failed());
            assert!(!checkers::check_multiplicity(&o.placement, 0).failed());
        }
    }
}

#[test]
fn multiplicities_sum_to_k() {
    let g = gen_random_connected(9, 14, 2).unwrap();
    let o = run(&g, &SimConfig::main(20, 4)).unwrap();
    assert_eq!(o.multiplicities().values().sum::<usize>(), 20);
    assert!(o.multiplicities()[&4] >= 2);
}
