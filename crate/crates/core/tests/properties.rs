use d2d::checkers::{self, oracle, parse_placement, run_suite, serialize_placement, Placement, TraceAudit};
use d2d::engine::{run_traced, SimConfig, TraceEvent, TraceSink};
use d2d::graph::{gen_random_connected, PortLabeledGraph};
use d2d::robots::Strategy as Algo;
use proptest::prelude::*;

fn graph() -> impl Strategy<Value = PortLabeledGraph> {
    (2usize..14, 0usize..20, any::<u64>()).prop_map(|(n, extra, seed)| {
        let m = (n - 1 + extra).min(n * (n - 1) / 2);
        gen_random_connected(n, m, seed).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn every_check_passes(g in graph(), k in 1usize..18, root_pick in any::<usize>(), warm in any::<bool>()) {
        let root = root_pick % g.node_count();
        let cfg = if warm {
            SimConfig::warmup(k, root, g.max_degree() as u32)
        } else {
            SimConfig::main(k, root)
        };
        let mut audit = TraceAudit::new();
        let o = run_traced(&g, &cfg, Some(&mut audit as &mut dyn TraceSink)).unwrap();
        prop_assert_eq!(o.k(), k);
        for r in run_suite(&o, &g, Some(&audit)) {
            prop_assert!(!r.failed(), "{}", r);
        }
        if !warm && k > g.node_count() {
            let mut occ = vec![false; g.node_count()];
            for &u in o.placement.keys() {
                occ[u] = true;
            }
            prop_assert!(oracle::is_maximal_independent(&g, &occ));
        }
        if let Some(s1) = o.rounds_stage1 {
            prop_assert!(s1 <= o.rounds_total);
        }
    }

    #[test]
    fn more_robots_never_fewer_nodes(g in graph(), root_pick in any::<usize>()) {
        // Once robots spill over at the root the occupied set is maximal and stops growing.
        let root = root_pick % g.node_count();
        let n = g.node_count();
        let a = d2d::engine::run(&g, &SimConfig::main(n + 1, root)).unwrap();
        let b = d2d::engine::run(&g, &SimConfig::main(n + 5, root)).unwrap();
        prop_assert_eq!(a.placement.keys().collect::<Vec<_>>(), b.placement.keys().collect::<Vec<_>>());
        prop_assert_eq!(a.strategy, Algo::Main);
    }

    #[test]
    fn placement_round_trip(entries in proptest::collection::btree_map(0usize..50, 1usize..4, 0..10)) {
        let mut next = 1;
        let mut p = Placement::new();
        for (node, count) in entries {
            p.insert(node, (next..next + count as u32).collect());
            next += count as u32;
        }
        let text = serialize_placement(&p);
        prop_assert_eq!(parse_placement(&text).unwrap(), p);
    }

    #[test]
    fn placement_parser_never_panics(text in "[0-9 ,\n#x]{0,60}") {
        let _ = parse_placement(&text);
    }

    #[test]
    fn trace_lines_round_trip(g in graph(), k in 1usize..6) {
        let mut events: Vec<TraceEvent> = Vec::new();
        run_traced(&g, &SimConfig::main(k, 0), Some(&mut events as &mut dyn TraceSink)).unwrap();
        for e in events.iter().take(200) {
            let line = e.to_json_line();
            prop_assert_eq!(&TraceEvent::from_json_line(&line).unwrap(), e);
        }
    }

    #[test]
    fn mis_scanner_agrees_with_enumeration(n in 2usize..10, extra in 0usize..12, seed in any::<u64>(), mask in any::<u16>()) {
        let m = (n - 1 + extra).min(n * (n - 1) / 2);
        let g = gen_random_connected(n, m, seed).unwrap();
        let all = oracle::enumerate_mis(&g);
        let occ: Vec<bool> = (0..n).map(|u| mask >> u & 1 == 1).collect();
        let set: Vec<usize> = (0..n).filter(|&u| occ[u]).collect();
        prop_assert_eq!(oracle::is_maximal_independent(&g, &occ), all.contains(&set));
        let p: Placement = set.iter().map(|&u| (u, vec![u as u32 + 1])).collect();
        prop_assert_eq!(checkers::check_independence(&g, &p).failed(),
            (0..n).any(|u| occ[u] && g.neighbors(u).any(|v| occ[v])));
    }
}
