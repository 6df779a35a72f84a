//! Brute-force maximal-independent-set oracle. Uses only the adjacency
//! structure and the set of occupied nodes.

use crate::graph::{NodeId, PortLabeledGraph};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MisDefect {
    /// Two occupied nodes share an edge.
    Adjacent(NodeId, NodeId),
    /// A vacant node with no occupied neighbor could be added.
    Addable(NodeId),
}

/// Every defect of `occupied` as a maximal independent set of `g`.
pub fn mis_defects(g: &PortLabeledGraph, occupied: &[bool]) -> Vec<MisDefect> {
    let mut out = Vec::new();
    for u in 0..g.node_count() {
        let mut covered = occupied[u];
        for &(v, _) in g.ports(u) {
            if occupied[v] {
                if occupied[u] && u < v {
                    out.push(MisDefect::Adjacent(u, v));
                }
                covered = true;
            }
        }
        if !covered {
            out.push(MisDefect::Addable(u));
        }
    }
    out
}

pub fn is_maximal_independent(g: &PortLabeledGraph, occupied: &[bool]) -> bool {
    mis_defects(g, occupied).is_empty()
}

/// All maximal independent sets of a small graph, as sorted node lists.
/// Exponential; intended for tests on graphs with at most ~20 nodes.
pub fn enumerate_mis(g: &PortLabeledGraph) -> Vec<Vec<NodeId>> {
    let n = g.node_count();
    assert!(n <= 24, "enumeration is exponential in n");
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let occ: Vec<bool> = (0..n).map(|u| mask >> u & 1 == 1).collect();
        if is_maximal_independent(g, &occ) {
            out.push((0..n).filter(|&u| occ[u]).collect());
        }
    }
    out
}
