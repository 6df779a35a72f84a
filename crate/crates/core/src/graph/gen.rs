use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GraphError, NodeId, PortLabeledGraph};

/// How generators number the ports of each node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortRule {
    /// Port `p` leads to the `p`-th smallest neighbor id.
    Canonical,
    /// Per-node permutation drawn from the seed.
    Random,
}

impl std::str::FromStr for PortRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "canonical" => Ok(PortRule::Canonical),
            "random" => Ok(PortRule::Random),
            other => Err(format!("unknown port rule `{other}`")),
        }
    }
}

/// Generator output for the two-clique construction, with its marked nodes.
#[derive(Debug, Clone)]
pub struct LowerBoundGraph {
    pub graph: PortLabeledGraph,
    /// `v1`, `v2`: endpoints of the edge removed from the first clique.
    pub v: [NodeId; 2],
    /// `u1`, `u2`: endpoints of the edge removed from the second clique.
    pub u: [NodeId; 2],
}

// Stream 0 drives structure; node `u` permutes its ports with stream `u + 1`.
fn node_rng(seed: u64, node: NodeId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(node as u64 + 1);
    rng
}

fn assign_ports(mut lists: Vec<Vec<NodeId>>, rule: PortRule, seed: u64) -> Result<PortLabeledGraph, GraphError> {
    for (u, row) in lists.iter_mut().enumerate() {
        row.sort_unstable();
        if rule == PortRule::Random {
            row.shuffle(&mut node_rng(seed, u));
        }
    }
    PortLabeledGraph::from_neighbor_lists(&lists)
}

fn lists_from_edges(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Vec<Vec<NodeId>> {
    let mut lists = vec![Vec::new(); n];
    for (a, b) in edges {
        lists[a].push(b);
        lists[b].push(a);
    }
    lists
}

pub fn gen_clique(n: usize, rule: PortRule, seed: u64) -> Result<PortLabeledGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidParameter(format!("clique needs n >= 2, got {n}")));
    }
    let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
    assign_ports(lists_from_edges(n, edges), rule, seed)
}

/// Two `n`-cliques, each missing one edge, cross-joined through the endpoints
/// of the missing edges. The result is `(n - 1)`-regular on `2n` nodes.
///
/// Nodes `0..n` form the first clique with `v1 = 0`, `v2 = 1`; nodes `n..2n`
/// form the second with `u1 = n`, `u2 = n + 1`.
pub fn gen_lower_bound_family(n: usize, seed: u64) -> Result<LowerBoundGraph, GraphError> {
    if n < 3 {
        return Err(GraphError::InvalidParameter(format!("lower-bound family needs n >= 3, got {n}")));
    }
    let (v1, v2, u1, u2) = (0, 1, n, n + 1);
    let mut edges = Vec::new();
    for base in [0, n] {
        for a in 0..n {
            for b in a + 1..n {
                if !(a == 0 && b == 1) {
                    edges.push((base + a, base + b));
                }
            }
        }
    }
    edges.push((v1, u1));
    edges.push((v2, u2));
    let graph = assign_ports(lists_from_edges(2 * n, edges), PortRule::Random, seed)?;
    Ok(LowerBoundGraph { graph, v: [v1, v2], u: [u1, u2] })
}

/// Connected simple graph with exactly `m` edges: a random spanning tree plus
/// `m - (n - 1)` extra edges drawn uniformly from the remaining pairs.
pub fn gen_random_connected(n: usize, m: usize, seed: u64) -> Result<PortLabeledGraph, GraphError> {
    if n == 0 || m + 1 < n || m > n * (n - 1) / 2 {
        return Err(GraphError::InfeasibleEdgeCount { n, m });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<NodeId> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut present = vec![vec![false; n]; n];
    let mut edges = Vec::with_capacity(m);
    for i in 1..n {
        let a = order[i];
        let b = order[rng.gen_range(0..i)];
        present[a][b] = true;
        present[b][a] = true;
        edges.push((a.min(b), a.max(b)));
    }
    let mut rest: Vec<(NodeId, NodeId)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| !present[a][b])
        .collect();
    rest.shuffle(&mut rng);
    edges.extend(rest.into_iter().take(m + 1 - n));
    assign_ports(lists_from_edges(n, edges), PortRule::Random, seed)
}

pub fn gen_path(n: usize) -> Result<PortLabeledGraph, GraphError> {
    if n < 2 {
        return Err(GraphError::InvalidParameter(format!("path needs n >= 2, got {n}")));
    }
    assign_ports(lists_from_edges(n, (1..n).map(|i| (i - 1, i))), PortRule::Canonical, 0)
}

pub fn gen_ring(n: usize) -> Result<PortLabeledGraph, GraphError> {
    if n < 3 {
        return Err(GraphError::InvalidParameter(format!("ring needs n >= 3, got {n}")));
    }
    let edges = (0..n).map(|i| (i, (i + 1) % n));
    assign_ports(lists_from_edges(n, edges), PortRule::Canonical, 0)
}
