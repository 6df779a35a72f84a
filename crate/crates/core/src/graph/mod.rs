//! Anonymous port-labelled graphs.
//!
//! Every node numbers its incident edges `0..degree`. The two ends of an edge
//! carry independent port numbers. Node ids exist only for the simulator and
//! the checkers; robots see a node through its degree and the port they
//! arrived on.

mod gen;
mod io;

use std::collections::VecDeque;

use thiserror::Error;

pub use gen::{
    gen_clique, gen_lower_bound_family, gen_path, gen_random_connected, gen_ring, LowerBoundGraph,
    PortRule,
};
pub use io::{parse, serialize, to_dot};

pub type NodeId = usize;
pub type Port = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("node {node} out of range (n = {n})")]
    NodeOutOfRange { node: usize, n: usize, edge: usize },
    #[error("self-loop at node {node}")]
    SelfLoop { node: NodeId, edge: usize },
    #[error("node {node} reuses port {port}")]
    DuplicatePort { node: NodeId, port: Port, edge: usize },
    #[error("port link {u}:{p} -> {v}:{q} is not mirrored")]
    AsymmetricPort { u: NodeId, p: Port, v: NodeId, q: Port },
    #[error("node {node} uses port {port} but is missing port {missing}")]
    PortGap {
        node: NodeId,
        port: Port,
        missing: Port,
        edge: Option<usize>,
    },
    #[error("parallel edges between {u} and {v}")]
    ParallelEdge { u: NodeId, v: NodeId, edge: Option<usize> },
    #[error("graph is disconnected: node {node} is unreachable from node 0")]
    Disconnected { node: NodeId },
    #[error("port {port} out of range at node {node} (degree {degree})")]
    PortOutOfRange { node: NodeId, port: Port, degree: usize },
    #[error("{n} nodes cannot carry {m} edges in a connected simple graph")]
    InfeasibleEdgeCount { n: usize, m: usize },
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<GraphError>,
    },
}

impl GraphError {
    /// Index of the input edge the error is attributed to, when there is one.
    fn edge_index(&self) -> Option<usize> {
        match *self {
            GraphError::NodeOutOfRange { edge, .. }
            | GraphError::SelfLoop { edge, .. }
            | GraphError::DuplicatePort { edge, .. } => Some(edge),
            GraphError::PortGap { edge, .. } | GraphError::ParallelEdge { edge, .. } => edge,
            _ => None,
        }
    }
}

/// Undirected edge key, `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId {
    pub lo: NodeId,
    pub hi: NodeId,
}

impl EdgeId {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a < b {
            EdgeId { lo: a, hi: b }
        } else {
            EdgeId { lo: b, hi: a }
        }
    }
}

impl std::fmt::Display for EdgeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

/// A validated, connected, simple port-labelled graph.
///
/// `adjacency[u][p] = (v, q)` means port `p` of `u` leads to `v`, entering it
/// through `v`'s port `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortLabeledGraph {
    adjacency: Vec<Vec<(NodeId, Port)>>,
}

impl PortLabeledGraph {
    /// Builds a graph from `(u, p, v, q)` quadruples, each describing one edge.
    pub fn build(node_count: usize, edges: &[(usize, usize, usize, usize)]) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::Empty);
        }
        let mut slots: Vec<Vec<Option<(NodeId, Port, usize)>>> = vec![Vec::new(); node_count];
        for (idx, &(u, p, v, q)) in edges.iter().enumerate() {
            for node in [u, v] {
                if node >= node_count {
                    return Err(GraphError::NodeOutOfRange { node, n: node_count, edge: idx });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { node: u, edge: idx });
            }
            for (node, port, other, other_port) in [(u, p, v, q), (v, q, u, p)] {
                let row = &mut slots[node];
                // A degree never exceeds the edge count, so such a port must leave a gap.
                if port >= edges.len() {
                    let missing = row.iter().position(Option::is_none).unwrap_or(row.len());
                    return Err(GraphError::PortGap { node, port, missing, edge: Some(idx) });
                }
                if row.len() <= port {
                    row.resize(port + 1, None);
                }
                if row[port].is_some() {
                    return Err(GraphError::DuplicatePort { node, port, edge: idx });
                }
                row[port] = Some((other, other_port, idx));
            }
        }

        let mut adjacency = Vec::with_capacity(node_count);
        for (node, row) in slots.into_iter().enumerate() {
            if let Some(missing) = row.iter().position(Option::is_none) {
                let (port, edge) = row
                    .iter()
                    .enumerate()
                    .rev()
                    .find_map(|(p, s)| s.map(|(_, _, e)| (p, e)))
                    .expect("a gap implies a higher occupied port");
                return Err(GraphError::PortGap { node, port, missing, edge: Some(edge) });
            }
            let mut seen = vec![usize::MAX; node_count];
            for s in row.iter().flatten() {
                let (other, _, edge) = *s;
                if seen[other] != usize::MAX {
                    return Err(GraphError::ParallelEdge {
                        u: node.min(other),
                        v: node.max(other),
                        edge: Some(edge),
                    });
                }
                seen[other] = edge;
            }
            adjacency.push(row.into_iter().map(|s| {
                let (v, q, _) = s.expect("checked for gaps");
                (v, q)
            }).collect());
        }
        let g = PortLabeledGraph { adjacency };
        g.check_connected()?;
        Ok(g)
    }

    /// Builds a graph from raw adjacency rows, validating every invariant.
    pub fn from_adjacency(adjacency: Vec<Vec<(NodeId, Port)>>) -> Result<Self, GraphError> {
        let n = adjacency.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        for (u, row) in adjacency.iter().enumerate() {
            let mut seen = vec![false; n];
            for (p, &(v, q)) in row.iter().enumerate() {
                if v >= n {
                    return Err(GraphError::NodeOutOfRange { node: v, n, edge: 0 });
                }
                if v == u {
                    return Err(GraphError::SelfLoop { node: u, edge: 0 });
                }
                if adjacency[v].get(q) != Some(&(u, p)) {
                    return Err(GraphError::AsymmetricPort { u, p, v, q });
                }
                if seen[v] {
                    return Err(GraphError::ParallelEdge { u: u.min(v), v: u.max(v), edge: None });
                }
                seen[v] = true;
            }
        }
        let g = PortLabeledGraph { adjacency };
        g.check_connected()?;
        Ok(g)
    }

    /// Assigns ports from per-node neighbor lists: `lists[u][p]` is the node
    /// behind port `p` of `u`. Lists must describe a symmetric simple graph.
    pub(crate) fn from_neighbor_lists(lists: &[Vec<NodeId>]) -> Result<Self, GraphError> {
        let n = lists.len();
        let mut port_of: Vec<std::collections::HashMap<NodeId, Port>> = vec![Default::default(); n];
        for (u, row) in lists.iter().enumerate() {
            for (p, &v) in row.iter().enumerate() {
                port_of[u].insert(v, p);
            }
        }
        let mut adjacency = Vec::with_capacity(n);
        for (u, row) in lists.iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (p, &v) in row.iter().enumerate() {
                let q = *port_of
                    .get(v)
                    .and_then(|m| m.get(&u))
                    .ok_or(GraphError::AsymmetricPort { u, p, v, q: usize::MAX })?;
                out.push((v, q));
            }
            adjacency.push(out);
        }
        Self::from_adjacency(adjacency)
    }

    fn check_connected(&self) -> Result<(), GraphError> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(node) => Err(GraphError::Disconnected { node }),
            None => Ok(()),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Follows port `p` out of `u`.
    pub fn neighbor(&self, u: NodeId, p: Port) -> Result<(NodeId, Port), GraphError> {
        let row = &self.adjacency[u];
        row.get(p)
            .copied()
            .ok_or(GraphError::PortOutOfRange { node: u, port: p, degree: row.len() })
    }

    pub fn ports(&self, u: NodeId) -> &[(NodeId, Port)] {
        &self.adjacency[u]
    }

    pub fn neighbors(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency[u].iter().map(|&(v, _)| v)
    }

    pub fn are_adjacent(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).any(|w| w == v)
    }

    /// Every undirected edge once, in canonical `(u, p)` order with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, Port, NodeId, Port)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, row)| {
            row.iter()
                .enumerate()
                .filter(move |(_, &(v, _))| u < v)
                .map(move |(p, &(v, q))| (u, p, v, q))
        })
    }
}
