use std::collections::BTreeMap;

use serde::Serialize;

use crate::graph::EdgeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeClass {
    Tree,
    Nontree,
    Untraversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EdgeRecord {
    pub count: u32,
    pub class: EdgeClass,
    pub first_round: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Explore,
    Backtrack,
}

/// Edge traversals of the stage-1 group.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraversalLedger {
    edges: BTreeMap<EdgeId, EdgeRecord>,
    total: u64,
    /// Edge of the last forward move, while the group stays at its head.
    pending: Option<EdgeId>,
}

impl TraversalLedger {
    pub fn record_traversal(&mut self, edge: EdgeId, direction: Direction, round: u64) {
        self.total += 1;
        let rec = self.edges.entry(edge).or_insert(EdgeRecord {
            count: 0,
            class: EdgeClass::Nontree,
            first_round: round,
        });
        rec.count += 1;
        self.pending = (direction == Direction::Explore).then_some(edge);
    }

    /// The forward move just made is a tree edge: its head was settled or
    /// its parent port was stored.
    pub fn mark_pending_tree(&mut self) {
        if let Some(e) = self.pending.take() {
            if let Some(rec) = self.edges.get_mut(&e) {
                rec.class = EdgeClass::Tree;
            }
        }
    }

    pub fn get(&self, edge: EdgeId) -> Option<&EdgeRecord> {
        self.edges.get(&edge)
    }

    pub fn class(&self, edge: EdgeId) -> EdgeClass {
        self.edges.get(&edge).map_or(EdgeClass::Untraversed, |r| r.class)
    }

    pub fn count(&self, edge: EdgeId) -> u32 {
        self.edges.get(&edge).map_or(0, |r| r.count)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EdgeId, &EdgeRecord)> {
        self.edges.iter()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn tree_edges(&self) -> usize {
        self.edges.values().filter(|r| r.class == EdgeClass::Tree).count()
    }

    /// Sum of traversal counts over non-tree edges.
    pub fn nontree_traversals(&self) -> u64 {
        self.edges
            .values()
            .filter(|r| r.class == EdgeClass::Nontree)
            .map(|r| u64::from(r.count))
            .sum()
    }
}
