//! Placement files: one line per occupied node, `<node> <id>[,<id>...]`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::NodeId;
use crate::robots::RobotId;

pub type Placement = BTreeMap<NodeId, Vec<RobotId>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct PlacementError {
    pub line: usize,
    pub msg: String,
}

pub fn parse_placement(text: &str) -> Result<Placement, PlacementError> {
    let mut out = Placement::new();
    let mut seen_ids = std::collections::BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let err = |msg: String| PlacementError { line, msg };
        let mut parts = l.split_ascii_whitespace();
        let (Some(node), Some(ids), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err("expected `<node> <id>[,<id>...]`".into()));
        };
        let node: NodeId = node.parse().map_err(|_| err(format!("`{node}` is not a node id")))?;
        if out.contains_key(&node) {
            return Err(err(format!("node {node} listed twice")));
        }
        let mut list = Vec::new();
        for tok in ids.split(',') {
            let id: RobotId = tok.parse().map_err(|_| err(format!("`{tok}` is not a robot id")))?;
            if !seen_ids.insert(id) {
                return Err(err(format!("robot {id} placed twice")));
            }
            list.push(id);
        }
        list.sort_unstable();
        out.insert(node, list);
    }
    Ok(out)
}

pub fn serialize_placement(p: &Placement) -> String {
    let mut out = String::new();
    for (node, ids) in p {
        let ids: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{node} {}", ids.join(","));
    }
    out
}
