//! Text graph format and DOT export.
//!
//! ```text
//! # comment
//! <n> <m>
//! <u> <p> <v> <q>     (m lines)
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{GraphError, NodeId, PortLabeledGraph};

const MAX_NODES: usize = 1 << 22;

fn fields(line: &str, line_no: usize, want: usize) -> Result<Vec<usize>, GraphError> {
    let parts: Vec<&str> = line.split_ascii_whitespace().collect();
    if parts.len() != want {
        return Err(GraphError::Syntax {
            line: line_no,
            msg: format!("expected {want} fields, found {}", parts.len()),
        });
    }
    parts
        .iter()
        .map(|t| {
            t.parse::<usize>().map_err(|_| GraphError::Syntax {
                line: line_no,
                msg: format!("`{t}` is not a non-negative integer"),
            })
        })
        .collect()
}

pub fn parse(text: &str) -> Result<PortLabeledGraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines
        .next()
        .ok_or(GraphError::Syntax { line: 1, msg: "missing `<n> <m>` header".into() })?;
    let hv = fields(header, header_line, 2)?;
    let (n, m) = (hv[0], hv[1]);
    if n > MAX_NODES {
        return Err(GraphError::Syntax {
            line: header_line,
            msg: format!("node count {n} exceeds the supported maximum {MAX_NODES}"),
        });
    }

    let mut edges = Vec::with_capacity(m.min(1 << 20));
    let mut edge_lines = Vec::with_capacity(m.min(1 << 20));
    let mut last_line = header_line;
    for (line_no, line) in lines {
        if edges.len() == m {
            return Err(GraphError::Syntax {
                line: line_no,
                msg: format!("more than the {m} declared edges"),
            });
        }
        let f = fields(line, line_no, 4)?;
        edges.push((f[0], f[1], f[2], f[3]));
        edge_lines.push(line_no);
        last_line = line_no;
    }
    if edges.len() < m {
        return Err(GraphError::Syntax {
            line: last_line + 1,
            msg: format!("expected {m} edges, found {}", edges.len()),
        });
    }
    PortLabeledGraph::build(n, &edges).map_err(|e| match e.edge_index() {
        Some(idx) => GraphError::AtLine { line: edge_lines[idx], source: Box::new(e) },
        None => e,
    })
}

/// Canonical text form: header, then each edge once from its smaller endpoint,
/// sorted by `(u, p)`.
pub fn serialize(g: &PortLabeledGraph) -> String {
    let mut out = format!("{} {}\n", g.node_count(), g.edge_count());
    for (u, p, v, q) in g.edges() {
        let _ = writeln!(out, "{u} {p} {v} {q}");
    }
    out
}

/// Graphviz rendering; `placement` maps occupied nodes to their robot count.
pub fn to_dot(g: &PortLabeledGraph, placement: Option<&BTreeMap<NodeId, usize>>) -> String {
    let mut out = String::from("graph G {\n  node [shape=circle];\n");
    for u in 0..g.node_count() {
        match placement.and_then(|p| p.get(&u)).copied().filter(|&c| c > 0) {
            Some(c) => {
                let _ = writeln!(out, "  {u} [label=\"{u}\\n×{c}\", style=filled, fillcolor=gray];");
            }
            None => {
                let _ = writeln!(out, "  {u} [label=\"{u}\"];");
            }
        }
    }
    for (u, p, v, q) in g.edges() {
        let _ = writeln!(out, "  {u} -- {v} [taillabel=\"{p}\", headlabel=\"{q}\"];");
    }
    out.push_str("}\n");
    out
}
