#![allow(dead_code)]

use std::path::PathBuf;

use d2d::graph::{gen_random_connected, parse, PortLabeledGraph};

/// The 200-graph corpus: `n` cycles through 2..=40 and `m` is spread between
/// a tree and `min(3n, n(n-1)/2)` edges.
pub fn corpus_graph(seed: u64) -> PortLabeledGraph {
    let n = 2 + (seed % 39) as usize;
    let max_m = (n * (n - 1) / 2).min(3 * n);
    let m = n - 1 + (seed as usize * 7919) % (max_m - (n - 1) + 1);
    gen_random_connected(n, m, seed).expect("corpus parameters are valid")
}

/// `k ∈ {1, ⌈n/2⌉, n, n+3}`.
pub fn corpus_ks(n: usize) -> [usize; 4] {
    [1, n.div_ceil(2), n, n + 3]
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn golden_graph(name: &str) -> PortLabeledGraph {
    let text = std::fs::read_to_string(golden_dir().join(format!("{name}.graph"))).unwrap();
    parse(&text).unwrap()
}
