//! Synthetic signed networks shared by the integration suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signed_poincare::{ConflictPolicy, EdgeRecord, Sign, SignedGraph};

pub fn graph(node_count: usize, edges: &[EdgeRecord]) -> SignedGraph {
    SignedGraph::from_edges(node_count, edges, ConflictPolicy::NegativeWins).unwrap().0
}

/// Two `size`-cliques, positive inside, every cross pair negative.
pub fn two_cliques(size: usize) -> SignedGraph {
    let n = 2 * size;
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let sign = if (a < size) == (b < size) { Sign::Positive } else { Sign::Negative };
            edges.push(EdgeRecord::new(a, b, sign));
        }
    }
    graph(n, &edges)
}

/// Two 20-cliques as in [`two_cliques`] with no cross links, plus one bridge
/// node (index 40) positively linked to the first five members of each.
pub fn bridged_cliques() -> (SignedGraph, usize) {
    let size = 20;
    let bridge = 2 * size;
    let mut edges = Vec::new();
    for a in 0..2 * size {
        for b in a + 1..2 * size {
            let sign = if (a < size) == (b < size) { Sign::Positive } else { Sign::Negative };
            edges.push(EdgeRecord::new(a, b, sign));
        }
    }
    for i in 0..5 {
        edges.push(EdgeRecord::new(bridge, i, Sign::Positive));
        edges.push(EdgeRecord::new(bridge, size + i, Sign::Positive));
    }
    (graph(bridge + 1, &edges), bridge)
}

/// Balanced random network: `groups` equal communities, positive links
/// inside with probability `p_in`, negative links across with `p_out`.
pub fn community_network(nodes: usize, groups: usize, p_in: f64, p_out: f64, seed: u64) -> SignedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let group = |v: usize| v * groups / nodes;
    let mut edges = Vec::new();
    for a in 0..nodes {
        for b in a + 1..nodes {
            let same = group(a) == group(b);
            if rng.random_bool(if same { p_in } else { p_out }) {
                edges.push(EdgeRecord::new(a, b, if same { Sign::Positive } else { Sign::Negative }));
            }
        }
    }
    graph(nodes, &edges)
}

pub fn signs(edges: &[EdgeRecord]) -> Vec<Sign> {
    edges.iter().map(|e| e.sign).collect()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
