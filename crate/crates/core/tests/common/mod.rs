#![allow(dead_code)]

use std::collections::BTreeSet;

use linkpred::graph::{Edge, Graph, VertexId};
use linkpred::{split_edges, EdgeSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Each ordered pair becomes an edge with probability `p`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as VertexId {
        for v in 0..n as VertexId {
            if u != v && rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap().0
}

/// Growing graph: every new vertex links to `out_links` earlier vertices
/// chosen proportionally to in-degree + 1, and each chosen vertex links back
/// with probability `back`.
pub fn preferential_attachment(n: usize, out_links: usize, back: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<Edge> = Vec::new();
    // one entry per vertex plus one per in-edge
    let mut pool: Vec<VertexId> = Vec::new();
    for v in 0..n as VertexId {
        if v > 0 {
            let mut chosen = BTreeSet::new();
            for _ in 0..out_links.min(v as usize) {
                chosen.insert(pool[rng.gen_range(0..pool.len())]);
            }
            for t in chosen {
                edges.push((v, t));
                pool.push(t);
                if rng.gen_bool(back) {
                    edges.push((t, v));
                    pool.push(v);
                }
            }
        }
        pool.push(v);
    }
    Graph::from_edges(n, edges).unwrap().0
}

/// A random small graph of either family, with density drawn from the seed.
pub fn random_small_graph(seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = rng.gen_range(5..=60);
    if seed.is_multiple_of(2) {
        let p = rng.gen_range(0.02..0.35);
        erdos_renyi(n, p, seed)
    } else {
        let links = rng.gen_range(1..=4);
        let back = rng.gen_range(0.0..0.5);
        preferential_attachment(n, links, back, seed)
    }
}

/// Training graph and valid test set: a 10-30% split when possible,
/// otherwise the whole graph with an empty test set.
pub fn random_instance(seed: u64) -> (Graph, EdgeSet) {
    let g = random_small_graph(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(7));
    let fraction = rng.gen_range(0.1..0.3);
    match split_edges(&g, fraction, seed) {
        Ok(split) => {
            let test = split.test_set();
            (split.train, test)
        }
        Err(_) => {
            let n = g.vertex_count();
            (g, EdgeSet::empty(n))
        }
    }
}

pub fn same_bits(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits()
}
