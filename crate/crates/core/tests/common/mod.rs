//! Graph builders and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use dismantle::seeds::rng_from_seed;
use dismantle::{components, EdgeId, EdgeSet, Graph};
use rand::Rng;

pub fn path(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
}

pub fn cycle(n: usize) -> Graph {
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
}

pub fn complete(n: usize) -> Graph {
    Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
}

/// Connected graph on `n` vertices: a random recursive tree plus up to
/// `extra` further distinct edges.
pub fn random_connected(n: usize, extra: usize, seed: u64) -> Graph {
    let mut rng = rng_from_seed(seed);
    let mut edges = BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.insert((u, v));
    }
    let cap = n * (n - 1) / 2;
    let target = (edges.len() + extra).min(cap);
    while edges.len() < target {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Smallest lcc reachable by removing at most `budget` edges, by exhaustive
/// search over all subsets.
pub fn optimal_lcc(g: &Graph, budget: usize) -> usize {
    let m = g.edge_count();
    let mut best = g.vertex_count();
    let mut chosen = Vec::new();
    fn rec(g: &Graph, start: usize, left: usize, chosen: &mut Vec<EdgeId>, best: &mut usize) {
        let set: EdgeSet = chosen.iter().copied().collect();
        *best = (*best).min(components(g, &set).lcc);
        if left == 0 {
            return;
        }
        for e in start..g.edge_count() {
            chosen.push(EdgeId(e));
            rec(g, e + 1, left - 1, chosen, best);
            chosen.pop();
        }
    }
    rec(g, 0, budget.min(m), &mut chosen, &mut best);
    best
}

/// Every spanning tree of `g` as a sorted edge-index list.
pub fn all_spanning_trees(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.vertex_count();
    let m = g.edge_count();
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let removed: EdgeSet = (0..m)
            .filter(|e| mask & (1 << e) == 0)
            .map(EdgeId)
            .collect();
        if components(g, &removed).count() == 1 {
            out.push((0..m).filter(|e| mask & (1 << e) != 0).collect());
        }
    }
    out
}
