//! Seeded generator of connected planar graphs on a jittered triangulated grid.
//!
//! Construction for `n` vertices:
//!
//! 1. Vertex `i` sits in grid cell `(i / cols, i % cols)` with
//!    `cols = ceil(sqrt n)`; its coordinate is the cell center plus a uniform
//!    jitter of at most 0.3 cell in each axis, inside the unit square.
//! 2. The grid lattice is connected and every cell gets one diagonal (random
//!    orientation when all four corners exist, the only possible one when the
//!    last, partial row leaves three).
//! 3. If the target exceeds that count, ears of the outer face are clipped:
//!    for consecutive boundary vertices `a, b, c` the edge `a-c` is drawn in the
//!    outer face around `b`. This keeps the graph planar and reaches `3n - 6`.
//! 4. Uniformly random non-bridge edges are deleted until the target is met.
//!
//! All randomness comes from one `ChaCha8Rng` stream seeded with the spec seed.

use std::collections::HashSet;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seeds::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub nodes: usize,
    pub edges: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(nodes: usize, edges: usize, seed: u64) -> Self {
        GenSpec { nodes, edges, seed }
    }
}

/// Edge counts [min, max] this generator can produce for `nodes` vertices.
pub fn achievable_edges(nodes: usize) -> (usize, usize) {
    let min = nodes.saturating_sub(1);
    let max = match nodes {
        0 | 1 => 0,
        2 => 1,
        n => 3 * n - 6,
    };
    (min, max)
}

struct Layout {
    cols: usize,
    full_rows: usize,
    rem: usize,
}

impl Layout {
    fn new(n: usize) -> Self {
        let cols = (n as f64).sqrt().ceil() as usize;
        let cols = cols.max(1);
        Layout {
            cols,
            full_rows: n / cols,
            rem: n % cols,
        }
    }

    fn rows(&self) -> usize {
        self.full_rows + usize::from(self.rem > 0)
    }

    fn id(&self, r: usize, c: usize) -> Option<usize> {
        let exists = r < self.full_rows || (r == self.full_rows && c < self.rem);
        (c < self.cols && exists).then(|| r * self.cols + c)
    }

    /// Outer boundary cycle, clockwise with rows growing downwards.
    fn boundary(&self) -> Vec<usize> {
        let (cols, fr, rem) = (self.cols, self.full_rows, self.rem);
        let id = |r: usize, c: usize| r * cols + c;
        let mut b = Vec::new();
        // top row, right column
        b.extend((0..cols).map(|c| id(0, c)));
        b.extend((1..fr).map(|r| id(r, cols - 1)));
        if rem == 0 {
            b.extend((0..cols - 1).rev().map(|c| id(fr - 1, c)));
            b.extend((1..fr - 1).rev().map(|r| id(r, 0)));
        } else {
            // step along row fr-1 to column rem, then down the diagonal to the partial row
            b.extend((rem..cols - 1).rev().map(|c| id(fr - 1, c)));
            b.extend((0..rem).rev().map(|c| id(fr, c)));
            b.extend((1..fr).rev().map(|r| id(r, 0)));
        }
        // a 2-vertex or 3-vertex grid can list the corner twice
        let mut seen = HashSet::new();
        b.retain(|v| seen.insert(*v));
        b
    }
}

/// Generates a connected planar graph with exactly `spec.nodes` vertices and
/// `spec.edges` edges, with unit-square coordinates attached.
pub fn generate(spec: GenSpec) -> Result<Graph> {
    let n = spec.nodes;
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 nodes, got {n}")));
    }
    let (min, max) = achievable_edges(n);
    if spec.edges < min || spec.edges > max {
        return Err(Error::UnreachableEdgeTarget {
            nodes: n,
            target: spec.edges,
            min,
            max,
        });
    }

    let mut rng = rng_from_seed(spec.seed);
    let layout = Layout::new(n);
    let rows = layout.rows();

    let coords: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let (r, c) = (i / layout.cols, i % layout.cols);
            let jx: f64 = rng.gen_range(-0.3..0.3);
            let jy: f64 = rng.gen_range(-0.3..0.3);
            (
                (c as f64 + 0.5 + jx) / layout.cols as f64,
                (r as f64 + 0.5 + jy) / rows as f64,
            )
        })
        .collect();

    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(3 * n);
    for r in 0..rows {
        for c in 0..layout.cols {
            let Some(v) = layout.id(r, c) else { continue };
            if let Some(w) = layout.id(r, c + 1) {
                edges.push((v, w));
            }
            if let Some(w) = layout.id(r + 1, c) {
                edges.push((v, w));
            }
            let main = layout.id(r + 1, c + 1).map(|w| (v, w));
            let anti = match (layout.id(r, c + 1), layout.id(r + 1, c)) {
                (Some(a), Some(b)) => Some((a, b)),
                _ => None,
            };
            let diag = match (main, anti) {
                (Some(m), Some(a)) => Some(if rng.gen_bool(0.5) { m } else { a }),
                (m, a) => m.or(a),
            };
            edges.extend(diag);
        }
    }

    if spec.edges > edges.len() {
        clip_outer_ears(&layout, &mut edges, spec.edges, &mut rng);
    }
    if spec.edges < edges.len() {
        delete_non_bridges(n, &mut edges, spec.edges, &mut rng);
    }
    debug_assert_eq!(edges.len(), spec.edges);

    Graph::new(n, edges)?.with_coords(coords)
}

fn clip_outer_ears(
    layout: &Layout,
    edges: &mut Vec<(usize, usize)>,
    target: usize,
    rng: &mut impl rand::Rng,
) {
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut present: HashSet<(usize, usize)> = edges.iter().map(|&(u, v)| key(u, v)).collect();
    let mut boundary = layout.boundary();
    while edges.len() < target && boundary.len() > 3 {
        let len = boundary.len();
        let start = rng.gen_range(0..len as u64) as usize;
        let ear = (0..len).map(|o| (start + o) % len).find(|&i| {
            let a = boundary[(i + len - 1) % len];
            let c = boundary[(i + 1) % len];
            !present.contains(&key(a, c))
        });
        let Some(i) = ear else { break };
        let a = boundary[(i + len - 1) % len];
        let c = boundary[(i + 1) % len];
        present.insert(key(a, c));
        edges.push((a, c));
        boundary.remove(i);
    }
}

fn delete_non_bridges(
    n: usize,
    edges: &mut Vec<(usize, usize)>,
    target: usize,
    rng: &mut impl rand::Rng,
) {
    let mut alive = vec![true; edges.len()];
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, i));
        adj[v].push((u, i));
    }
    // Deleting edges never turns a bridge back into a non-bridge, so bridges
    // leave the candidate pool permanently.
    let mut pool: Vec<usize> = (0..edges.len()).collect();
    let mut live = edges.len();
    let mut mark = vec![0u32; n];
    let mut epoch = 0u32;
    let mut stack = Vec::new();
    while live > target {
        let pick = rng.gen_range(0..pool.len() as u64) as usize;
        let e = pool.swap_remove(pick);
        let (u, v) = edges[e];
        epoch += 1;
        mark[u] = epoch;
        stack.clear();
        stack.push(u);
        let mut reached = false;
        'dfs: while let Some(x) = stack.pop() {
            for &(w, f) in &adj[x] {
                if f == e || !alive[f] || mark[w] == epoch {
                    continue;
                }
                if w == v {
                    reached = true;
                    break 'dfs;
                }
                mark[w] = epoch;
                stack.push(w);
            }
        }
        if reached {
            alive[e] = false;
            live -= 1;
        }
    }
    let mut i = 0;
    edges.retain(|_| {
        i += 1;
        alive[i - 1]
    });
}

/// Density feature `ln|E| / ln|V|`.
pub fn density_feature(g: &Graph) -> Result<f64> {
    density_from_counts(g.vertex_count(), g.edge_count())
}

pub fn density_from_counts(vertices: usize, edges: usize) -> Result<f64> {
    if vertices < 2 {
        return Err(Error::Domain(format!(
            "density feature needs |V| >= 2, got {vertices}"
        )));
    }
    if edges < 1 {
        return Err(Error::Domain("density feature needs |E| >= 1".into()));
    }
    Ok((edges as f64).ln() / (vertices as f64).ln())
}
