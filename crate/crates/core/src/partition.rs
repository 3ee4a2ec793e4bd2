//! Balanced k-way partition of a spanning tree by cutting k-1 tree edges.
//!
//! A post-order pass accumulates, for every vertex, the number of vertices
//! below it that are still attached. When that count reaches the current
//! target share, the edge to the parent is cut and the count stops propagating
//! upwards. If the pass ends with fewer than `k - 1` cuts, an adjustment phase
//! keeps cutting the remaining tree edge whose dangling piece is closest to the
//! next outstanding target.

use crate::error::{Error, Result};
use crate::graph::EdgeId;
use crate::ust::SpanningTree;

/// Rooted structure of a tree, as produced by [`dfs_preprocess`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeLayout {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub parent_edge: Vec<Option<EdgeId>>,
    pub children: Vec<Vec<usize>>,
    /// Every vertex once, children before parents.
    pub post_order: Vec<usize>,
    pub subtree_sizes: Vec<usize>,
}

/// Children lists, post-order and subtree sizes with an explicit stack.
pub fn dfs_preprocess(tree: &SpanningTree) -> TreeLayout {
    let n = tree.vertex_count();
    let mut children = vec![Vec::new(); n];
    for (v, p) in tree.parent.iter().enumerate() {
        if let Some(p) = *p {
            children[p].push(v);
        }
    }
    let mut post_order = Vec::with_capacity(n);
    let mut subtree_sizes = vec![1usize; n];
    if n > 0 {
        // (vertex, index of next child to visit)
        let mut stack = vec![(tree.root, 0usize)];
        while let Some(top) = stack.last_mut() {
            let (u, i) = *top;
            if let Some(&c) = children[u].get(i) {
                top.1 += 1;
                stack.push((c, 0));
            } else {
                stack.pop();
                post_order.push(u);
                if let Some(p) = tree.parent[u] {
                    subtree_sizes[p] += subtree_sizes[u];
                }
            }
        }
    }
    TreeLayout {
        root: tree.root,
        parent: tree.parent.clone(),
        parent_edge: tree.parent_edge.clone(),
        children,
        post_order,
        subtree_sizes,
    }
}

/// Target class sizes: `q + 1` repeated `r` times, then `q` repeated `k - r`
/// times, with `q = n / k` and `r = n - q k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetShares {
    pub q: usize,
    pub r: usize,
    pub targets: Vec<usize>,
    cursor: usize,
}

impl TargetShares {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k < 1 || k > n {
            return Err(Error::InvalidK { k, n });
        }
        let q = n / k;
        let r = n - q * k;
        let mut targets = vec![q + 1; r];
        targets.resize(k, q);
        Ok(TargetShares {
            q,
            r,
            targets,
            cursor: 0,
        })
    }

    pub fn current(&self) -> usize {
        self.targets[self.cursor.min(self.targets.len() - 1)]
    }

    fn advance(&mut self) {
        self.cursor += 1;
    }
}

pub fn target_shares(n: usize, k: usize) -> Result<TargetShares> {
    TargetShares::new(n, k)
}

/// Assignment of every tree vertex to one of `k` connected classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub k: usize,
    pub class_of: Vec<usize>,
    pub class_sizes: Vec<usize>,
    /// The cut tree edges, in cut order.
    pub tree_cuts: Vec<EdgeId>,
}

impl Partition {
    pub fn max_class(&self) -> usize {
        self.class_sizes.iter().copied().max().unwrap_or(0)
    }
}

/// Cuts `k - 1` edges of `tree` into `k` connected classes of near-equal size.
///
/// Classes are numbered in cut order; the class containing the root is last.
pub fn balanced_partition(tree: &SpanningTree, k: usize) -> Result<Partition> {
    let n = tree.vertex_count();
    let mut shares = TargetShares::new(n, k)?;
    let layout = dfs_preprocess(tree);
    let parent = &layout.parent;

    // attached[u]: vertices of u's subtree still in u's piece
    let mut attached = vec![0usize; n];
    let mut cut_top: Vec<usize> = Vec::with_capacity(k - 1);
    let mut is_cut = vec![false; n];

    for &u in &layout.post_order {
        let rem = 1 + layout.children[u]
            .iter()
            .map(|&c| attached[c])
            .sum::<usize>();
        attached[u] = rem;
        if u != layout.root && cut_top.len() < k - 1 && rem >= shares.current() {
            cut_top.push(u);
            is_cut[u] = true;
            shares.advance();
            attached[u] = 0;
        }
    }

    // Adjustment: detached size of the piece hanging below each uncut edge.
    // `attached` is zero at cut tops; restore their own piece size first.
    if cut_top.len() < k - 1 {
        let mut piece = attached;
        for &u in &layout.post_order {
            if is_cut[u] {
                piece[u] = 1 + layout.children[u]
                    .iter()
                    .filter(|&&c| !is_cut[c])
                    .map(|&c| piece[c])
                    .sum::<usize>();
            }
        }
        while cut_top.len() < k - 1 {
            let target = shares.current();
            let best = (0..n)
                .filter(|&u| u != layout.root && !is_cut[u])
                .min_by_key(|&u| {
                    let e = layout.parent_edge[u].expect("non-root has a parent edge");
                    (piece[u].abs_diff(target), e)
                })
                .expect("k <= n leaves an uncut tree edge");
            is_cut[best] = true;
            cut_top.push(best);
            shares.advance();
            // the piece above `best` shrinks up to and including its class top
            let removed = piece[best];
            let mut a = parent[best];
            while let Some(p) = a {
                piece[p] -= removed;
                if is_cut[p] {
                    break;
                }
                a = parent[p];
            }
        }
    }

    let mut class_id = vec![usize::MAX; n];
    for (i, &u) in cut_top.iter().enumerate() {
        class_id[u] = i;
    }
    let root_class = k - 1;
    let mut class_of = vec![0usize; n];
    let mut class_sizes = vec![0usize; k];
    for &u in layout.post_order.iter().rev() {
        let c = if u == layout.root {
            root_class
        } else if is_cut[u] {
            class_id[u]
        } else {
            class_of[parent[u].expect("non-root has a parent")]
        };
        class_of[u] = c;
        class_sizes[c] += 1;
    }
    let tree_cuts = cut_top
        .iter()
        .map(|&u| layout.parent_edge[u].expect("cut vertex is not the root"))
        .collect();

    Ok(Partition {
        k,
        class_of,
        class_sizes,
        tree_cuts,
    })
}
