//! Uniform spanning trees by Wilson's loop-erased random walk.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{is_connected, EdgeId, Graph};
use crate::seeds::rng_from_seed;

/// Spanning tree stored as parent pointers into the host graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub parent_edge: Vec<Option<EdgeId>>,
}

impl SpanningTree {
    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    /// Tree edges in vertex order.
    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.parent_edge.iter().flatten().copied()
    }

    /// Builds a tree from the parent relation; used for trees that did not come
    /// from sampling (tests, tree-shaped inputs).
    pub fn from_parents(g: &Graph, root: usize, parent: Vec<Option<usize>>) -> Result<Self> {
        let parent_edge = parent
            .iter()
            .enumerate()
            .map(|(v, p)| match p {
                None => Ok(None),
                Some(p) => g
                    .find_edge(v, *p)
                    .map(Some)
                    .ok_or_else(|| Error::InvalidGraph(format!("no edge {v}-{p} in host"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let t = SpanningTree {
            root,
            parent,
            parent_edge,
        };
        t.validate(g)?;
        Ok(t)
    }

    /// Checks that this is a spanning tree of `g` (spans, acyclic, host edges).
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let n = g.vertex_count();
        let bad = |m: String| Err(Error::InvalidGraph(m));
        if self.parent.len() != n || self.parent_edge.len() != n {
            return bad(format!("tree covers {} of {n} vertices", self.parent.len()));
        }
        if n == 0 {
            return Ok(());
        }
        if self.root >= n || self.parent[self.root].is_some() {
            return bad("root must exist and have no parent".into());
        }
        for v in 0..n {
            match (self.parent[v], self.parent_edge[v]) {
                (None, None) if v == self.root => {}
                (Some(p), Some(e)) => {
                    let (a, b) = g.edge(e);
                    if (a, b) != (v.min(p), v.max(p)) {
                        return bad(format!("parent edge of {v} does not join it to {p}"));
                    }
                }
                _ => return bad(format!("vertex {v} has inconsistent parent data")),
            }
        }
        // every vertex reaches the root in < n steps: acyclic and spanning
        let mut state = vec![0u8; n]; // 0 unknown, 1 on current chain, 2 reaches root
        state[self.root] = 2;
        let mut chain = Vec::new();
        for v in 0..n {
            let mut u = v;
            while state[u] == 0 {
                state[u] = 1;
                chain.push(u);
                u = self.parent[u].expect("non-root has a parent");
            }
            if state[u] == 1 {
                return bad(format!("cycle through vertex {u}"));
            }
            for w in chain.drain(..) {
                state[w] = 2;
            }
        }
        Ok(())
    }
}

/// Samples a uniform spanning tree of `g`, rooted at vertex 0.
///
/// Vertices not yet in the tree are processed in ascending order; each starts
/// a simple random walk that stops on hitting the tree. Only the last exit
/// taken from each vertex is kept, which erases loops without storing the walk.
pub fn sample_ust(g: &Graph, seed: u64) -> Result<SpanningTree> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::InvalidGraph(
            "cannot sample a tree of an empty graph".into(),
        ));
    }
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    let mut rng = rng_from_seed(seed);
    let root = 0;
    let mut in_tree = vec![false; n];
    in_tree[root] = true;
    let mut next: Vec<(usize, EdgeId)> = vec![(usize::MAX, EdgeId(usize::MAX)); n];
    let mut parent = vec![None; n];
    let mut parent_edge = vec![None; n];

    for start in 0..n {
        let mut u = start;
        while !in_tree[u] {
            let nb = g.neighbors(u);
            let step = nb[rng.gen_range(0..nb.len() as u64) as usize];
            next[u] = step;
            u = step.0;
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            let (p, e) = next[u];
            parent[u] = Some(p);
            parent_edge[u] = Some(e);
            u = p;
        }
    }

    Ok(SpanningTree {
        root,
        parent,
        parent_edge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_input_returns_itself() {
        let g = Graph::new(5, [(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        for seed in 0..10 {
            let t = sample_ust(&g, seed).unwrap();
            t.validate(&g).unwrap();
            let mut edges: Vec<_> = t.edges().map(|e| e.0).collect();
            edges.sort_unstable();
            assert_eq!(edges, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]).unwrap();
        assert_eq!(sample_ust(&g, 5).unwrap(), sample_ust(&g, 5).unwrap());
    }

    #[test]
    fn disconnected_rejected() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(matches!(sample_ust(&g, 0), Err(Error::Disconnected)));
    }

    #[test]
    fn single_vertex() {
        let g = Graph::new(1, []).unwrap();
        let t = sample_ust(&g, 0).unwrap();
        assert_eq!(t.parent, vec![None]);
    }

    #[test]
    fn validate_catches_cycles() {
        let g = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let t = SpanningTree {
            root: 0,
            parent: vec![None, Some(2), Some(1)],
            parent_edge: vec![None, Some(EdgeId(1)), Some(EdgeId(1))],
        };
        assert!(t.validate(&g).is_err());
    }
}
