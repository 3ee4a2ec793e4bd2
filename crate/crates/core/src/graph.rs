//! Undirected simple graph with stable edge identities.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Position of an edge in [`Graph::edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

impl EdgeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Undirected simple graph on dense vertex indices `0..n`.
///
/// Edges are stored normalized (`u < v`) in insertion order; the position of an
/// edge in that list is its [`EdgeId`]. The graph is immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, EdgeId)>>,
    coords: Option<Vec<(f64, f64)>>,
}

impl Graph {
    /// Builds a graph, normalizing each pair to `u < v`.
    ///
    /// Rejects self-loops, duplicate edges and out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut list = Vec::new();
        for (i, (a, b)) in edges.into_iter().enumerate() {
            let e = Self::check_edge(n, a, b, &mut seen)
                .map_err(|m| Error::InvalidGraph(format!("edge {i} ({a}, {b}): {m}")))?;
            list.push(e);
        }
        Ok(Self::from_normalized(n, list))
    }

    fn check_edge(
        n: usize,
        a: usize,
        b: usize,
        seen: &mut HashSet<(usize, usize)>,
    ) -> std::result::Result<(usize, usize), String> {
        if a >= n || b >= n {
            return Err(format!("vertex index out of range [0, {n})"));
        }
        if a == b {
            return Err("self-loop".into());
        }
        let e = (a.min(b), a.max(b));
        if !seen.insert(e) {
            return Err("duplicate edge".into());
        }
        Ok(e)
    }

    fn from_normalized(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (i, &(u, v)) in edges.iter().enumerate() {
            adj[u].push((v, EdgeId(i)));
            adj[v].push((u, EdgeId(i)));
        }
        Graph {
            n,
            edges,
            adj,
            coords: None,
        }
    }

    /// Attaches per-vertex planar coordinates.
    pub fn with_coords(mut self, coords: Vec<(f64, f64)>) -> Result<Self> {
        if coords.len() != self.n {
            return Err(Error::InvalidGraph(format!(
                "{} coordinates for {} vertices",
                coords.len(),
                self.n
            )));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> (usize, usize) {
        self.edges[id.0]
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, EdgeId)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<EdgeId> {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a].iter().find(|&&(w, _)| w == b).map(|&(_, e)| e)
    }

    /// Subgraph induced by `vertices`, relabelled `0..vertices.len()` in the
    /// given order. Returns the subgraph and, for each subgraph edge, the id of
    /// the corresponding edge in `self`.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> (Graph, Vec<EdgeId>) {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut edges = Vec::new();
        let mut origin = Vec::new();
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            let (lu, lv) = (local[u], local[v]);
            if lu != usize::MAX && lv != usize::MAX {
                edges.push((lu.min(lv), lu.max(lv)));
                origin.push(EdgeId(i));
            }
        }
        let mut sub = Graph::from_normalized(vertices.len(), edges);
        if let Some(c) = &self.coords {
            sub.coords = Some(vertices.iter().map(|&v| c[v]).collect());
        }
        (sub, origin)
    }

    /// Every edge with exactly one endpoint in `inside`.
    pub fn boundary_edges(&self, inside: &[bool]) -> EdgeSet {
        EdgeSet::from_sorted_unchecked(
            self.edges
                .iter()
                .enumerate()
                .filter(|(_, &(u, v))| inside[u] != inside[v])
                .map(|(i, _)| EdgeId(i))
                .collect(),
        )
    }

    /// Parses the text edge-list format.
    ///
    /// ```text
    /// % comment
    /// <|V|> <|E|>
    /// <u> <v>          (|E| lines)
    /// #coords          (optional)
    /// <x> <y>          (|V| lines)
    /// ```
    pub fn load(text: &str) -> Result<Graph> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));

        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header `<vertices> <edges>`".into(),
        })?;
        let [n, m] = parse_fields::<usize>(header, hline, "header `<vertices> <edges>`")?;

        let mut seen = HashSet::with_capacity(m);
        let mut edges = Vec::with_capacity(m);
        let mut last = hline;
        for _ in 0..m {
            let (ln, l) = lines.next().ok_or(Error::Parse {
                line: last + 1,
                msg: format!("expected {m} edge lines, found {}", edges.len()),
            })?;
            last = ln;
            let [a, b] = parse_fields::<usize>(l, ln, "edge `<u> <v>`")?;
            let e = Graph::check_edge(n, a, b, &mut seen)
                .map_err(|msg| Error::Parse { line: ln, msg })?;
            edges.push(e);
        }
        let mut g = Graph::from_normalized(n, edges);

        match lines.next() {
            None => Ok(g),
            Some((ln, "#coords")) => {
                let mut coords = Vec::with_capacity(n);
                last = ln;
                for _ in 0..n {
                    let (ln, l) = lines.next().ok_or(Error::Parse {
                        line: last + 1,
                        msg: format!("expected {n} coordinate lines, found {}", coords.len()),
                    })?;
                    last = ln;
                    let [x, y] = parse_fields::<f64>(l, ln, "coordinate `<x> <y>`")?;
                    coords.push((x, y));
                }
                if let Some((ln, _)) = lines.next() {
                    return Err(Error::Parse {
                        line: ln,
                        msg: "unexpected content after coordinates".into(),
                    });
                }
                g.coords = Some(coords);
                Ok(g)
            }
            Some((ln, _)) => Err(Error::Parse {
                line: ln,
                msg: format!("more than the declared {m} edges"),
            }),
        }
    }

    /// Serializes to the text edge-list format; `load(save(g)) == g`.
    pub fn save(&self) -> String {
        let mut out = String::with_capacity(12 * (self.edges.len() + 1));
        writeln!(out, "{} {}", self.n, self.edges.len()).unwrap();
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}").unwrap();
        }
        if let Some(coords) = &self.coords {
            out.push_str("#coords\n");
            for &(x, y) in coords {
                writeln!(out, "{x} {y}").unwrap();
            }
        }
        out
    }
}

fn parse_fields<T: std::str::FromStr>(line: &str, ln: usize, what: &str) -> Result<[T; 2]> {
    let bad = || Error::Parse {
        line: ln,
        msg: format!("malformed {what}: {line:?}"),
    };
    let mut it = line.split_whitespace();
    let a = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let b = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    if it.next().is_some() {
        return Err(bad());
    }
    Ok([a, b])
}

/// Sorted set of edge ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    members: Vec<EdgeId>,
}

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn from_sorted_unchecked(members: Vec<EdgeId>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        EdgeSet { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.members.binary_search(&e).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[EdgeId] {
        &self.members
    }

    /// Endpoint pairs of the members, in id order.
    pub fn endpoints(&self, g: &Graph) -> Vec<(usize, usize)> {
        self.iter().map(|e| g.edge(e)).collect()
    }

    /// Dense membership mask over the edges of `g`.
    pub fn mask(&self, g: &Graph) -> Vec<bool> {
        let mut mask = vec![false; g.edge_count()];
        for e in self.iter() {
            mask[e.0] = true;
        }
        mask
    }
}

impl FromIterator<EdgeId> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = EdgeId>>(iter: I) -> Self {
        let mut members: Vec<EdgeId> = iter.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        EdgeSet { members }
    }
}

/// Connected components of a graph after edge removal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
    /// Largest component size, 0 for the empty graph.
    pub lcc: usize,
}

impl ComponentLabeling {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

/// Labels the components of `g` with the edges in `removed` deleted.
pub fn components(g: &Graph, removed: &EdgeSet) -> ComponentLabeling {
    components_masked(g, &removed.mask(g))
}

pub(crate) fn components_masked(g: &Graph, removed: &[bool]) -> ComponentLabeling {
    const UNSEEN: usize = usize::MAX;
    let n = g.vertex_count();
    let mut labels = vec![UNSEEN; n];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if labels[s] != UNSEEN {
            continue;
        }
        let id = sizes.len();
        labels[s] = id;
        queue.push_back(s);
        let mut size = 0;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &(w, e) in g.neighbors(u) {
                if !removed[e.0] && labels[w] == UNSEEN {
                    labels[w] = id;
                    queue.push_back(w);
                }
            }
        }
        sizes.push(size);
    }
    let lcc = sizes.iter().copied().max().unwrap_or(0);
    ComponentLabeling { labels, sizes, lcc }
}

pub fn is_connected(g: &Graph) -> bool {
    g.vertex_count() <= 1 || components(g, &EdgeSet::new()).lcc == g.vertex_count()
}
