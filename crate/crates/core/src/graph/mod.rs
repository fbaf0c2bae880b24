//! Simple undirected bounded-degree graphs, the generator families used in
//! the experiments, and edit distances.

mod edit;
mod families;
mod io;

pub use edit::{edit_distance_iso, edit_distance_labeled, is_equivalent_sequence, EquivalenceReport, EXACT_ISO_LIMIT};
pub use families::{erdos_renyi, lattice, random_bipartite_regular, random_regular, GraphFamily};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite simple undirected graph on vertices `0..n` with a declared
/// degree bound `D`.
///
/// Edges are stored in the order and orientation they were given, so the
/// JSON and edge-list forms round-trip exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "io::GraphWire", into = "io::GraphWire")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    degree_bound: usize,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Validates and builds a graph. Fails on loops, repeated edges,
    /// endpoints out of range, or a vertex above `degree_bound`.
    pub fn new(n: usize, edges: Vec<(usize, usize)>, degree_bound: usize) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in &edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge(u, v));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (vertex, nb) in adj.iter().enumerate() {
            if nb.len() > degree_bound {
                return Err(Error::DegreeBoundExceeded { vertex, degree: nb.len(), bound: degree_bound });
            }
        }
        Ok(Self { n, edges, degree_bound, adj })
    }

    /// Builds a graph whose degree bound is its observed maximum degree.
    pub fn with_observed_bound(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut deg = vec![0usize; n];
        for &(u, v) in &edges {
            if u < n {
                deg[u] += 1;
            }
            if v < n {
                deg[v] += 1;
            }
        }
        let bound = deg.into_iter().max().unwrap_or(0);
        Self::new(n, edges, bound)
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: Vec::new(), degree_bound: 0, adj: vec![Vec::new(); n] }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Self::new(n, edges, n.saturating_sub(1)).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("cycle needs at least 3 vertices, got {n}")));
        }
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect(), 2)
    }

    /// Path on `n` vertices (`n - 1` edges).
    pub fn path(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("path needs at least one vertex".into()));
        }
        Self::new(n, (0..n - 1).map(|i| (i, i + 1)).collect(), (n - 1).min(2))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].contains(&v)
    }

    /// Same graph with a different declared bound.
    pub fn with_degree_bound(&self, bound: usize) -> Result<Self> {
        Self::new(self.n, self.edges.clone(), bound)
    }

    /// Edge set as normalized `(min, max)` pairs.
    pub fn edge_set(&self) -> HashSet<(usize, usize)> {
        self.edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect()
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            let mut i = 0;
            while i < members.len() {
                let u = members[i];
                i += 1;
                for &w in &self.adj[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    /// Subgraph induced on `vertices`, relabeled `0..len` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut pos = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            pos[v] = i;
        }
        let mut edges = Vec::new();
        for &(u, v) in &self.edges {
            if pos[u] != usize::MAX && pos[v] != usize::MAX {
                edges.push((pos[u].min(pos[v]), pos[u].max(pos[v])));
            }
        }
        edges.sort_unstable();
        Graph::new(vertices.len(), edges, self.degree_bound).expect("induced subgraph of a valid graph")
    }

    /// Disjoint union; vertices of later parts are shifted past earlier ones.
    pub fn disjoint_union(parts: &[&Graph]) -> Graph {
        let mut edges = Vec::new();
        let mut offset = 0;
        let mut bound = 0;
        for g in parts {
            edges.extend(g.edges.iter().map(|&(u, v)| (u + offset, v + offset)));
            offset += g.n;
            bound = bound.max(g.degree_bound);
        }
        Graph::new(offset, edges, bound).expect("union of valid graphs")
    }

    /// `count` disjoint copies of `self`.
    pub fn copies(&self, count: usize) -> Graph {
        let parts: Vec<&Graph> = std::iter::repeat_n(self, count).collect();
        Graph::disjoint_union(&parts)
    }

    /// Removes the listed edges (either orientation); the bound is kept.
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> Graph {
        let gone: HashSet<(usize, usize)> = removed.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
        let edges = self.edges.iter().copied().filter(|&(u, v)| !gone.contains(&(u.min(v), u.max(v)))).collect();
        Graph::new(self.n, edges, self.degree_bound).expect("edge deletion keeps a graph valid")
    }

    /// Component shape key: size plus edges relabeled by rank within the
    /// component. Equal keys mean identical labeled components, which lets
    /// enumeration reuse per-component work across copies.
    pub(crate) fn component_shape(&self, members: &[usize]) -> (usize, Vec<(usize, usize)>) {
        let sub = self.induced(members);
        (sub.n, sub.edges)
    }
}
