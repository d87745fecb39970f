//! Evolving graph topology: dense vertex ids, adjacency lists and a
//! duplicate-detecting edge set.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense vertex index in `0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(u32::try_from(i).expect("vertex index exceeds u32"))
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Result of offering an edge to the graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InsertOutcome {
    Inserted,
    Duplicate,
    SelfLoop,
}

/// Maps external labels to dense ids in first-seen order.
#[derive(Clone, Debug, Default)]
pub struct Interner {
    ids: HashMap<String, VertexId>,
    labels: Vec<String>,
}

impl Interner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, label: &str) -> VertexId {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = VertexId::from(self.labels.len());
        self.labels.push(label.to_owned());
        self.ids.insert(label.to_owned(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<VertexId> {
        self.ids.get(label).copied()
    }

    pub fn label(&self, id: VertexId) -> Option<&str> {
        self.labels.get(id.index()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Mutable adjacency structure. Undirected graphs keep both arcs of every
/// edge in `out`; directed graphs additionally keep in-adjacency.
#[derive(Clone, Debug, Default)]
pub struct DynamicGraph {
    directed: bool,
    out: Vec<Vec<VertexId>>,
    inc: Vec<Vec<VertexId>>,
    edges: HashSet<u64>,
}

#[inline]
fn edge_key(u: VertexId, v: VertexId) -> u64 {
    ((u.0 as u64) << 32) | v.0 as u64
}

impl DynamicGraph {
    pub fn new(directed: bool) -> Self {
        Self {
            directed,
            ..Self::default()
        }
    }

    pub fn undirected() -> Self {
        Self::new(false)
    }

    /// Pre-sizes storage when the vertex count and stream length are known.
    pub fn with_capacity(directed: bool, vertices: usize, edges: usize) -> Self {
        let mut g = Self::new(directed);
        g.out.reserve(vertices);
        if directed {
            g.inc.reserve(vertices);
        }
        g.edges.reserve(edges);
        g
    }

    /// Builds a graph on `n` vertices from an edge list, skipping duplicates
    /// and self-loops.
    pub fn from_edges(directed: bool, n: usize, edges: &[(VertexId, VertexId)]) -> Self {
        let mut g = Self::with_capacity(directed, n, edges.len());
        g.ensure_vertices(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.out.len()).map(VertexId::from)
    }

    /// Appends a fresh isolated vertex.
    pub fn add_vertex(&mut self) -> VertexId {
        let id = VertexId::from(self.out.len());
        self.out.push(Vec::new());
        if self.directed {
            self.inc.push(Vec::new());
        }
        id
    }

    /// Grows the vertex set so that ids `0..n` exist.
    pub fn ensure_vertices(&mut self, n: usize) {
        if n > self.out.len() {
            self.out.resize_with(n, Vec::new);
            if self.directed {
                self.inc.resize_with(n, Vec::new);
            }
        }
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> InsertOutcome {
        if u == v {
            return InsertOutcome::SelfLoop;
        }
        self.ensure_vertices(u.index().max(v.index()) + 1);
        let key = if self.directed || u < v {
            edge_key(u, v)
        } else {
            edge_key(v, u)
        };
        if !self.edges.insert(key) {
            return InsertOutcome::Duplicate;
        }
        self.out[u.index()].push(v);
        if self.directed {
            self.inc[v.index()].push(u);
        } else {
            self.out[v.index()].push(u);
        }
        InsertOutcome::Inserted
    }

    pub fn contains_edge(&self, u: VertexId, v: VertexId) -> bool {
        let key = if self.directed || u < v {
            edge_key(u, v)
        } else {
            edge_key(v, u)
        };
        self.edges.contains(&key)
    }

    /// Neighbors in insertion order (out-neighbors when directed).
    #[inline]
    pub fn neighbors(&self, u: VertexId) -> &[VertexId] {
        &self.out[u.index()]
    }

    /// In-neighbors; identical to `neighbors` for undirected graphs.
    #[inline]
    pub fn in_neighbors(&self, u: VertexId) -> &[VertexId] {
        if self.directed {
            &self.inc[u.index()]
        } else {
            &self.out[u.index()]
        }
    }

    #[inline]
    pub fn degree(&self, u: VertexId) -> usize {
        self.out[u.index()].len()
    }

    #[inline]
    pub fn in_degree(&self, u: VertexId) -> usize {
        self.in_neighbors(u).len()
    }

    /// Every edge once; undirected edges are reported with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        let directed = self.directed;
        self.out.iter().enumerate().flat_map(move |(u, adj)| {
            let u = VertexId::from(u);
            adj.iter()
                .copied()
                .filter(move |&v| directed || u < v)
                .map(move |v| (u, v))
        })
    }
}

/// A graph together with the labels its vertices were interned from.
#[derive(Clone, Debug, Default)]
pub struct LabeledGraph {
    pub graph: DynamicGraph,
    pub labels: Interner,
}

impl LabeledGraph {
    pub fn new(directed: bool) -> Self {
        Self {
            graph: DynamicGraph::new(directed),
            labels: Interner::new(),
        }
    }

    /// Same label, same id; new labels get the next dense id and an empty
    /// adjacency list.
    pub fn intern(&mut self, label: &str) -> VertexId {
        let id = self.labels.intern(label);
        self.graph.ensure_vertices(id.index() + 1);
        id
    }

    pub fn add_labeled_edge(&mut self, u: &str, v: &str) -> InsertOutcome {
        let u = self.intern(u);
        let v = self.intern(v);
        self.graph.add_edge(u, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn interning_is_dense_and_stable() {
        let mut g = LabeledGraph::new(false);
        assert_eq!(g.intern("a"), v(0));
        assert_eq!(g.intern("b"), v(1));
        assert_eq!(g.intern("a"), v(0));
        g.intern("c");
        assert_eq!(g.graph.vertex_count(), 3);
        assert_eq!(g.graph.degree(v(2)), 0);
    }

    #[test]
    fn interning_a_million_labels() {
        let mut interner = Interner::new();
        for i in 0..1_000_000u32 {
            assert_eq!(interner.intern(&i.to_string()), v(i));
        }
        assert_eq!(interner.len(), 1_000_000);
    }

    #[test]
    fn insert_outcomes() {
        let mut g = DynamicGraph::undirected();
        assert_eq!(g.add_edge(v(0), v(1)), InsertOutcome::Inserted);
        assert_eq!((g.degree(v(0)), g.degree(v(1))), (1, 1));
        assert_eq!(g.add_edge(v(0), v(1)), InsertOutcome::Duplicate);
        assert_eq!(g.add_edge(v(1), v(0)), InsertOutcome::Duplicate);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.add_edge(v(2), v(2)), InsertOutcome::SelfLoop);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn path_queries() {
        let mut g = LabeledGraph::new(false);
        g.add_labeled_edge("a", "b");
        g.add_labeled_edge("b", "c");
        let (a, b, c) = (g.intern("a"), g.intern("b"), g.intern("c"));
        assert_eq!(g.graph.neighbors(b), &[a, c]);
        assert_eq!(g.graph.degree(b), 2);
        assert!(!g.graph.contains_edge(a, c));
        assert!(g.graph.contains_edge(c, b));
    }

    #[test]
    fn complete_graph_degrees() {
        let mut g = DynamicGraph::undirected();
        for i in 0..4 {
            for j in (i + 1)..4 {
                g.add_edge(v(i), v(j));
            }
        }
        assert!(g.vertices().all(|u| g.degree(u) == 3));
        assert_eq!(g.edges().count(), 6);
    }

    #[test]
    fn directed_keeps_both_adjacencies() {
        let mut g = DynamicGraph::new(true);
        assert_eq!(g.add_edge(v(0), v(1)), InsertOutcome::Inserted);
        assert_eq!(g.add_edge(v(1), v(0)), InsertOutcome::Inserted);
        assert_eq!(g.add_edge(v(0), v(1)), InsertOutcome::Duplicate);
        g.add_edge(v(2), v(1));
        assert_eq!(g.neighbors(v(1)), &[v(0)]);
        assert_eq!(g.in_neighbors(v(1)), &[v(0), v(2)]);
        assert_eq!(g.edge_count(), 3);
    }
}
