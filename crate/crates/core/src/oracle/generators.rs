use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::graph::{DynamicGraph, VertexId};

pub type Edge = (VertexId, VertexId);

/// An initial graph plus an ordered list of edges to insert into it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamSpec {
    pub n: usize,
    pub directed: bool,
    pub initial: Vec<Edge>,
    pub stream: Vec<Edge>,
}

impl StreamSpec {
    pub fn initial_graph(&self) -> DynamicGraph {
        DynamicGraph::from_edges(self.directed, self.n, &self.initial)
    }

    /// The graph after replaying the whole stream.
    pub fn final_graph(&self) -> DynamicGraph {
        let mut g = self.initial_graph();
        for &(u, v) in &self.stream {
            g.add_edge(u, v);
        }
        g
    }

    pub fn len(&self) -> usize {
        self.stream.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stream.is_empty()
    }
}

/// Uniformly shuffles the edges of `g`; the first `floor(init_fraction * m)`
/// form the initial graph and the rest are streamed.
pub fn gen_random_permutation(
    g: &DynamicGraph,
    seed: u64,
    init_fraction: f64,
) -> Result<StreamSpec, OracleError> {
    if !(0.0..1.0).contains(&init_fraction) {
        return Err(OracleError::InvalidParameters(format!(
            "init fraction must lie in [0, 1), got {init_fraction}"
        )));
    }
    let mut edges: Vec<Edge> = g.edges().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    edges.shuffle(&mut rng);
    let cut = (init_fraction * edges.len() as f64).floor() as usize;
    let stream = edges.split_off(cut);
    Ok(StreamSpec {
        n: g.vertex_count(),
        directed: g.is_directed(),
        initial: edges,
        stream,
    })
}

/// Edges of `g` streamed in lexicographic endpoint order from an empty graph.
pub fn sorted_order(g: &DynamicGraph) -> StreamSpec {
    let mut edges: Vec<Edge> = g.edges().collect();
    edges.sort_unstable();
    StreamSpec {
        n: g.vertex_count(),
        directed: g.is_directed(),
        initial: Vec::new(),
        stream: edges,
    }
}

/// Lower-bound instance: `S0 = 0..delta`, `S1 = delta..2*delta` and
/// `S2 = 2*delta..2*delta + delta*rho^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversarialSpec {
    pub delta: usize,
    pub rho: usize,
}

impl AdversarialSpec {
    pub fn new(delta: usize, rho: usize) -> Self {
        Self { delta, rho }
    }

    pub fn s2_len(&self) -> usize {
        self.delta * self.rho * self.rho
    }

    pub fn vertex_count(&self) -> usize {
        2 * self.delta + self.s2_len()
    }

    pub fn s0(&self) -> impl Iterator<Item = VertexId> {
        (0..self.delta).map(VertexId::from)
    }

    pub fn s1(&self) -> impl Iterator<Item = VertexId> {
        (self.delta..2 * self.delta).map(VertexId::from)
    }

    pub fn s2(&self) -> impl Iterator<Item = VertexId> {
        (2 * self.delta..self.vertex_count()).map(VertexId::from)
    }

    /// Size of the 2-ball of any `S0` vertex once the stream is replayed.
    pub fn final_s0_ball(&self) -> usize {
        2 * self.delta + self.s2_len()
    }
}

/// The initial graph is `K_{S0,S1}` with `S2` isolated. Insertion `t` joins
/// `S1[t mod delta]` to the fresh vertex `S2[t]`.
pub fn gen_adversarial(spec: AdversarialSpec) -> Result<StreamSpec, OracleError> {
    if spec.delta == 0 || spec.rho == 0 {
        return Err(OracleError::InvalidParameters(
            "adversarial instance needs delta >= 1 and rho >= 1".into(),
        ));
    }
    let d = spec.delta;
    let mut initial = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in d..2 * d {
            initial.push((VertexId::from(a), VertexId::from(b)));
        }
    }
    let stream = (0..spec.s2_len())
        .map(|t| (VertexId::from(d + t % d), VertexId::from(2 * d + t)))
        .collect();
    Ok(StreamSpec {
        n: spec.vertex_count(),
        directed: false,
        initial,
        stream,
    })
}

/// Uniform simple graph with exactly `m` edges on `n` vertices.
pub fn gen_er(n: usize, m: usize, seed: u64) -> Result<DynamicGraph, OracleError> {
    let max = n * n.saturating_sub(1) / 2;
    if m > max {
        return Err(OracleError::InvalidParameters(format!(
            "{m} edges do not fit in a simple graph on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = DynamicGraph::with_capacity(false, n, m);
    g.ensure_vertices(n);
    if m > max / 2 {
        let mut all = Vec::with_capacity(max);
        for u in 0..n {
            for v in u + 1..n {
                all.push((VertexId::from(u), VertexId::from(v)));
            }
        }
        let (chosen, _) = all.partial_shuffle(&mut rng, m);
        for &(u, v) in chosen.iter() {
            g.add_edge(u, v);
        }
    } else {
        while g.edge_count() < m {
            let u = VertexId::from(rng.random_range(0..n));
            let v = VertexId::from(rng.random_range(0..n));
            g.add_edge(u, v);
        }
    }
    Ok(g)
}

/// Preferential attachment: a clique on `m0` vertices, then every new vertex
/// links to `edges_per_step` distinct earlier vertices picked proportionally
/// to degree.
pub fn gen_ba(
    n: usize,
    m0: usize,
    edges_per_step: usize,
    seed: u64,
) -> Result<DynamicGraph, OracleError> {
    if edges_per_step == 0 || m0 < edges_per_step || m0 > n {
        return Err(OracleError::InvalidParameters(format!(
            "preferential attachment needs 1 <= edges_per_step <= m0 <= n (got n={n}, m0={m0}, edges_per_step={edges_per_step})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let expected = m0 * (m0 - 1) / 2 + (n - m0) * edges_per_step;
    let mut g = DynamicGraph::with_capacity(false, n, expected);
    g.ensure_vertices(n);
    // Every edge contributes both endpoints, so uniform draws are degree-biased.
    let mut endpoints: Vec<VertexId> = Vec::with_capacity(2 * expected);
    for u in 0..m0 {
        for v in u + 1..m0 {
            g.add_edge(VertexId::from(u), VertexId::from(v));
            endpoints.push(VertexId::from(u));
            endpoints.push(VertexId::from(v));
        }
    }
    let mut targets = Vec::with_capacity(edges_per_step);
    for v in m0..n {
        let v = VertexId::from(v);
        targets.clear();
        while targets.len() < edges_per_step {
            let t = if endpoints.is_empty() {
                VertexId::from(rng.random_range(0..v.index()))
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            g.add_edge(v, t);
            endpoints.push(v);
            endpoints.push(t);
        }
    }
    Ok(g)
}

pub fn path_graph(n: usize) -> DynamicGraph {
    let edges: Vec<Edge> = (1..n)
        .map(|i| (VertexId::from(i - 1), VertexId::from(i)))
        .collect();
    DynamicGraph::from_edges(false, n, &edges)
}

pub fn cycle_graph(n: usize) -> DynamicGraph {
    let mut g = path_graph(n);
    if n >= 3 {
        g.add_edge(VertexId::from(n - 1), VertexId(0));
    }
    g
}

pub fn complete_graph(n: usize) -> DynamicGraph {
    let mut g = DynamicGraph::with_capacity(false, n, n * n.saturating_sub(1) / 2);
    g.ensure_vertices(n);
    for u in 0..n {
        for v in u + 1..n {
            g.add_edge(VertexId::from(u), VertexId::from(v));
        }
    }
    g
}

/// Center `0` joined to leaves `1..=leaves`.
pub fn star_graph(leaves: usize) -> DynamicGraph {
    let edges: Vec<Edge> = (1..=leaves)
        .map(|i| (VertexId(0), VertexId::from(i)))
        .collect();
    DynamicGraph::from_edges(false, leaves + 1, &edges)
}

/// Outer 5-cycle `0..5`, spokes `i - (i+5)`, inner pentagram on `5..10`.
pub fn petersen_graph() -> DynamicGraph {
    let mut g = DynamicGraph::with_capacity(false, 10, 15);
    g.ensure_vertices(10);
    for i in 0..5 {
        g.add_edge(VertexId::from(i), VertexId::from((i + 1) % 5));
        g.add_edge(VertexId::from(i), VertexId::from(i + 5));
        g.add_edge(VertexId::from(i + 5), VertexId::from((i + 2) % 5 + 5));
    }
    g
}

/// Random bipartite graph between `0..left` and `left..left+right` with no
/// 4-cycle (hence girth at least 6). Candidate edges closing a 4-cycle are
/// rejected; gives up after a bounded number of attempts, so the result may
/// hold fewer than `target_edges` edges.
pub fn girth5_bipartite(left: usize, right: usize, target_edges: usize, seed: u64) -> DynamicGraph {
    let n = left + right;
    let mut g = DynamicGraph::with_capacity(false, n, target_edges);
    g.ensure_vertices(n);
    if left == 0 || right == 0 {
        return g;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mark = vec![false; n];
    let mut attempts = 0;
    while g.edge_count() < target_edges && attempts < 50 * target_edges.max(1) {
        attempts += 1;
        let a = VertexId::from(rng.random_range(0..left));
        let b = VertexId::from(left + rng.random_range(0..right));
        if g.contains_edge(a, b) {
            continue;
        }
        for &y in g.neighbors(b) {
            mark[y.index()] = true;
        }
        // A path a - x - y - b already exists iff some neighbor of a's
        // neighbors is adjacent to b.
        let closes = g
            .neighbors(a)
            .iter()
            .any(|&x| g.neighbors(x).iter().any(|&y| mark[y.index()]));
        for &y in g.neighbors(b) {
            mark[y.index()] = false;
        }
        if !closes {
            g.add_edge(a, b);
        }
    }
    g
}
