//! Lazy maintenance of approximate 1- and 2-balls under edge insertions.
//!
//! Every vertex `x` keeps `b1(x)` (always exact), `b2(x)` (a subset of the
//! true 2-ball) and two counters: `red(x)`, the edges gained since the last
//! batch of light updates, and `black(x)`, the degree at that batch. Each
//! insertion performs the heavy update at both endpoints immediately; the
//! light updates towards an endpoint's neighbors are deferred until
//! `red >= phi * black`, with `k` random neighbors refreshed in between.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DynamicGraph, InsertOutcome, VertexId};
use crate::sketch::{stream, Ball, SketchContext, SketchError, StoreSpec};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid engine configuration: {0}")]
    Config(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error(transparent)]
    Sketch(#[from] SketchError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Batch threshold in `[0, 1]`; 0 disables laziness.
    pub phi: f64,
    /// Random neighbors refreshed on every insertion that does not batch.
    pub k: usize,
    pub store: StoreSpec,
    pub seed: u64,
    pub directed: bool,
}

impl EngineConfig {
    pub fn new(phi: f64, k: usize) -> Self {
        Self {
            phi,
            k,
            store: StoreSpec::Exact,
            seed: 0,
            directed: false,
        }
    }

    /// The non-lazy configuration (`phi = 0`, `k = 0`).
    pub fn baseline() -> Self {
        Self::new(0.0, 0)
    }

    pub fn with_store(mut self, store: StoreSpec) -> Self {
        self.store = store;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn directed(mut self, directed: bool) -> Self {
        self.directed = directed;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !(0.0..=1.0).contains(&self.phi) {
            return Err(EngineError::Config(format!(
                "phi must lie in [0, 1], got {}",
                self.phi
            )));
        }
        Ok(())
    }

    /// Per-insertion union budget `4 + 4/phi + 2k` from the credit argument;
    /// infinite for `phi = 0`.
    pub fn amortized_bound(&self) -> f64 {
        4.0 + 4.0 / self.phi + 2.0 * self.k as f64
    }
}

/// Union-operation counters. `union_ops` is the total work `T(S)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostAccounting {
    pub union_ops: u64,
    pub b1_ops: u64,
    pub heavy_ops: u64,
    pub light_batch_ops: u64,
    pub random_light_ops: u64,
    pub insertions: u64,
    pub batches: u64,
}

impl CostAccounting {
    /// Unions pushed from one vertex's 1-ball into another's 2-ball.
    pub fn messages(&self) -> u64 {
        self.heavy_ops + self.light_batch_ops + self.random_light_ops
    }

    pub fn per_insertion(&self) -> f64 {
        if self.insertions == 0 {
            0.0
        } else {
            self.union_ops as f64 / self.insertions as f64
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InsertReport {
    pub outcome: InsertOutcome,
    /// Whether the threshold fired for the first and second endpoint.
    pub batches_fired: [bool; 2],
    pub unions_charged: u64,
}

impl InsertReport {
    fn skipped(outcome: InsertOutcome) -> Self {
        Self {
            outcome,
            batches_fired: [false; 2],
            unions_charged: 0,
        }
    }
}

/// Approximate-ball engine over a store type `B`. The engine owns the graph
/// so topology and ball state always advance together.
#[derive(Clone, Debug)]
pub struct Engine<B: Ball> {
    config: EngineConfig,
    ctx: SketchContext,
    graph: DynamicGraph,
    b1: Vec<B>,
    b2: Vec<B>,
    red: Vec<u64>,
    black: Vec<u64>,
    rng: ChaCha8Rng,
    cost: CostAccounting,
    touched: Vec<VertexId>,
}

impl<B: Ball> Engine<B> {
    /// Initializes every vertex of `initial` with its exact balls and
    /// `red = 0`, `black = deg`. Initialization is not charged to the cost.
    pub fn new(initial: DynamicGraph, config: EngineConfig) -> Result<Self, EngineError> {
        config.validate()?;
        if !B::accepts(&config.store) {
            return Err(EngineError::Config(format!(
                "store type {} cannot be built from spec `{}`",
                B::KIND.name(),
                config.store
            )));
        }
        if initial.is_directed() != config.directed {
            return Err(EngineError::Config(
                "graph and configuration disagree on directedness".into(),
            ));
        }
        let ctx = SketchContext::new(config.store, config.seed);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(stream::ENGINE);

        let n = initial.vertex_count();
        let mut b1 = Vec::with_capacity(n);
        let mut black = Vec::with_capacity(n);
        for u in initial.vertices() {
            let mut ball = B::empty(&ctx);
            ball.insert(u, &ctx);
            for &w in initial.neighbors(u) {
                ball.insert(w, &ctx);
            }
            b1.push(ball);
            black.push(initial.degree(u) as u64);
        }
        let mut b2 = Vec::with_capacity(n);
        for u in initial.vertices() {
            let mut ball = b1[u.index()].clone();
            for &w in initial.neighbors(u) {
                ball.union_with(&b1[w.index()]);
            }
            b2.push(ball);
        }
        Ok(Self {
            config,
            ctx,
            graph: initial,
            b1,
            b2,
            red: vec![0; n],
            black,
            rng,
            cost: CostAccounting::default(),
            touched: Vec::new(),
        })
    }

    /// Engine over an initially empty graph.
    pub fn empty(config: EngineConfig) -> Result<Self, EngineError> {
        let g = DynamicGraph::new(config.directed);
        Self::new(g, config)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn context(&self) -> &SketchContext {
        &self.ctx
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.b1.len()
    }

    pub fn cost(&self) -> CostAccounting {
        self.cost
    }

    /// Vertices whose balls changed during the last insertion, possibly with
    /// repeats.
    pub fn touched(&self) -> &[VertexId] {
        &self.touched
    }

    fn check(&self, v: VertexId) -> Result<usize, EngineError> {
        if v.index() < self.b1.len() {
            Ok(v.index())
        } else {
            Err(EngineError::UnknownVertex(v))
        }
    }

    pub fn ball1(&self, v: VertexId) -> Result<&B, EngineError> {
        self.check(v).map(|i| &self.b1[i])
    }

    pub fn ball2(&self, v: VertexId) -> Result<&B, EngineError> {
        self.check(v).map(|i| &self.b2[i])
    }

    pub fn red(&self, v: VertexId) -> Result<u64, EngineError> {
        self.check(v).map(|i| self.red[i])
    }

    pub fn black(&self, v: VertexId) -> Result<u64, EngineError> {
        self.check(v).map(|i| self.black[i])
    }

    /// All 1-balls and 2-balls, indexed by vertex.
    pub fn balls(&self) -> (&[B], &[B]) {
        (&self.b1, &self.b2)
    }

    /// Adds isolated vertices so that ids `0..n` exist.
    pub fn ensure_vertices(&mut self, n: usize) {
        self.graph.ensure_vertices(n);
        while self.b1.len() < n {
            let v = VertexId::from(self.b1.len());
            let mut ball = B::empty(&self.ctx);
            ball.insert(v, &self.ctx);
            self.b2.push(ball.clone());
            self.b1.push(ball);
            self.red.push(0);
            self.black.push(0);
        }
    }

    fn add_to_graph(&mut self, u: VertexId, v: VertexId) -> InsertOutcome {
        let outcome = self.graph.add_edge(u, v);
        if outcome == InsertOutcome::Inserted {
            self.ensure_vertices(self.graph.vertex_count());
            self.cost.insertions += 1;
        }
        outcome
    }

    /// Lazy insertion. Duplicates and self-loops leave all state untouched.
    pub fn insert(&mut self, u: VertexId, v: VertexId) -> InsertReport {
        self.touched.clear();
        let outcome = self.add_to_graph(u, v);
        if outcome != InsertOutcome::Inserted {
            return InsertReport::skipped(outcome);
        }
        let before = self.cost.union_ops;
        let mut fired = [false; 2];
        fired[0] = self.process_endpoint(u, v);
        if !self.config.directed {
            fired[1] = self.process_endpoint(v, u);
        }
        InsertReport {
            outcome,
            batches_fired: fired,
            unions_charged: self.cost.union_ops - before,
        }
    }

    /// One pass of the insertion loop for endpoint `x` with partner `y`.
    /// Returns whether the batch of light updates fired.
    fn process_endpoint(&mut self, x: VertexId, y: VertexId) -> bool {
        let (xi, yi) = (x.index(), y.index());
        let digest = B::digest(y, &self.ctx);
        self.b1[xi].insert_digest(&digest);
        self.b2[xi].union_with(&self.b1[yi]);
        self.cost.b1_ops += 1;
        self.cost.heavy_ops += 1;
        self.cost.union_ops += 2;
        self.touched.push(x);
        self.red[xi] += 1;

        // Light updates flow to vertices whose 2-balls now include y:
        // neighbors when undirected, in-neighbors when directed.
        let recipients = self.graph.in_neighbors(x);
        let source = &self.b1[xi];
        if self.red[xi] as f64 >= self.config.phi * self.black[xi] as f64 {
            self.black[xi] += self.red[xi];
            self.red[xi] = 0;
            for &z in recipients {
                self.b2[z.index()].union_with(source);
                self.touched.push(z);
            }
            let n = recipients.len() as u64;
            self.cost.light_batch_ops += n;
            self.cost.union_ops += n;
            self.cost.batches += 1;
            true
        } else {
            let amount = self.config.k.min(recipients.len());
            if amount > 0 {
                for i in index::sample(&mut self.rng, recipients.len(), amount) {
                    let w = recipients[i];
                    self.b2[w.index()].union_with(source);
                    self.touched.push(w);
                }
                self.cost.random_light_ops += amount as u64;
                self.cost.union_ops += amount as u64;
            }
            false
        }
    }

    /// Non-lazy reference insertion: heavy updates at both endpoints and a
    /// singleton light update for every other neighbor.
    pub fn insert_baseline(&mut self, u: VertexId, v: VertexId) -> InsertReport {
        self.touched.clear();
        let outcome = self.add_to_graph(u, v);
        if outcome != InsertOutcome::Inserted {
            return InsertReport::skipped(outcome);
        }
        let before = self.cost.union_ops;
        if self.config.directed {
            self.baseline_endpoint(u, v);
        } else {
            let du = B::digest(v, &self.ctx);
            let dv = B::digest(u, &self.ctx);
            self.b1[u.index()].insert_digest(&du);
            self.b1[v.index()].insert_digest(&dv);
            self.cost.b1_ops += 2;
            self.cost.union_ops += 2;
            self.baseline_heavy_and_light(u, v, &du);
            self.baseline_heavy_and_light(v, u, &dv);
            self.black[u.index()] += 1;
            self.black[v.index()] += 1;
        }
        InsertReport {
            outcome,
            batches_fired: [true, !self.config.directed],
            unions_charged: self.cost.union_ops - before,
        }
    }

    fn baseline_endpoint(&mut self, u: VertexId, v: VertexId) {
        let d = B::digest(v, &self.ctx);
        self.b1[u.index()].insert_digest(&d);
        self.cost.b1_ops += 1;
        self.cost.union_ops += 1;
        self.baseline_heavy_and_light(u, v, &d);
        self.black[u.index()] += 1;
    }

    fn baseline_heavy_and_light(&mut self, x: VertexId, y: VertexId, y_digest: &B::Digest) {
        self.b2[x.index()].union_with(&self.b1[y.index()]);
        self.cost.heavy_ops += 1;
        self.cost.union_ops += 1;
        self.touched.push(x);
        let mut lights = 0;
        for &w in self.graph.in_neighbors(x) {
            if w != y {
                self.b2[w.index()].insert_digest(y_digest);
                self.touched.push(w);
                lights += 1;
            }
        }
        self.cost.light_batch_ops += lights;
        self.cost.union_ops += lights;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{ExactBall, KmvSketch};

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    fn members(b: &ExactBall) -> Vec<u32> {
        let mut m: Vec<u32> = b.members().iter().map(|x| x.0).collect();
        m.sort_unstable();
        m
    }

    #[test]
    fn rejects_bad_config() {
        assert!(Engine::<ExactBall>::empty(EngineConfig::new(1.5, 0)).is_err());
        assert!(Engine::<ExactBall>::empty(EngineConfig::new(f64::NAN, 0)).is_err());
        let wrong_store = EngineConfig::new(0.5, 0).with_store(StoreSpec::kmv());
        assert!(Engine::<ExactBall>::empty(wrong_store).is_err());
        assert!(Engine::<KmvSketch>::empty(EngineConfig::new(0.5, 0)).is_err());
        let g = DynamicGraph::new(true);
        assert!(Engine::<ExactBall>::new(g, EngineConfig::new(0.5, 0)).is_err());
    }

    #[test]
    fn new_vertices_start_as_singletons() {
        let mut e = Engine::<ExactBall>::empty(EngineConfig::new(1.0, 0)).unwrap();
        e.ensure_vertices(3);
        for i in 0..3 {
            assert_eq!(members(e.ball1(v(i)).unwrap()), vec![i]);
            assert_eq!(members(e.ball2(v(i)).unwrap()), vec![i]);
            assert_eq!(e.black(v(i)).unwrap(), 0);
        }
        assert!(matches!(e.ball2(v(3)), Err(EngineError::UnknownVertex(_))));
    }

    #[test]
    fn init_on_path_and_clique() {
        let path = DynamicGraph::from_edges(false, 3, &[(v(0), v(1)), (v(1), v(2))]);
        let e = Engine::<ExactBall>::new(path, EngineConfig::new(1.0, 0)).unwrap();
        assert_eq!(members(e.ball2(v(0)).unwrap()), vec![0, 1, 2]);
        assert_eq!(members(e.ball1(v(0)).unwrap()), vec![0, 1]);
        assert_eq!(e.black(v(1)).unwrap(), 2);
        assert_eq!(e.cost(), CostAccounting::default());

        let mut edges = Vec::new();
        for i in 0..4 {
            for j in (i + 1)..4 {
                edges.push((v(i), v(j)));
            }
        }
        let k4 = DynamicGraph::from_edges(false, 4, &edges);
        let e = Engine::<ExactBall>::new(k4, EngineConfig::new(1.0, 0)).unwrap();
        for i in 0..4 {
            assert_eq!(e.ball2(v(i)).unwrap().len(), 4);
        }
    }

    #[test]
    fn hand_trace_two_edges() {
        // phi = 1, k = 0: red = 1 >= black in {0, 1}, so every endpoint fires.
        let mut e = Engine::<ExactBall>::empty(EngineConfig::new(1.0, 0)).unwrap();
        let r = e.insert(v(0), v(1));
        assert_eq!(r.batches_fired, [true, true]);
        // 2 + 1 light for a, 2 + 1 light for b.
        assert_eq!(r.unions_charged, 6);
        let r = e.insert(v(1), v(2));
        assert_eq!(r.batches_fired, [true, true]);
        for i in 0..3 {
            assert_eq!(members(e.ball2(v(i)).unwrap()), vec![0, 1, 2]);
        }
        assert_eq!((e.red(v(1)).unwrap(), e.black(v(1)).unwrap()), (0, 2));
    }

    #[test]
    fn star_trace() {
        // Center 0, leaves 1..=8. The center fires when its degree reaches
        // 1, 2, 4 and 8; in between it accumulates red edges.
        let mut e = Engine::<ExactBall>::empty(EngineConfig::new(1.0, 0)).unwrap();
        let expected_fire = [true, true, false, true, false, false, false, true];
        for leaf in 1..=8u32 {
            let r = e.insert(v(0), v(leaf));
            assert_eq!(
                r.batches_fired[0],
                expected_fire[leaf as usize - 1],
                "leaf {leaf}"
            );
            // Leaves always fire: their black degree is 0.
            assert!(r.batches_fired[1]);
            if leaf == 7 {
                assert_eq!((e.red(v(0)).unwrap(), e.black(v(0)).unwrap()), (3, 4));
                // Leaf 1 last heard from the center at its fourth edge.
                assert_eq!(members(e.ball2(v(1)).unwrap()), vec![0, 1, 2, 3, 4]);
                assert_eq!(members(e.ball2(v(5)).unwrap()), vec![0, 1, 2, 3, 4, 5]);
                assert_eq!(e.ball2(v(7)).unwrap().len(), 8);
                assert_eq!(e.ball2(v(0)).unwrap().len(), 8);
            }
        }
        assert_eq!((e.red(v(0)).unwrap(), e.black(v(0)).unwrap()), (0, 8));
        assert_eq!(e.ball2(v(1)).unwrap().len(), 9);
    }

    #[test]
    fn baseline_union_count() {
        let mut e = Engine::<ExactBall>::empty(EngineConfig::baseline()).unwrap();
        e.insert_baseline(v(0), v(1));
        e.insert_baseline(v(0), v(2));
        e.insert_baseline(v(1), v(3));
        e.insert_baseline(v(3), v(4));
        // deg(1) = 2 and deg(3) = 3 after the insertion.
        let r = e.insert_baseline(v(1), v(3));
        assert_eq!(r.outcome, InsertOutcome::Duplicate);
        let r = e.insert_baseline(v(2), v(3));
        let (du, dv) = (e.graph().degree(v(2)), e.graph().degree(v(3)));
        assert_eq!(r.unions_charged, 4 + (du as u64 - 1) + (dv as u64 - 1));
        assert_eq!(members(e.ball2(v(2)).unwrap()), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn single_edge_baseline() {
        let mut e = Engine::<ExactBall>::empty(EngineConfig::baseline()).unwrap();
        e.insert_baseline(v(0), v(1));
        assert_eq!(members(e.ball2(v(0)).unwrap()), vec![0, 1]);
        assert_eq!(members(e.ball2(v(1)).unwrap()), vec![0, 1]);
    }

    #[test]
    fn degenerate_edges_cost_nothing() {
        let mut e = Engine::<ExactBall>::empty(EngineConfig::new(0.5, 2)).unwrap();
        e.insert(v(0), v(1));
        let cost = e.cost();
        assert_eq!(e.insert(v(1), v(0)).outcome, InsertOutcome::Duplicate);
        assert_eq!(e.insert(v(2), v(2)).outcome, InsertOutcome::SelfLoop);
        assert_eq!(e.cost(), cost);
        assert_eq!(e.cost().insertions, 1);
    }

    #[test]
    fn random_updates_reach_k_neighbors() {
        // Star with a large black degree so the center never fires again.
        let edges: Vec<_> = (1..=20).map(|i| (v(0), v(i))).collect();
        let g = DynamicGraph::from_edges(false, 21, &edges);
        let mut e = Engine::<ExactBall>::new(g, EngineConfig::new(1.0, 3).with_seed(9)).unwrap();
        let r = e.insert(v(0), v(21));
        assert_eq!(r.batches_fired, [false, true]);
        assert_eq!(e.cost().random_light_ops, 3);
        let informed = (1..=21)
            .filter(|&i| e.ball2(v(i)).unwrap().contains(v(21)))
            .count();
        // Three random picks among 21 neighbors, one of which may be 21 itself.
        assert!((2..=3).contains(&(informed - 1)), "{informed}");
    }

    #[test]
    fn directed_out_balls() {
        let cfg = EngineConfig::new(0.0, 0).directed(true);
        let mut e = Engine::<ExactBall>::empty(cfg).unwrap();
        e.insert(v(0), v(1));
        e.insert(v(1), v(2));
        e.insert(v(2), v(3));
        assert_eq!(members(e.ball2(v(0)).unwrap()), vec![0, 1, 2]);
        assert_eq!(members(e.ball2(v(1)).unwrap()), vec![1, 2, 3]);
        assert_eq!(members(e.ball2(v(3)).unwrap()), vec![3]);
        assert_eq!(e.black(v(1)).unwrap(), 1);
    }
}
