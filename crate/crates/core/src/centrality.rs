//! Harmonic centrality (exact, 2-truncated and sketch-estimated), top-h
//! tracking under insertions, and rank-agreement metrics.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::graph::{DynamicGraph, VertexId};
use crate::oracle::BallOracle;
use crate::sketch::{Ball, SizeEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralityKind {
    Hc,
    Hc2,
    Hc2Approx,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralityScores {
    pub kind: CentralityKind,
    pub scores: Vec<f64>,
}

impl CentralityScores {
    pub fn get(&self, v: VertexId) -> f64 {
        self.scores[v.index()]
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// All vertices, best first under the tie rule.
    pub fn ranking(&self) -> Vec<VertexId> {
        let mut order: Vec<VertexId> = (0..self.scores.len()).map(VertexId::from).collect();
        order.sort_by(|&a, &b| rank_cmp((self.get(a), a), (self.get(b), b)));
        order
    }

    /// The best `ceil(alpha * n)` vertices, alpha in `[0, 1]`.
    pub fn top_fraction(&self, alpha: f64) -> Vec<VertexId> {
        let count = (alpha * self.scores.len() as f64).ceil() as usize;
        self.top(count)
    }

    pub fn top(&self, count: usize) -> Vec<VertexId> {
        let mut r = self.ranking();
        r.truncate(count);
        r
    }
}

/// Ranking order: higher score first, then smaller id.
#[inline]
pub fn rank_cmp(a: (f64, VertexId), b: (f64, VertexId)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// `sum over reachable u != v of 1 / dist(v, u)`, by one BFS per vertex.
pub fn harmonic_exact(g: &DynamicGraph) -> CentralityScores {
    let n = g.vertex_count();
    let scores = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![u32::MAX; n], Vec::with_capacity(n)),
            |(dist, queue), v| {
                queue.clear();
                let mut total = 0.0;
                dist[v] = 0;
                queue.push(VertexId::from(v));
                let mut head = 0;
                while head < queue.len() {
                    let x = queue[head];
                    head += 1;
                    let d = dist[x.index()] + 1;
                    for &y in g.neighbors(x) {
                        if dist[y.index()] == u32::MAX {
                            dist[y.index()] = d;
                            total += 1.0 / d as f64;
                            queue.push(y);
                        }
                    }
                }
                for x in queue.iter() {
                    dist[x.index()] = u32::MAX;
                }
                total
            },
        )
        .collect();
    CentralityScores {
        kind: CentralityKind::Hc,
        scores,
    }
}

/// `|L1(v)| + |L2(v)| / 2`.
pub fn harmonic_truncated(g: &DynamicGraph) -> CentralityScores {
    let scores = (0..g.vertex_count())
        .into_par_iter()
        .map_init(BallOracle::new, |oracle, v| {
            let v = VertexId::from(v);
            let l1 = g.degree(v);
            let b2 = oracle.ball_size(g, v, 2);
            l1 as f64 + (b2 - 1 - l1) as f64 / 2.0
        })
        .collect();
    CentralityScores {
        kind: CentralityKind::Hc2,
        scores,
    }
}

/// Truncated harmonic centrality from estimated ball sizes.
/// The 2-ball minus 1-ball difference is clamped at zero.
#[inline]
pub fn approx_score(b1: f64, b2: f64) -> f64 {
    (b1 - 1.0).max(0.0) + (b2 - b1).max(0.0) / 2.0
}

pub fn vertex_approx<B: Ball + SizeEstimate>(engine: &Engine<B>, v: VertexId) -> f64 {
    let (b1, b2) = engine.balls();
    approx_score(b1[v.index()].estimate_size(), b2[v.index()].estimate_size())
}

pub fn harmonic_approx<B: Ball + SizeEstimate>(engine: &Engine<B>) -> CentralityScores {
    let (b1, b2) = engine.balls();
    let scores = b1
        .par_iter()
        .zip(b2.par_iter())
        .map(|(a, b)| approx_score(a.estimate_size(), b.estimate_size()))
        .collect();
    CentralityScores {
        kind: CentralityKind::Hc2Approx,
        scores,
    }
}

/// The `h` best vertices under monotonically non-decreasing scores, kept in
/// an indexed binary heap whose root is the worst member.
#[derive(Clone, Debug)]
pub struct TopHTracker {
    h: usize,
    heap: Vec<(f64, VertexId)>,
    pos: HashMap<VertexId, usize>,
}

impl TopHTracker {
    pub fn new(h: usize) -> Self {
        Self {
            h,
            heap: Vec::with_capacity(h),
            pos: HashMap::with_capacity(h),
        }
    }

    /// Seeds the tracker with every vertex of `scores`.
    pub fn from_scores(h: usize, scores: &[f64]) -> Self {
        let mut t = Self::new(h);
        for (i, &s) in scores.iter().enumerate() {
            t.update(VertexId::from(i), s);
        }
        t
    }

    pub fn capacity(&self) -> usize {
        self.h
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.pos.contains_key(&v)
    }

    /// Worst tracked entry.
    pub fn min(&self) -> Option<(f64, VertexId)> {
        self.heap.first().copied()
    }

    /// Tracked vertices, best first.
    pub fn members(&self) -> Vec<VertexId> {
        let mut m = self.heap.clone();
        m.sort_by(|&a, &b| rank_cmp(a, b));
        m.into_iter().map(|(_, v)| v).collect()
    }

    pub fn update(&mut self, v: VertexId, score: f64) {
        if self.h == 0 {
            return;
        }
        if let Some(&i) = self.pos.get(&v) {
            self.heap[i].0 = score;
            let i = self.sift_up(i);
            self.sift_down(i);
        } else if self.heap.len() < self.h {
            self.heap.push((score, v));
            self.pos.insert(v, self.heap.len() - 1);
            self.sift_up(self.heap.len() - 1);
        } else if rank_cmp((score, v), self.heap[0]) == Ordering::Less {
            let (_, evicted) = self.heap[0];
            self.pos.remove(&evicted);
            self.heap[0] = (score, v);
            self.pos.insert(v, 0);
            self.sift_down(0);
        }
    }

    // `a` sits closer to the root than `b` when it ranks worse.
    fn worse(&self, a: usize, b: usize) -> bool {
        rank_cmp(self.heap[a], self.heap[b]) == Ordering::Greater
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.pos.insert(self.heap[a].1, a);
        self.pos.insert(self.heap[b].1, b);
    }

    fn sift_up(&mut self, mut i: usize) -> usize {
        while i > 0 {
            let parent = (i - 1) / 2;
            if !self.worse(i, parent) {
                break;
            }
            self.swap(i, parent);
            i = parent;
        }
        i
    }

    fn sift_down(&mut self, mut i: usize) {
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut m = i;
            if l < self.heap.len() && self.worse(l, m) {
                m = l;
            }
            if r < self.heap.len() && self.worse(r, m) {
                m = r;
            }
            if m == i {
                return;
            }
            self.swap(i, m);
            i = m;
        }
    }
}

/// Reference top-h by full sort.
pub fn brute_force_top(scores: &[f64], h: usize) -> Vec<VertexId> {
    CentralityScores {
        kind: CentralityKind::Hc,
        scores: scores.to_vec(),
    }
    .top(h)
}

/// Average (fractional) ranks, 1-based; tied values share their mean rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman's rho with average ranks for ties. Returns 0 when either side is
/// constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "rank vectors differ in length");
    assert!(x.len() >= 2, "need at least two items");
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Kendall's tau-b. Quadratic; fine for a few thousand items.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "rank vectors differ in length");
    assert!(x.len() >= 2, "need at least two items");
    let (mut conc, mut disc, mut tie_x, mut tie_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i].total_cmp(&x[j]);
            let dy = y[i].total_cmp(&y[j]);
            match (dx, dy) {
                (Ordering::Equal, Ordering::Equal) => {}
                (Ordering::Equal, _) => tie_x += 1,
                (_, Ordering::Equal) => tie_y += 1,
                _ if dx == dy => conc += 1,
                _ => disc += 1,
            }
        }
    }
    let denom = (((conc + disc + tie_x) * (conc + disc + tie_y)) as f64).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        (conc - disc) as f64 / denom
    }
}

/// `|estimated ∩ truth| / |truth|`.
pub fn recall_at(truth: &[VertexId], estimated: &[VertexId]) -> f64 {
    assert!(!truth.is_empty(), "recall of an empty set is undefined");
    let est: HashSet<VertexId> = estimated.iter().copied().collect();
    truth.iter().filter(|v| est.contains(v)).count() as f64 / truth.len() as f64
}

/// Rank agreement of `estimate` with `truth` restricted to the best `alpha`
/// fraction of `truth`: returns `(spearman, kendall)`.
pub fn correlation_on_top(
    truth: &CentralityScores,
    estimate: &CentralityScores,
    alpha: f64,
) -> (f64, f64) {
    let top = truth.top_fraction(alpha);
    let x: Vec<f64> = top.iter().map(|&v| truth.get(v)).collect();
    let y: Vec<f64> = top.iter().map(|&v| estimate.get(v)).collect();
    (spearman(&x, &y), kendall_tau(&x, &y))
}
