use std::collections::HashSet;

use crate::engine::Engine;
use crate::graph::{DynamicGraph, VertexId};
use crate::sketch::ExactBall;

/// Truncated BFS with reusable scratch space. Membership marks stay valid
/// until the next call.
#[derive(Clone, Debug, Default)]
pub struct BallOracle {
    marks: Vec<u32>,
    epoch: u32,
    ball: Vec<VertexId>,
}

impl BallOracle {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, n: usize) {
        if self.marks.len() < n {
            self.marks.resize(n, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        self.ball.clear();
    }

    /// Vertices within `h` hops of `v` (following out-edges when directed),
    /// in BFS order with `v` first.
    pub fn ball(&mut self, g: &DynamicGraph, v: VertexId, h: usize) -> &[VertexId] {
        self.reset(g.vertex_count());
        self.marks[v.index()] = self.epoch;
        self.ball.push(v);
        let mut start = 0;
        for _ in 0..h {
            let end = self.ball.len();
            for i in start..end {
                let x = self.ball[i];
                for &y in g.neighbors(x) {
                    if self.marks[y.index()] != self.epoch {
                        self.marks[y.index()] = self.epoch;
                        self.ball.push(y);
                    }
                }
            }
            if end == self.ball.len() {
                break;
            }
            start = end;
        }
        &self.ball
    }

    pub fn ball_size(&mut self, g: &DynamicGraph, v: VertexId, h: usize) -> usize {
        self.ball(g, v, h).len()
    }

    /// Whether `w` belonged to the most recently computed ball.
    #[inline]
    pub fn contains(&self, w: VertexId) -> bool {
        self.marks.get(w.index()).is_some_and(|&m| m == self.epoch)
    }
}

/// `{u : dist(v, u) <= h}`.
pub fn exact_ball(g: &DynamicGraph, v: VertexId, h: usize) -> HashSet<VertexId> {
    BallOracle::new().ball(g, v, h).iter().copied().collect()
}

/// Jaccard similarity of the exact 2-balls of `u` and `v`.
pub fn exact_jaccard2(g: &DynamicGraph, u: VertexId, v: VertexId) -> f64 {
    crate::sketch::exact_jaccard(&exact_ball(g, u, 2), &exact_ball(g, v, 2))
}

/// `|b2(v)| / |Ball_2(v)|` for an exact-store engine.
pub fn coverage(engine: &Engine<ExactBall>, v: VertexId) -> f64 {
    let truth = BallOracle::new().ball_size(engine.graph(), v, 2);
    let approx = engine.ball2(v).map(ExactBall::len).unwrap_or(0);
    approx as f64 / truth as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::generators::{complete_graph, path_graph, star_graph};

    fn ids(s: &HashSet<VertexId>) -> Vec<u32> {
        let mut v: Vec<u32> = s.iter().map(|x| x.0).collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn path_and_clique_balls() {
        let p = path_graph(4);
        assert_eq!(ids(&exact_ball(&p, VertexId(0), 2)), vec![0, 1, 2]);
        assert_eq!(ids(&exact_ball(&p, VertexId(0), 1)), vec![0, 1]);
        let k4 = complete_graph(4);
        assert_eq!(exact_ball(&k4, VertexId(2), 2).len(), 4);
    }

    #[test]
    fn jaccard_cases() {
        let p = path_graph(4);
        assert_eq!(exact_jaccard2(&p, VertexId(1), VertexId(1)), 1.0);
        let mut g = DynamicGraph::undirected();
        g.ensure_vertices(2);
        assert_eq!(exact_jaccard2(&g, VertexId(0), VertexId(1)), 0.0);
        // S5: the center's 2-ball is everything; a leaf's as well.
        let s = star_graph(5);
        assert_eq!(exact_jaccard2(&s, VertexId(0), VertexId(1)), 1.0);
        // Path 0-1-2-3: {0,1,2} vs {1,2,3} share two of four.
        assert_eq!(exact_jaccard2(&p, VertexId(0), VertexId(3)), 0.5);
    }

    #[test]
    fn directed_balls_follow_out_edges() {
        let mut g = DynamicGraph::new(true);
        g.add_edge(VertexId(0), VertexId(1));
        g.add_edge(VertexId(2), VertexId(0));
        assert_eq!(ids(&exact_ball(&g, VertexId(0), 2)), vec![0, 1]);
        assert_eq!(ids(&exact_ball(&g, VertexId(2), 2)), vec![0, 1, 2]);
    }
}
