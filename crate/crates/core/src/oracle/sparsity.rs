use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::graph::{DynamicGraph, VertexId};

/// Short-cycle class of a graph; only the distinctions the sparsity theory
/// needs are made.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GirthClass {
    /// Contains a triangle.
    Three,
    /// Triangle-free but contains a 4-cycle.
    Four,
    /// No cycle shorter than five (including forests).
    AtLeastFive,
}

impl std::fmt::Display for GirthClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GirthClass::Three => "3",
            GirthClass::Four => "4",
            GirthClass::AtLeastFive => ">=5",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsityReport {
    /// Smallest gamma for which the graph is locally gamma-sparse.
    pub gamma_min: usize,
    pub girth_class: GirthClass,
    /// `(u, a, b)`: center `u`, a vertex `a` attaining `gamma_min` and one of
    /// its neighbors `b` in the first layer of `u`. Present iff `gamma_min > 0`.
    pub witness: Option<(VertexId, VertexId, VertexId)>,
}

/// Computes the local sparsity of an undirected graph by brute force over
/// every vertex's 2-hop neighborhood, and classifies its short cycles with an
/// independent triangle / 4-cycle search.
///
/// Cost is `O(sum over u of the volume of its 2-ball)`; meant for desk-scale
/// graphs only.
pub fn gamma_sparsity(g: &DynamicGraph) -> Result<SparsityReport, OracleError> {
    if g.is_directed() {
        return Err(OracleError::Directed);
    }
    let n = g.vertex_count();
    // Stamp of the center whose first layer a vertex belongs to.
    let mut layer1 = vec![u32::MAX; n];
    let mut seen2 = vec![u32::MAX; n];
    let mut gamma = 0usize;
    let mut witness = None;

    for u in g.vertices() {
        let stamp = u.0;
        for &v in g.neighbors(u) {
            layer1[v.index()] = stamp;
        }
        for &v in g.neighbors(u) {
            let mut inner = 0;
            let mut partner = None;
            for &x in g.neighbors(v) {
                if layer1[x.index()] == stamp {
                    inner += 1;
                    partner = Some(x);
                } else if x != u && seen2[x.index()] != stamp {
                    // x is in the second layer: count its first-layer neighbors.
                    seen2[x.index()] = stamp;
                    let mut links = 0;
                    let mut last = v;
                    for &y in g.neighbors(x) {
                        if layer1[y.index()] == stamp {
                            links += 1;
                            last = y;
                        }
                    }
                    if links - 1 > gamma {
                        gamma = links - 1;
                        witness = Some((u, x, last));
                    }
                }
            }
            if inner > gamma {
                gamma = inner;
                witness = partner.map(|p| (u, v, p));
            }
        }
    }

    Ok(SparsityReport {
        gamma_min: gamma,
        girth_class: girth_class(g),
        witness,
    })
}

pub fn has_triangle(g: &DynamicGraph) -> bool {
    let mut mark = vec![u32::MAX; g.vertex_count()];
    for a in g.vertices() {
        for &b in g.neighbors(a) {
            mark[b.index()] = a.0;
        }
        for &b in g.neighbors(a) {
            if b > a && g.neighbors(b).iter().any(|&c| mark[c.index()] == a.0) {
                return true;
            }
        }
    }
    false
}

/// True if some pair of distinct vertices has two distinct common neighbors.
pub fn has_four_cycle(g: &DynamicGraph) -> bool {
    let mut count = vec![(u32::MAX, 0u32); g.vertex_count()];
    for a in g.vertices() {
        for &b in g.neighbors(a) {
            for &c in g.neighbors(b) {
                if c == a {
                    continue;
                }
                let slot = &mut count[c.index()];
                if slot.0 != a.0 {
                    *slot = (a.0, 0);
                }
                slot.1 += 1;
                if slot.1 >= 2 {
                    return true;
                }
            }
        }
    }
    false
}

pub fn girth_class(g: &DynamicGraph) -> GirthClass {
    if has_triangle(g) {
        GirthClass::Three
    } else if has_four_cycle(g) {
        GirthClass::Four
    } else {
        GirthClass::AtLeastFive
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::generators::{complete_graph, cycle_graph, path_graph, petersen_graph};

    #[test]
    fn five_cycle_is_zero_sparse() {
        let r = gamma_sparsity(&cycle_graph(5)).unwrap();
        assert_eq!(r.gamma_min, 0);
        assert_eq!(r.girth_class, GirthClass::AtLeastFive);
        assert!(r.witness.is_none());
    }

    #[test]
    fn triangle() {
        let r = gamma_sparsity(&cycle_graph(3)).unwrap();
        assert_eq!(r.gamma_min, 1);
        assert_eq!(r.girth_class, GirthClass::Three);
        let (u, a, b) = r.witness.unwrap();
        assert!(u != a && a != b && u != b);
    }

    #[test]
    fn square() {
        let g = cycle_graph(4);
        let r = gamma_sparsity(&g).unwrap();
        assert_eq!(r.gamma_min, 1);
        assert_eq!(r.girth_class, GirthClass::Four);
        // The witness is the opposite corner and one of its links.
        let (u, w, x) = r.witness.unwrap();
        assert!(!g.contains_edge(u, w));
        assert!(g.contains_edge(w, x) && g.contains_edge(u, x));
    }

    #[test]
    fn cliques_and_trees() {
        // In K5 every first-layer vertex sees the other three.
        assert_eq!(gamma_sparsity(&complete_graph(5)).unwrap().gamma_min, 3);
        assert_eq!(gamma_sparsity(&path_graph(6)).unwrap().gamma_min, 0);
        let petersen = gamma_sparsity(&petersen_graph()).unwrap();
        assert_eq!(petersen.gamma_min, 0);
        assert_eq!(petersen.girth_class, GirthClass::AtLeastFive);
    }

    #[test]
    fn directed_is_rejected() {
        assert!(matches!(
            gamma_sparsity(&DynamicGraph::new(true)),
            Err(OracleError::Directed)
        ));
    }
}
