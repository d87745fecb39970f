//! Experiment drivers: graph sources, stream preparation, the measurement
//! protocols and their CSV/JSON output.

mod experiments;
mod io;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineConfig, EngineError};
use crate::graph::DynamicGraph;
use crate::oracle::generators::{
    complete_graph, cycle_graph, girth5_bipartite, petersen_graph, sorted_order,
};
use crate::oracle::{gen_ba, gen_er, gen_random_permutation, Edge, OracleError, StreamSpec};
use crate::sketch::{SketchError, StoreSpec};

pub use experiments::{
    check_gamma, run_adversarial, run_centrality, run_coverage, run_jaccard_mape, run_size_mape,
    run_speedup, AdversarialReport, AdversarialRow, CentralityReport, CentralityRow,
    CoverageReport, GammaReport, JaccardReport, JaccardRow, MetricsRow, SizeReport, SizeRow,
    SpeedupReport, SpeedupRow, CORRELATION_ALPHAS, RECALL_ALPHAS,
};
pub use io::{
    load_edge_stream, parse_edge_stream, sidecar_path, write_edge_list, write_json, write_sidecar,
    EdgeStream, GraphSummary, Table,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Config(String),
    #[error("sample unavailable: {0}")]
    SampleUnavailable(String),
}

impl HarnessError {
    /// Process exit status: 1 for configuration problems, 2 for I/O and
    /// parse failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io { .. } | HarnessError::Parse { .. } => 2,
            HarnessError::Config(_) | HarnessError::SampleUnavailable(_) => 1,
        }
    }
}

impl From<EngineError> for HarnessError {
    fn from(e: EngineError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<OracleError> for HarnessError {
    fn from(e: OracleError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<SketchError> for HarnessError {
    fn from(e: SketchError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

/// Small fixed graphs addressable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NamedGraph {
    Petersen,
    Cycle {
        n: usize,
    },
    Complete {
        n: usize,
    },
    /// Random bipartite graph without 4-cycles.
    Bipartite {
        left: usize,
        right: usize,
        edges: usize,
    },
}

impl FromStr for NamedGraph {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::Config(format!("unknown graph family `{s}`"));
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = parse_list::<usize>(args).map_err(|_| bad())?;
        match (name, nums.as_slice()) {
            ("petersen", []) => Ok(NamedGraph::Petersen),
            ("cycle", &[n]) if n >= 3 => Ok(NamedGraph::Cycle { n }),
            ("complete", &[n]) => Ok(NamedGraph::Complete { n }),
            ("bipartite", &[left, right, edges]) => {
                Ok(NamedGraph::Bipartite { left, right, edges })
            }
            _ => Err(bad()),
        }
    }
}

/// Where the final graph comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSource {
    File {
        path: PathBuf,
    },
    Er {
        n: usize,
        m: usize,
    },
    Ba {
        n: usize,
        m0: usize,
        edges_per_step: usize,
    },
    Named {
        graph: NamedGraph,
    },
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::File { path } => write!(f, "{}", path.display()),
            GraphSource::Er { n, m } => write!(f, "er:{n},{m}"),
            GraphSource::Ba {
                n,
                m0,
                edges_per_step,
            } => write!(f, "ba:{n},{m0},{edges_per_step}"),
            GraphSource::Named { graph } => write!(f, "{graph:?}"),
        }
    }
}

/// Order in which the final graph's edges are streamed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamOrder {
    /// Uniform random permutation per run seed.
    Random,
    /// File order (duplicates included); edge order of generated graphs.
    Trace,
    /// Lexicographic by endpoints.
    Sorted,
}

impl FromStr for StreamOrder {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(StreamOrder::Random),
            "trace" => Ok(StreamOrder::Trace),
            "sorted" => Ok(StreamOrder::Sorted),
            _ => Err(HarnessError::Config(format!(
                "unknown stream order `{s}` (expected random, trace or sorted)"
            ))),
        }
    }
}

/// Everything an experiment needs; serialized verbatim into the JSON sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: GraphSource,
    pub directed: bool,
    pub order: StreamOrder,
    /// Grid of thresholds; every experiment runs the product `phi x k`.
    pub phi: Vec<f64>,
    pub k: Vec<usize>,
    pub store: StoreSpec,
    /// Number of runs; run `i` uses seed `seed + i`.
    pub seeds: usize,
    /// Master seed. Also seeds the synthetic graph, which is shared by all runs.
    pub seed: u64,
    pub init_fraction: f64,
    pub snapshots: usize,
    pub sample_top: usize,
    pub pair_count: usize,
    pub similarity_floor: f64,
    pub epsilon: f64,
    pub delta: usize,
    pub rho: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            source: GraphSource::Er { n: 1000, m: 10_000 },
            directed: false,
            order: StreamOrder::Random,
            phi: vec![0.25],
            k: vec![2],
            store: StoreSpec::Exact,
            seeds: 10,
            seed: 0,
            init_fraction: 0.2,
            snapshots: 20,
            sample_top: 50,
            pair_count: 200,
            similarity_floor: 0.2,
            epsilon: 0.5,
            delta: 64,
            rho: 2,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.phi.is_empty() || self.k.is_empty() {
            return bad("phi and k grids must be non-empty".into());
        }
        if let Some(p) = self.phi.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return bad(format!("phi must lie in [0, 1], got {p}"));
        }
        if !(0.0..1.0).contains(&self.init_fraction) {
            return bad(format!(
                "init fraction must lie in [0, 1), got {}",
                self.init_fraction
            ));
        }
        if self.seeds == 0 || self.snapshots == 0 || self.sample_top == 0 {
            return bad("seeds, snapshots and sample-top must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.similarity_floor) {
            return bad(format!(
                "similarity floor must lie in [0, 1], got {}",
                self.similarity_floor
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return bad(format!("epsilon must lie in (0, 1], got {}", self.epsilon));
        }
        if self.directed && !matches!(self.source, GraphSource::File { .. }) {
            return bad("synthetic graphs are undirected; --directed needs --input".into());
        }
        Ok(())
    }

    pub fn run_seeds(&self) -> Vec<u64> {
        (0..self.seeds as u64)
            .map(|i| self.seed.wrapping_add(i))
            .collect()
    }

    pub fn grid(&self) -> Vec<(f64, usize)> {
        self.phi
            .iter()
            .flat_map(|&p| self.k.iter().map(move |&k| (p, k)))
            .collect()
    }

    pub fn engine_config(&self, phi: f64, k: usize, seed: u64) -> EngineConfig {
        EngineConfig::new(phi, k)
            .with_store(self.store)
            .with_seed(seed)
            .directed(self.directed)
    }
}

/// The final graph of an experiment together with the file order of its
/// edges when it was read from disk.
#[derive(Clone, Debug)]
pub struct SourceGraph {
    pub graph: DynamicGraph,
    pub trace: Vec<Edge>,
}

pub fn load_source(cfg: &ExperimentConfig) -> Result<SourceGraph, HarnessError> {
    let graph = match &cfg.source {
        GraphSource::File { path } => {
            let stream = load_edge_stream(path)?;
            let graph = DynamicGraph::from_edges(cfg.directed, stream.labels.len(), &stream.edges);
            return Ok(SourceGraph {
                graph,
                trace: stream.edges,
            });
        }
        GraphSource::Er { n, m } => gen_er(*n, *m, cfg.seed)?,
        GraphSource::Ba {
            n,
            m0,
            edges_per_step,
        } => gen_ba(*n, *m0, *edges_per_step, cfg.seed)?,
        GraphSource::Named { graph } => match *graph {
            NamedGraph::Petersen => petersen_graph(),
            NamedGraph::Cycle { n } => cycle_graph(n),
            NamedGraph::Complete { n } => complete_graph(n),
            NamedGraph::Bipartite { left, right, edges } => {
                girth5_bipartite(left, right, edges, cfg.seed)
            }
        },
    };
    let trace = graph.edges().collect();
    Ok(SourceGraph { graph, trace })
}

/// Initial graph and insertion sequence for one run.
pub fn prepare_stream(
    cfg: &ExperimentConfig,
    src: &SourceGraph,
    run_seed: u64,
) -> Result<StreamSpec, HarnessError> {
    let split = |edges: Vec<Edge>| {
        let mut initial = edges;
        let cut = (cfg.init_fraction * initial.len() as f64).floor() as usize;
        let stream = initial.split_off(cut);
        StreamSpec {
            n: src.graph.vertex_count(),
            directed: src.graph.is_directed(),
            initial,
            stream,
        }
    };
    Ok(match cfg.order {
        StreamOrder::Random => gen_random_permutation(&src.graph, run_seed, cfg.init_fraction)?,
        StreamOrder::Trace => split(src.trace.clone()),
        StreamOrder::Sorted => split(sorted_order(&src.graph).stream),
    })
}

/// `count` strictly increasing prefix lengths, equally spaced over a stream of
/// `len` insertions and ending at `len`.
pub fn snapshot_positions(len: usize, count: usize) -> Vec<usize> {
    if len == 0 {
        return vec![0];
    }
    let count = count.clamp(1, len);
    (1..=count).map(|i| (i * len).div_ceil(count)).collect()
}

/// Prefix lengths at the given fractions of the stream, deduplicated.
pub fn fraction_positions(len: usize, fractions: &[f64]) -> Vec<usize> {
    let mut out: Vec<usize> = fractions
        .iter()
        .map(|f| ((f * len as f64).ceil() as usize).min(len))
        .collect();
    out.dedup();
    out
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, T::Err> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|p| p.trim().parse()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshots_are_increasing() {
        assert_eq!(snapshot_positions(10, 5), vec![2, 4, 6, 8, 10]);
        assert_eq!(snapshot_positions(7, 3), vec![3, 5, 7]);
        assert_eq!(snapshot_positions(3, 20), vec![1, 2, 3]);
        assert_eq!(snapshot_positions(0, 4), vec![0]);
        for len in 1..50 {
            for c in 1..60 {
                let p = snapshot_positions(len, c);
                assert!(p.windows(2).all(|w| w[0] < w[1]));
                assert_eq!(*p.last().unwrap(), len);
            }
        }
        assert_eq!(fraction_positions(10, &[0.5, 0.75, 1.0]), vec![5, 8, 10]);
    }

    #[test]
    fn named_graphs_parse() {
        assert_eq!(
            "petersen".parse::<NamedGraph>().unwrap(),
            NamedGraph::Petersen
        );
        assert_eq!(
            "bipartite:5,6,7".parse::<NamedGraph>().unwrap(),
            NamedGraph::Bipartite {
                left: 5,
                right: 6,
                edges: 7
            }
        );
        assert!("cycle:2".parse::<NamedGraph>().is_err());
        assert!("mesh".parse::<NamedGraph>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let bad = [
            ExperimentConfig {
                phi: vec![1.5],
                ..Default::default()
            },
            ExperimentConfig {
                init_fraction: 1.0,
                ..Default::default()
            },
            ExperimentConfig {
                seeds: 0,
                ..Default::default()
            },
            ExperimentConfig {
                directed: true,
                ..Default::default()
            },
            ExperimentConfig {
                epsilon: 0.0,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert_eq!(cfg.validate().unwrap_err().exit_code(), 1);
        }
    }

    #[test]
    fn trace_and_sorted_streams_split_at_init_fraction() {
        let cfg = ExperimentConfig {
            source: GraphSource::Er { n: 30, m: 50 },
            order: StreamOrder::Sorted,
            ..Default::default()
        };
        let src = load_source(&cfg).unwrap();
        let s = prepare_stream(&cfg, &src, 0).unwrap();
        assert_eq!(s.initial.len(), 10);
        assert_eq!(s.len(), 40);
        assert!(s.initial.last() < s.stream.first());
        let trace = prepare_stream(
            &ExperimentConfig {
                order: StreamOrder::Trace,
                ..cfg
            },
            &src,
            0,
        )
        .unwrap();
        assert_eq!(trace.final_graph().edge_count(), 50);
    }
}
