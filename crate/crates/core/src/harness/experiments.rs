use std::collections::{HashMap, HashSet};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    fraction_positions, load_source, prepare_stream, snapshot_positions, ExperimentConfig,
    HarnessError, SourceGraph, Table,
};
use crate::centrality::{
    correlation_on_top, harmonic_approx, harmonic_exact, harmonic_truncated, recall_at,
    vertex_approx, TopHTracker,
};
use crate::engine::{Engine, EngineConfig};
use crate::graph::{DynamicGraph, VertexId};
use crate::oracle::{
    exact_ball, gamma_sparsity, gen_adversarial, gen_random_permutation, AdversarialSpec,
    BallOracle, Edge, GirthClass,
};
use crate::sketch::{
    derive_seeds, exact_jaccard, stream, Ball, ExactBall, JaccardEstimate, KmvMinHash, KmvSketch,
    MinHashSignature, SizeEstimate, StoreKind,
};

/// Top-alpha fractions over which rank correlations are reported.
pub const CORRELATION_ALPHAS: [f64; 3] = [0.05, 0.1, 0.2];
/// Top-alpha fractions over which recall is reported.
pub const RECALL_ALPHAS: [f64; 3] = [0.01, 0.05, 0.1];
const MAPE_FRACTIONS: [f64; 3] = [0.5, 0.75, 1.0];

fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0, 0usize);
    for x in xs {
        s += x;
        c += 1;
    }
    s / c as f64
}

fn advance<B: Ball>(engine: &mut Engine<B>, edges: &[Edge]) {
    for &(u, v) in edges {
        engine.insert(u, v);
    }
}

/// The `count` vertices with the largest exact 2-balls in `g`, ties by id.
fn top_sample(g: &DynamicGraph, count: usize) -> Result<Vec<VertexId>, HarnessError> {
    if g.vertex_count() < count {
        return Err(HarnessError::SampleUnavailable(format!(
            "graph has {} vertices but {count} were requested",
            g.vertex_count()
        )));
    }
    let sizes: Vec<usize> = (0..g.vertex_count())
        .into_par_iter()
        .map_init(BallOracle::new, |o, v| o.ball_size(g, VertexId::from(v), 2))
        .collect();
    let mut order: Vec<VertexId> = g.vertices().collect();
    order.sort_by(|a, b| sizes[b.index()].cmp(&sizes[a.index()]).then(a.cmp(b)));
    order.truncate(count);
    Ok(order)
}

fn bound_holds(cfg: &EngineConfig, union_ops: u64, insertions: u64) -> bool {
    cfg.phi == 0.0 || cfg.directed || union_ops as f64 <= cfg.amortized_bound() * insertions as f64
}

// ---------------------------------------------------------------- coverage

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRow {
    pub phi: f64,
    pub k: usize,
    pub snapshot: usize,
    /// Insertions replayed so far.
    pub position: usize,
    /// Mean coverage over the sample, averaged over runs.
    pub coverage: f64,
    /// Standard deviation of the per-run means.
    pub coverage_std: f64,
    /// Absolute percentage error of the ball size, pooled over runs and sample.
    pub mape_mean: f64,
    pub mape_std: f64,
    pub union_ops: f64,
    pub wall_time: f64,
    /// Expected coverage for random orders, `1 / (1 + phi)`.
    pub theory: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverageReport {
    pub rows: Vec<MetricsRow>,
    /// Final mean coverage per run, per grid point.
    pub final_per_seed: Vec<(f64, usize, Vec<f64>)>,
}

impl CoverageReport {
    pub fn final_row(&self, phi: f64, k: usize) -> Option<&MetricsRow> {
        self.rows.iter().rev().find(|r| r.phi == phi && r.k == k)
    }

    /// Wall time is left out so that tables are reproducible.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&[
            "phi",
            "k",
            "snapshot",
            "position",
            "coverage",
            "coverage_std",
            "mape_mean",
            "mape_std",
            "union_ops",
            "theory",
        ]);
        for r in &self.rows {
            t.push(vec![
                fmt(r.phi),
                r.k.to_string(),
                r.snapshot.to_string(),
                r.position.to_string(),
                fmt(r.coverage),
                fmt(r.coverage_std),
                fmt(r.mape_mean),
                fmt(r.mape_std),
                fmt(r.union_ops),
                fmt(r.theory),
            ]);
        }
        t
    }
}

struct CoverageSnap {
    position: usize,
    coverages: Vec<f64>,
    union_ops: u64,
    secs: f64,
}

/// Mean coverage of the sampled vertices at equally spaced snapshots.
pub fn run_coverage(cfg: &ExperimentConfig) -> Result<CoverageReport, HarnessError> {
    cfg.validate()?;
    if cfg.store.kind() != StoreKind::Exact {
        return Err(HarnessError::Config(
            "coverage is only defined for the exact store".into(),
        ));
    }
    let src = load_source(cfg)?;
    let sample = top_sample(&src.graph, cfg.sample_top)?;
    let mut rows = Vec::new();
    let mut final_per_seed = Vec::new();
    for (phi, k) in cfg.grid() {
        let runs = cfg
            .run_seeds()
            .par_iter()
            .map(|&seed| coverage_run(cfg, &src, &sample, phi, k, seed))
            .collect::<Result<Vec<_>, _>>()?;
        let snaps = runs.iter().map(Vec::len).min().unwrap_or(0);
        for s in 0..snaps {
            let per_run: Vec<f64> = runs
                .iter()
                .map(|r| mean(r[s].coverages.iter().copied()))
                .collect();
            let apes: Vec<f64> = runs
                .iter()
                .flat_map(|r| r[s].coverages.iter().map(|c| 1.0 - c))
                .collect();
            let (coverage, coverage_std) = mean_std(&per_run);
            let (mape_mean, mape_std) = mean_std(&apes);
            rows.push(MetricsRow {
                phi,
                k,
                snapshot: s + 1,
                position: runs[0][s].position,
                coverage,
                coverage_std,
                mape_mean,
                mape_std,
                union_ops: mean(runs.iter().map(|r| r[s].union_ops as f64)),
                wall_time: mean(runs.iter().map(|r| r[s].secs)),
                theory: 1.0 / (1.0 + phi),
            });
        }
        let finals = runs
            .iter()
            .filter_map(|r| r.last().map(|s| mean(s.coverages.iter().copied())))
            .collect();
        final_per_seed.push((phi, k, finals));
    }
    Ok(CoverageReport {
        rows,
        final_per_seed,
    })
}

fn coverage_run(
    cfg: &ExperimentConfig,
    src: &SourceGraph,
    sample: &[VertexId],
    phi: f64,
    k: usize,
    seed: u64,
) -> Result<Vec<CoverageSnap>, HarnessError> {
    let spec = prepare_stream(cfg, src, seed)?;
    let mut engine =
        Engine::<ExactBall>::new(spec.initial_graph(), cfg.engine_config(phi, k, seed))?;
    let mut oracle = BallOracle::new();
    let mut out = Vec::new();
    let mut done = 0;
    let mut secs = 0.0;
    for p in snapshot_positions(spec.len(), cfg.snapshots) {
        let start = Instant::now();
        advance(&mut engine, &spec.stream[done..p]);
        secs += start.elapsed().as_secs_f64();
        done = p;
        let coverages = sample
            .iter()
            .map(|&v| {
                let truth = oracle.ball_size(engine.graph(), v, 2);
                engine.ball2(v).map(ExactBall::len).unwrap_or(0) as f64 / truth as f64
            })
            .collect();
        out.push(CoverageSnap {
            position: p,
            coverages,
            union_ops: engine.cost().union_ops,
            secs,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------- size MAPE

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SizeRow {
    /// `baseline` or `lazy`.
    pub config: String,
    pub phi: Option<f64>,
    pub k: Option<usize>,
    pub fraction: f64,
    pub position: usize,
    pub mape_mean: f64,
    pub mape_std: f64,
    pub union_ops: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SizeReport {
    pub rows: Vec<SizeRow>,
}

impl SizeReport {
    pub fn baseline_final(&self) -> Option<&SizeRow> {
        self.rows.iter().rev().find(|r| r.config == "baseline")
    }

    pub fn final_row(&self, phi: f64, k: usize) -> Option<&SizeRow> {
        self.rows
            .iter()
            .rev()
            .find(|r| r.phi == Some(phi) && r.k == Some(k))
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&[
            "config",
            "phi",
            "k",
            "fraction",
            "position",
            "mape_mean",
            "mape_std",
            "union_ops",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.config.clone(),
                r.phi.map(fmt).unwrap_or_default(),
                r.k.map(|k| k.to_string()).unwrap_or_default(),
                fmt(r.fraction),
                r.position.to_string(),
                fmt(r.mape_mean),
                fmt(r.mape_std),
                fmt(r.union_ops),
            ]);
        }
        t
    }
}

type Lane<B> = (Option<(f64, usize)>, Engine<B>);

/// The baseline lane followed by one lane per grid point, all on one stream.
fn lanes<B: Ball>(
    cfg: &ExperimentConfig,
    initial: &DynamicGraph,
    seed: u64,
) -> Result<Vec<Lane<B>>, HarnessError> {
    let mut out = vec![(
        None,
        Engine::new(initial.clone(), cfg.engine_config(0.0, 0, seed))?,
    )];
    for (phi, k) in cfg.grid() {
        out.push((
            Some((phi, k)),
            Engine::new(initial.clone(), cfg.engine_config(phi, k, seed))?,
        ));
    }
    Ok(out)
}

fn lane_label(cell: Option<(f64, usize)>) -> String {
    if cell.is_some() { "lazy" } else { "baseline" }.to_string()
}

/// Estimated 2-ball sizes of the top sample against exact BFS, at 50%, 75%
/// and 100% of the stream. The baseline lane is the engine at phi = 0, k = 0.
pub fn run_size_mape(cfg: &ExperimentConfig) -> Result<SizeReport, HarnessError> {
    cfg.validate()?;
    match cfg.store.kind() {
        StoreKind::Exact => size_mape::<ExactBall>(cfg),
        StoreKind::Kmv => size_mape::<KmvSketch>(cfg),
        StoreKind::KmvMinHash => size_mape::<KmvMinHash>(cfg),
        StoreKind::MinHash => Err(HarnessError::Config(
            "minhash stores cannot estimate ball sizes; use exact or kmv".into(),
        )),
    }
}

struct LaneSnap {
    cell: Option<(f64, usize)>,
    position: usize,
    apes: Vec<f64>,
    union_ops: u64,
}

fn size_mape<B: Ball + SizeEstimate>(cfg: &ExperimentConfig) -> Result<SizeReport, HarnessError> {
    let src = load_source(cfg)?;
    let sample = top_sample(&src.graph, cfg.sample_top)?;
    let runs = cfg
        .run_seeds()
        .par_iter()
        .map(|&seed| -> Result<Vec<Vec<LaneSnap>>, HarnessError> {
            let spec = prepare_stream(cfg, &src, seed)?;
            let mut lanes = lanes::<B>(cfg, &spec.initial_graph(), seed)?;
            let mut oracle = BallOracle::new();
            let mut done = 0;
            let mut snaps = Vec::new();
            for p in fraction_positions(spec.len(), &MAPE_FRACTIONS) {
                for (_, e) in lanes.iter_mut() {
                    advance(e, &spec.stream[done..p]);
                }
                done = p;
                let g = lanes[0].1.graph();
                let truth: Vec<f64> = sample
                    .iter()
                    .map(|&v| oracle.ball_size(g, v, 2) as f64)
                    .collect();
                snaps.push(
                    lanes
                        .iter()
                        .map(|(cell, e)| LaneSnap {
                            cell: *cell,
                            position: p,
                            apes: sample
                                .iter()
                                .zip(&truth)
                                .map(|(&v, t)| {
                                    (e.balls().1[v.index()].estimate_size() - t).abs() / t
                                })
                                .collect(),
                            union_ops: e.cost().union_ops,
                        })
                        .collect(),
                );
            }
            Ok(snaps)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let lanes_n = cfg.grid().len() + 1;
    let total = runs[0].last().map(|l| l[0].position.max(1)).unwrap_or(1) as f64;
    let snaps = runs.iter().map(Vec::len).min().unwrap_or(0);
    for lane in 0..lanes_n {
        for s in 0..snaps {
            let first = &runs[0][s][lane];
            let apes: Vec<f64> = runs
                .iter()
                .flat_map(|r| r[s][lane].apes.iter().copied())
                .collect();
            let (mape_mean, mape_std) = mean_std(&apes);
            rows.push(SizeRow {
                config: lane_label(first.cell),
                phi: first.cell.map(|c| c.0),
                k: first.cell.map(|c| c.1),
                fraction: first.position as f64 / total,
                position: first.position,
                mape_mean,
                mape_std,
                union_ops: mean(runs.iter().map(|r| r[s][lane].union_ops as f64)),
            });
        }
    }
    Ok(SizeReport { rows })
}

// ---------------------------------------------------------------- Jaccard MAPE

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JaccardRow {
    pub config: String,
    pub phi: Option<f64>,
    pub k: Option<usize>,
    pub fraction: f64,
    pub position: usize,
    /// Pairs evaluated, summed over runs.
    pub pairs: usize,
    pub mae: f64,
    /// Percentage error over pairs whose exact similarity is positive.
    pub mape_mean: f64,
    pub mape_std: f64,
    /// Accepted over examined candidate pairs, averaged over runs.
    pub acceptance_rate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct JaccardReport {
    pub rows: Vec<JaccardRow>,
}

impl JaccardReport {
    pub fn baseline_final(&self) -> Option<&JaccardRow> {
        self.rows.iter().rev().find(|r| r.config == "baseline")
    }

    pub fn final_row(&self, phi: f64, k: usize) -> Option<&JaccardRow> {
        self.rows
            .iter()
            .rev()
            .find(|r| r.phi == Some(phi) && r.k == Some(k))
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&[
            "config",
            "phi",
            "k",
            "fraction",
            "position",
            "pairs",
            "mae",
            "mape_mean",
            "mape_std",
            "acceptance_rate",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.config.clone(),
                r.phi.map(fmt).unwrap_or_default(),
                r.k.map(|k| k.to_string()).unwrap_or_default(),
                fmt(r.fraction),
                r.position.to_string(),
                r.pairs.to_string(),
                fmt(r.mae),
                fmt(r.mape_mean),
                fmt(r.mape_std),
                fmt(r.acceptance_rate),
            ]);
        }
        t
    }
}

pub fn run_jaccard_mape(cfg: &ExperimentConfig) -> Result<JaccardReport, HarnessError> {
    cfg.validate()?;
    match cfg.store.kind() {
        StoreKind::Exact => jaccard_mape::<ExactBall>(cfg),
        StoreKind::MinHash => jaccard_mape::<MinHashSignature>(cfg),
        StoreKind::KmvMinHash => jaccard_mape::<KmvMinHash>(cfg),
        StoreKind::Kmv => Err(HarnessError::Config(
            "kmv stores cannot estimate similarity; use minhash or exact".into(),
        )),
    }
}

/// Pairs drawn uniformly from the top sample, kept when their exact
/// similarity on `g` reaches the floor. Returns the pairs and the acceptance
/// rate.
fn sample_pairs(
    g: &DynamicGraph,
    sample: &[VertexId],
    count: usize,
    floor: f64,
    seed: u64,
) -> (Vec<(VertexId, VertexId)>, f64) {
    let balls: Vec<HashSet<VertexId>> = sample.iter().map(|&v| exact_ball(g, v, 2)).collect();
    let mut candidates: Vec<(usize, usize)> = (0..sample.len())
        .flat_map(|i| (i + 1..sample.len()).map(move |j| (i, j)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seeds(seed, stream::SAMPLING, 1)[0]);
    candidates.shuffle(&mut rng);
    let mut pairs = Vec::with_capacity(count);
    let mut examined = 0usize;
    for (i, j) in candidates {
        if pairs.len() == count {
            break;
        }
        examined += 1;
        if exact_jaccard(&balls[i], &balls[j]) >= floor {
            pairs.push((sample[i], sample[j]));
        }
    }
    let rate = if examined == 0 {
        0.0
    } else {
        pairs.len() as f64 / examined as f64
    };
    (pairs, rate)
}

struct PairSnap {
    cell: Option<(f64, usize)>,
    position: usize,
    abs: Vec<f64>,
    apes: Vec<f64>,
}

fn jaccard_mape<B: Ball + JaccardEstimate>(
    cfg: &ExperimentConfig,
) -> Result<JaccardReport, HarnessError> {
    let src = load_source(cfg)?;
    let sample = top_sample(&src.graph, cfg.sample_top)?;
    let runs = cfg
        .run_seeds()
        .par_iter()
        .map(|&seed| -> Result<(Vec<Vec<PairSnap>>, f64), HarnessError> {
            let (pairs, rate) = sample_pairs(
                &src.graph,
                &sample,
                cfg.pair_count,
                cfg.similarity_floor,
                seed,
            );
            if pairs.is_empty() {
                return Err(HarnessError::SampleUnavailable(format!(
                    "no pair among the top {} vertices reaches similarity {}",
                    sample.len(),
                    cfg.similarity_floor
                )));
            }
            let spec = prepare_stream(cfg, &src, seed)?;
            let mut lanes = lanes::<B>(cfg, &spec.initial_graph(), seed)?;
            let mut done = 0;
            let mut snaps = Vec::new();
            for p in fraction_positions(spec.len(), &MAPE_FRACTIONS) {
                for (_, e) in lanes.iter_mut() {
                    advance(e, &spec.stream[done..p]);
                }
                done = p;
                let g = lanes[0].1.graph();
                let mut balls: HashMap<VertexId, HashSet<VertexId>> = HashMap::new();
                let truth: Vec<f64> = pairs
                    .iter()
                    .map(|&(u, v)| {
                        balls.entry(u).or_insert_with(|| exact_ball(g, u, 2));
                        balls.entry(v).or_insert_with(|| exact_ball(g, v, 2));
                        exact_jaccard(&balls[&u], &balls[&v])
                    })
                    .collect();
                let mut lane_snaps = Vec::new();
                for (cell, e) in &lanes {
                    let b2 = e.balls().1;
                    let mut abs = Vec::with_capacity(pairs.len());
                    let mut apes = Vec::new();
                    for (&(u, v), &t) in pairs.iter().zip(&truth) {
                        let est = b2[u.index()].estimate_jaccard(&b2[v.index()])?;
                        abs.push((est - t).abs());
                        if t > 0.0 {
                            apes.push((est - t).abs() / t);
                        }
                    }
                    lane_snaps.push(PairSnap {
                        cell: *cell,
                        position: p,
                        abs,
                        apes,
                    });
                }
                snaps.push(lane_snaps);
            }
            Ok((snaps, rate))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let acceptance_rate = mean(runs.iter().map(|r| r.1));
    let total = runs[0].0.last().map(|l| l[0].position.max(1)).unwrap_or(1) as f64;
    let snaps = runs.iter().map(|r| r.0.len()).min().unwrap_or(0);
    let mut rows = Vec::new();
    for lane in 0..cfg.grid().len() + 1 {
        for s in 0..snaps {
            let first = &runs[0].0[s][lane];
            let abs: Vec<f64> = runs
                .iter()
                .flat_map(|r| r.0[s][lane].abs.iter().copied())
                .collect();
            let apes: Vec<f64> = runs
                .iter()
                .flat_map(|r| r.0[s][lane].apes.iter().copied())
                .collect();
            let (mape_mean, mape_std) = mean_std(&apes);
            rows.push(JaccardRow {
                config: lane_label(first.cell),
                phi: first.cell.map(|c| c.0),
                k: first.cell.map(|c| c.1),
                fraction: first.position as f64 / total,
                position: first.position,
                pairs: abs.len(),
                mae: mean(abs.iter().copied()),
                mape_mean,
                mape_std,
                acceptance_rate,
            });
        }
    }
    Ok(JaccardReport { rows })
}

// ---------------------------------------------------------------- speedup

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpeedupRow {
    pub config: String,
    pub phi: Option<f64>,
    pub k: Option<usize>,
    /// Mean wall-clock seconds spent replaying the stream.
    pub time_s: f64,
    /// Baseline time over this configuration's time.
    pub speedup: f64,
    pub union_ops: f64,
    /// Baseline union operations over this configuration's.
    pub union_ratio: f64,
    pub per_insertion: f64,
    pub bound: Option<f64>,
    /// Whether every run stayed within the amortized bound.
    pub bound_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpeedupReport {
    pub stream_len: usize,
    pub rows: Vec<SpeedupRow>,
}

impl SpeedupReport {
    pub fn row(&self, phi: f64, k: usize) -> Option<&SpeedupRow> {
        self.rows
            .iter()
            .find(|r| r.phi == Some(phi) && r.k == Some(k))
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&[
            "config",
            "phi",
            "k",
            "time_s",
            "speedup",
            "union_ops",
            "union_ratio",
            "per_insertion",
            "bound",
            "bound_ok",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.config.clone(),
                r.phi.map(fmt).unwrap_or_default(),
                r.k.map(|k| k.to_string()).unwrap_or_default(),
                fmt(r.time_s),
                fmt(r.speedup),
                fmt(r.union_ops),
                fmt(r.union_ratio),
                fmt(r.per_insertion),
                r.bound.map(fmt).unwrap_or_default(),
                r.bound_ok.to_string(),
            ]);
        }
        t
    }
}

/// Replays one stream per run through the phi = 0, k = 0 baseline and each grid
/// point, timing only the insertions. Runs are sequential so timings do not
/// compete for cores.
pub fn run_speedup(cfg: &ExperimentConfig) -> Result<SpeedupReport, HarnessError> {
    cfg.validate()?;
    match cfg.store.kind() {
        StoreKind::Exact => speedup::<ExactBall>(cfg),
        StoreKind::Kmv => speedup::<KmvSketch>(cfg),
        StoreKind::MinHash => speedup::<MinHashSignature>(cfg),
        StoreKind::KmvMinHash => speedup::<KmvMinHash>(cfg),
    }
}

fn speedup<B: Ball>(cfg: &ExperimentConfig) -> Result<SpeedupReport, HarnessError> {
    let src = load_source(cfg)?;
    let cells: Vec<Option<(f64, usize)>> = std::iter::once(None)
        .chain(cfg.grid().into_iter().map(Some))
        .collect();
    let mut times = vec![Vec::new(); cells.len()];
    let mut ops = vec![Vec::new(); cells.len()];
    let mut per_ins = vec![Vec::new(); cells.len()];
    let mut ok = vec![true; cells.len()];
    let mut stream_len = 0;
    for seed in cfg.run_seeds() {
        let spec = prepare_stream(cfg, &src, seed)?;
        stream_len = spec.len();
        for (i, cell) in cells.iter().enumerate() {
            let (phi, k) = cell.unwrap_or((0.0, 0));
            let ecfg = cfg.engine_config(phi, k, seed);
            let mut e = Engine::<B>::new(spec.initial_graph(), ecfg.clone())?;
            let start = Instant::now();
            advance(&mut e, &spec.stream);
            times[i].push(start.elapsed().as_secs_f64());
            let cost = e.cost();
            ops[i].push(cost.union_ops as f64);
            per_ins[i].push(cost.per_insertion());
            ok[i] &= cell.is_none() || bound_holds(&ecfg, cost.union_ops, cost.insertions);
        }
    }
    let base_time = mean(times[0].iter().copied());
    let base_ops = mean(ops[0].iter().copied());
    let rows = cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            let time_s = mean(times[i].iter().copied());
            let union_ops = mean(ops[i].iter().copied());
            SpeedupRow {
                config: lane_label(*cell),
                phi: cell.map(|c| c.0),
                k: cell.map(|c| c.1),
                time_s,
                speedup: base_time / time_s,
                union_ops,
                union_ratio: base_ops / union_ops,
                per_insertion: mean(per_ins[i].iter().copied()),
                bound: cell
                    .filter(|c| c.0 > 0.0)
                    .map(|c| cfg.engine_config(c.0, c.1, 0).amortized_bound()),
                bound_ok: ok[i],
            }
        })
        .collect();
    Ok(SpeedupReport { stream_len, rows })
}

// ---------------------------------------------------------------- centrality

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CentralityRow {
    pub phi: f64,
    pub k: usize,
    pub snapshot: usize,
    pub position: usize,
    /// `spearman`, `kendall` or `recall`.
    pub metric: String,
    pub alpha: f64,
    /// Exact 2-truncated scores against exact scores.
    pub truncated: f64,
    /// Sketch-estimated truncated scores against exact scores.
    pub approx: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CentralityReport {
    pub rows: Vec<CentralityRow>,
    /// Whether the incrementally maintained top set matched a full sort at
    /// every snapshot of every run.
    pub tracker_consistent: bool,
}

impl CentralityReport {
    pub fn final_metric(
        &self,
        phi: f64,
        k: usize,
        metric: &str,
        alpha: f64,
    ) -> Option<&CentralityRow> {
        self.rows
            .iter()
            .rev()
            .find(|r| r.phi == phi && r.k == k && r.metric == metric && r.alpha == alpha)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&[
            "phi",
            "k",
            "snapshot",
            "position",
            "metric",
            "alpha",
            "truncated",
            "approx",
        ]);
        for r in &self.rows {
            t.push(vec![
                fmt(r.phi),
                r.k.to_string(),
                r.snapshot.to_string(),
                r.position.to_string(),
                r.metric.clone(),
                fmt(r.alpha),
                fmt(r.truncated),
                fmt(r.approx),
            ]);
        }
        t
    }
}

pub fn run_centrality(cfg: &ExperimentConfig) -> Result<CentralityReport, HarnessError> {
    cfg.validate()?;
    match cfg.store.kind() {
        StoreKind::Exact => centrality::<ExactBall>(cfg),
        StoreKind::Kmv => centrality::<KmvSketch>(cfg),
        StoreKind::KmvMinHash => centrality::<KmvMinHash>(cfg),
        StoreKind::MinHash => Err(HarnessError::Config(
            "centrality needs size estimates; use exact or kmv".into(),
        )),
    }
}

struct CentralitySnap {
    position: usize,
    // (metric, alpha, truncated, approx)
    values: Vec<(&'static str, f64, f64, f64)>,
    tracker_ok: bool,
}

fn centrality<B: Ball + SizeEstimate>(
    cfg: &ExperimentConfig,
) -> Result<CentralityReport, HarnessError> {
    let src = load_source(cfg)?;
    let mut rows = Vec::new();
    let mut consistent = true;
    for (phi, k) in cfg.grid() {
        let runs = cfg
            .run_seeds()
            .par_iter()
            .map(|&seed| centrality_run::<B>(cfg, &src, phi, k, seed))
            .collect::<Result<Vec<_>, _>>()?;
        let snaps = runs.iter().map(Vec::len).min().unwrap_or(0);
        for s in 0..snaps {
            consistent &= runs.iter().all(|r| r[s].tracker_ok);
            for (m, &(metric, alpha, _, _)) in runs[0][s].values.iter().enumerate() {
                rows.push(CentralityRow {
                    phi,
                    k,
                    snapshot: s + 1,
                    position: runs[0][s].position,
                    metric: metric.to_string(),
                    alpha,
                    truncated: mean(runs.iter().map(|r| r[s].values[m].2)),
                    approx: mean(runs.iter().map(|r| r[s].values[m].3)),
                });
            }
        }
    }
    Ok(CentralityReport {
        rows,
        tracker_consistent: consistent,
    })
}

fn centrality_run<B: Ball + SizeEstimate>(
    cfg: &ExperimentConfig,
    src: &SourceGraph,
    phi: f64,
    k: usize,
    seed: u64,
) -> Result<Vec<CentralitySnap>, HarnessError> {
    let spec = prepare_stream(cfg, src, seed)?;
    let mut engine = Engine::<B>::new(spec.initial_graph(), cfg.engine_config(phi, k, seed))?;
    let n = engine.vertex_count();
    let max_alpha = RECALL_ALPHAS.iter().copied().fold(0.0, f64::max);
    let h = (max_alpha * n as f64).ceil() as usize;
    let mut tracker = TopHTracker::from_scores(h, &harmonic_approx(&engine).scores);
    let mut out = Vec::new();
    let mut done = 0;
    for p in snapshot_positions(spec.len(), cfg.snapshots) {
        for &(u, v) in &spec.stream[done..p] {
            engine.insert(u, v);
            for &t in engine.touched() {
                tracker.update(t, vertex_approx(&engine, t));
            }
        }
        done = p;
        let hc = harmonic_exact(engine.graph());
        let hc2 = harmonic_truncated(engine.graph());
        let apx = harmonic_approx(&engine);
        let tracked = tracker.members();
        let mut values = Vec::new();
        for alpha in CORRELATION_ALPHAS {
            let ((s2, k2), (sa, ka)) = if (alpha * n as f64).ceil() >= 2.0 {
                (
                    correlation_on_top(&hc, &hc2, alpha),
                    correlation_on_top(&hc, &apx, alpha),
                )
            } else {
                ((f64::NAN, f64::NAN), (f64::NAN, f64::NAN))
            };
            values.push(("spearman", alpha, s2, sa));
            values.push(("kendall", alpha, k2, ka));
        }
        for alpha in RECALL_ALPHAS {
            let truth = hc.top_fraction(alpha);
            if truth.is_empty() {
                values.push(("recall", alpha, f64::NAN, f64::NAN));
                continue;
            }
            let trunc = hc2.top(truth.len());
            let approx = &tracked[..truth.len().min(tracked.len())];
            values.push((
                "recall",
                alpha,
                recall_at(&truth, &trunc),
                recall_at(&truth, approx),
            ));
        }
        out.push(CentralitySnap {
            position: p,
            values,
            tracker_ok: tracked == apx.top(h),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------- adversarial

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdversarialRow {
    pub phi: f64,
    pub k: usize,
    /// Mean final coverage of `S0` under the adversarial order.
    pub adversarial_coverage: f64,
    /// Same under a uniform permutation of the final edge set from an empty graph.
    pub random_coverage: f64,
    pub adversarial_union_ops: f64,
    pub random_union_ops: f64,
    pub adversarial_len: usize,
    pub random_len: usize,
    pub bound: Option<f64>,
    pub bound_ok: bool,
    /// Whether every `S0` vertex ended with an exact 2-ball of the predicted size.
    pub ball_sizes_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdversarialReport {
    pub delta: usize,
    pub rho: usize,
    pub s0_ball: usize,
    pub rows: Vec<AdversarialRow>,
}

impl AdversarialReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&[
            "delta",
            "rho",
            "phi",
            "k",
            "adversarial_coverage",
            "random_coverage",
            "adversarial_union_ops",
            "random_union_ops",
            "adversarial_len",
            "random_len",
            "bound",
            "bound_ok",
            "s0_ball",
            "ball_sizes_ok",
        ]);
        for r in &self.rows {
            t.push(vec![
                self.delta.to_string(),
                self.rho.to_string(),
                fmt(r.phi),
                r.k.to_string(),
                fmt(r.adversarial_coverage),
                fmt(r.random_coverage),
                fmt(r.adversarial_union_ops),
                fmt(r.random_union_ops),
                r.adversarial_len.to_string(),
                r.random_len.to_string(),
                r.bound.map(fmt).unwrap_or_default(),
                r.bound_ok.to_string(),
                self.s0_ball.to_string(),
                r.ball_sizes_ok.to_string(),
            ]);
        }
        t
    }
}

struct AdversarialRun {
    adv_cov: f64,
    rnd_cov: f64,
    adv_ops: u64,
    rnd_ops: u64,
    bound_ok: bool,
    sizes_ok: bool,
}

/// Coverage of `S0` on the lower-bound instance against a random order of the
/// same edges. Uses exact stores; the graph source in `cfg` is ignored.
pub fn run_adversarial(cfg: &ExperimentConfig) -> Result<AdversarialReport, HarnessError> {
    cfg.validate()?;
    if cfg.store.kind() != StoreKind::Exact {
        return Err(HarnessError::Config(
            "the adversarial experiment measures coverage and needs the exact store".into(),
        ));
    }
    let aspec = AdversarialSpec::new(cfg.delta, cfg.rho);
    let adv = gen_adversarial(aspec)?;
    let fin = adv.final_graph();
    let s0: Vec<VertexId> = aspec.s0().collect();
    let s0_cov = |e: &Engine<ExactBall>, oracle: &mut BallOracle| {
        let mut sizes_ok = true;
        let cov = mean(s0.iter().map(|&u| {
            let truth = oracle.ball_size(e.graph(), u, 2);
            sizes_ok &= truth == aspec.final_s0_ball();
            e.balls().1[u.index()].len() as f64 / truth as f64
        }));
        (cov, sizes_ok)
    };
    let random_len = fin.edge_count();
    let mut rows = Vec::new();
    for (phi, k) in cfg.grid() {
        let runs = cfg
            .run_seeds()
            .par_iter()
            .map(|&seed| -> Result<AdversarialRun, HarnessError> {
                let ecfg = cfg.engine_config(phi, k, seed).directed(false);
                let mut oracle = BallOracle::new();
                let mut a = Engine::<ExactBall>::new(adv.initial_graph(), ecfg.clone())?;
                advance(&mut a, &adv.stream);
                let (adv_cov, sizes_ok) = s0_cov(&a, &mut oracle);
                let rnd_spec = gen_random_permutation(&fin, seed, 0.0)?;
                let mut r = Engine::<ExactBall>::new(rnd_spec.initial_graph(), ecfg.clone())?;
                advance(&mut r, &rnd_spec.stream);
                let (rnd_cov, _) = s0_cov(&r, &mut oracle);
                let (ac, rc) = (a.cost(), r.cost());
                Ok(AdversarialRun {
                    adv_cov,
                    rnd_cov,
                    adv_ops: ac.union_ops,
                    rnd_ops: rc.union_ops,
                    bound_ok: bound_holds(&ecfg, ac.union_ops, ac.insertions)
                        && bound_holds(&ecfg, rc.union_ops, rc.insertions),
                    sizes_ok,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let bound = (phi > 0.0).then(|| EngineConfig::new(phi, k).amortized_bound());
        rows.push(AdversarialRow {
            phi,
            k,
            adversarial_coverage: mean(runs.iter().map(|r| r.adv_cov)),
            random_coverage: mean(runs.iter().map(|r| r.rnd_cov)),
            adversarial_union_ops: mean(runs.iter().map(|r| r.adv_ops as f64)),
            random_union_ops: mean(runs.iter().map(|r| r.rnd_ops as f64)),
            adversarial_len: adv.len(),
            random_len,
            bound,
            bound_ok: runs.iter().all(|r| r.bound_ok),
            ball_sizes_ok: runs.iter().all(|r| r.sizes_ok),
        });
    }
    Ok(AdversarialReport {
        delta: aspec.delta,
        rho: aspec.rho,
        s0_ball: aspec.final_s0_ball(),
        rows,
    })
}

// ---------------------------------------------------------------- gamma check

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaReport {
    pub vertices: usize,
    pub edges: usize,
    pub gamma_min: usize,
    pub girth_class: GirthClass,
    pub witness: Option<(VertexId, VertexId, VertexId)>,
    pub epsilon: f64,
    /// `ceil(4 (gamma + 1) / epsilon)`.
    pub k: usize,
    /// `1 - epsilon`.
    pub target: f64,
    pub mean_coverage: f64,
    pub coverage_std: f64,
    pub per_seed: Vec<f64>,
}

impl GammaReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&[
            "vertices",
            "edges",
            "gamma_min",
            "girth_class",
            "witness",
            "epsilon",
            "k",
            "target",
            "mean_coverage",
            "coverage_std",
        ]);
        t.push(vec![
            self.vertices.to_string(),
            self.edges.to_string(),
            self.gamma_min.to_string(),
            self.girth_class.to_string(),
            self.witness
                .map(|(a, b, c)| format!("{a} {b} {c}"))
                .unwrap_or_default(),
            fmt(self.epsilon),
            self.k.to_string(),
            fmt(self.target),
            fmt(self.mean_coverage),
            fmt(self.coverage_std),
        ]);
        t
    }
}

/// Measures local sparsity, then runs the lazy engine with `phi = 1` and the
/// matching `k` over the configured order, reporting mean coverage over all
/// vertices. Ignores the `phi`, `k` and store settings of `cfg`.
pub fn check_gamma(cfg: &ExperimentConfig) -> Result<GammaReport, HarnessError> {
    cfg.validate()?;
    let src = load_source(cfg)?;
    let report = gamma_sparsity(&src.graph)?;
    let k = (4.0 * (report.gamma_min as f64 + 1.0) / cfg.epsilon).ceil() as usize;
    let per_seed = cfg
        .run_seeds()
        .par_iter()
        .map(|&seed| -> Result<f64, HarnessError> {
            let spec = prepare_stream(cfg, &src, seed)?;
            let ecfg = EngineConfig::new(1.0, k).with_seed(seed);
            let mut e = Engine::<ExactBall>::new(spec.initial_graph(), ecfg)?;
            advance(&mut e, &spec.stream);
            let mut oracle = BallOracle::new();
            let g = e.graph();
            Ok(mean(g.vertices().map(|v| {
                e.balls().1[v.index()].len() as f64 / oracle.ball_size(g, v, 2) as f64
            })))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (mean_coverage, coverage_std) = mean_std(&per_seed);
    Ok(GammaReport {
        vertices: src.graph.vertex_count(),
        edges: src.graph.edge_count(),
        gamma_min: report.gamma_min,
        girth_class: report.girth_class,
        witness: report.witness,
        epsilon: cfg.epsilon,
        k,
        target: 1.0 - cfg.epsilon,
        mean_coverage,
        coverage_std,
        per_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{GraphSource, NamedGraph, StreamOrder};
    use crate::sketch::StoreSpec;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            source: GraphSource::Er { n: 120, m: 500 },
            seeds: 3,
            snapshots: 4,
            sample_top: 10,
            pair_count: 10,
            similarity_floor: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn phi_zero_covers_everything() {
        let cfg = ExperimentConfig {
            phi: vec![0.0, 1.0],
            k: vec![0],
            ..small()
        };
        let r = run_coverage(&cfg).unwrap();
        assert_eq!(r.rows.len(), 8);
        for row in r.rows.iter().filter(|r| r.phi == 0.0) {
            assert_eq!(row.coverage, 1.0);
            assert_eq!(row.mape_mean, 0.0);
        }
        assert_eq!(r.final_row(1.0, 0).unwrap().theory, 0.5);
        assert!(r.rows.iter().all(|r| (0.0..=1.0).contains(&r.coverage)));
        let again = run_coverage(&cfg).unwrap();
        assert_eq!(r.to_table(), again.to_table());
    }

    #[test]
    fn coverage_rejects_sketches() {
        let cfg = ExperimentConfig {
            store: StoreSpec::kmv(),
            ..small()
        };
        assert!(matches!(run_coverage(&cfg), Err(HarnessError::Config(_))));
    }

    #[test]
    fn exact_size_mape_matches_coverage_loss() {
        let cfg = ExperimentConfig {
            phi: vec![0.5],
            k: vec![0],
            ..small()
        };
        let r = run_size_mape(&cfg).unwrap();
        let base = r.baseline_final().unwrap();
        assert_eq!(base.mape_mean, 0.0);
        assert_eq!(base.fraction, 1.0);
        let cov = run_coverage(&ExperimentConfig {
            snapshots: 1,
            ..cfg.clone()
        })
        .unwrap();
        let lazy = r.final_row(0.5, 0).unwrap();
        let c = cov.final_row(0.5, 0).unwrap();
        assert!((lazy.mape_mean - c.mape_mean).abs() < 1e-12);
    }

    #[test]
    fn jaccard_with_exact_store_is_exact() {
        let r = run_jaccard_mape(&small()).unwrap();
        let b = r.baseline_final().unwrap();
        assert_eq!(b.mae, 0.0);
        assert_eq!(b.pairs, 30);
        assert_eq!(b.acceptance_rate, 1.0);
        let tight = ExperimentConfig {
            similarity_floor: 1.0,
            ..small()
        };
        assert!(matches!(
            run_jaccard_mape(&tight),
            Err(HarnessError::SampleUnavailable(_))
        ));
    }

    #[test]
    fn speedup_counts_operations() {
        let cfg = ExperimentConfig {
            phi: vec![0.0, 1.0],
            k: vec![0],
            store: StoreSpec::kmv(),
            seeds: 2,
            ..small()
        };
        let r = run_speedup(&cfg).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows.iter().all(|r| r.bound_ok));
        assert!(r.row(1.0, 0).unwrap().union_ratio > 1.0);
        assert_eq!(r.rows[0].union_ratio, 1.0);
    }

    #[test]
    fn centrality_on_exact_baseline_engine() {
        let cfg = ExperimentConfig {
            phi: vec![0.0],
            k: vec![0],
            snapshots: 2,
            ..small()
        };
        let r = run_centrality(&cfg).unwrap();
        assert!(r.tracker_consistent);
        for row in &r.rows {
            assert!(row.truncated == row.approx || (row.truncated.is_nan() && row.approx.is_nan()));
        }
        let complete = ExperimentConfig {
            source: GraphSource::Named {
                graph: NamedGraph::Complete { n: 30 },
            },
            ..cfg
        };
        let r = run_centrality(&complete).unwrap();
        assert_eq!(
            r.final_metric(0.0, 0, "recall", 0.1).unwrap().truncated,
            1.0
        );
    }

    #[test]
    fn adversarial_small_instance() {
        let cfg = ExperimentConfig {
            delta: 8,
            rho: 2,
            phi: vec![1.0],
            k: vec![0],
            ..small()
        };
        let r = run_adversarial(&cfg).unwrap();
        let row = &r.rows[0];
        assert!(row.ball_sizes_ok && row.bound_ok);
        assert_eq!(r.s0_ball, 16 + 32);
        // No S1 vertex ever flushes: S0 keeps exactly its initial 2-ball.
        assert!((row.adversarial_coverage - 16.0 / 48.0).abs() < 1e-12);
        assert!(row.random_coverage > row.adversarial_coverage);
    }

    #[test]
    fn gamma_on_named_graphs() {
        let cfg = ExperimentConfig {
            source: GraphSource::Named {
                graph: NamedGraph::Petersen,
            },
            order: StreamOrder::Sorted,
            init_fraction: 0.0,
            ..small()
        };
        let r = check_gamma(&cfg).unwrap();
        assert_eq!((r.gamma_min, r.k), (0, 8));
        assert_eq!(r.girth_class, GirthClass::AtLeastFive);
        assert_eq!(r.mean_coverage, 1.0);
        let k3 = ExperimentConfig {
            source: GraphSource::Named {
                graph: NamedGraph::Complete { n: 3 },
            },
            ..cfg
        };
        let r = check_gamma(&k3).unwrap();
        assert_eq!((r.gamma_min, r.k), (1, 16));
    }
}
