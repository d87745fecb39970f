use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lazyball::harness::{
    self, write_edge_list, write_sidecar, ExperimentConfig, GraphSource, GraphSummary,
    HarnessError, NamedGraph, StreamOrder, Table,
};
use lazyball::sketch::StoreSpec;

#[derive(Parser, Debug)]
#[command(
    name = "lazyball",
    version,
    about = "Approximate 2-hop neighborhoods under edge insertions: experiment driver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean coverage of the largest 2-balls at equally spaced snapshots (exact store).
    Coverage(Common),
    /// Ball-size estimation error against BFS at 50/75/100% of the stream.
    SizeMape(Common),
    /// Similarity estimation error on sampled high-similarity pairs.
    JaccardMape(Common),
    /// Update time and union operations against the non-lazy baseline.
    Speedup(Common),
    /// Rank agreement and top-set recall of truncated harmonic centrality.
    Centrality(Common),
    /// Lower-bound instance against a random order of the same edges.
    Adversarial(Common),
    /// Local sparsity, girth class and coverage with the matching k.
    GammaCheck(Common),
    /// Emit the selected graph as an edge list.
    Gen(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Edge list with one `u v [timestamp]` per line.
    #[arg(long, value_name = "PATH", group = "source")]
    input: Option<PathBuf>,
    /// Uniform random graph with n vertices and m edges.
    #[arg(long, value_name = "n,m", group = "source")]
    er: Option<String>,
    /// Preferential attachment: n vertices, m0-clique seed, edges per step.
    #[arg(long, value_name = "n,m0,epc", group = "source")]
    ba: Option<String>,
    /// Named graph: petersen, cycle:N, complete:N or bipartite:L,R,M.
    #[arg(long, value_name = "NAME", group = "source")]
    graph: Option<String>,
    /// Threshold; a comma-separated list runs a grid.
    #[arg(long, default_value = "0.25")]
    phi: String,
    /// Random light updates per insertion; comma-separated for a grid.
    #[arg(long, default_value = "2")]
    k: String,
    /// exact, kmv:S, minhash:H or kmv:S+minhash:H.
    #[arg(long, default_value = "exact")]
    store: String,
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    #[arg(long = "init-frac", default_value_t = 0.2)]
    init_frac: f64,
    #[arg(long, default_value_t = 20)]
    snapshots: usize,
    #[arg(long = "sample-top", default_value_t = 50)]
    sample_top: usize,
    #[arg(long = "pair-count", default_value_t = 200)]
    pair_count: usize,
    /// Minimum exact similarity of sampled pairs.
    #[arg(long, default_value_t = 0.2)]
    floor: f64,
    /// Target loss for gamma-check; k = ceil(4 (gamma + 1) / epsilon).
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Side size of the adversarial instance.
    #[arg(long, default_value_t = 64)]
    delta: usize,
    /// Ratio parameter of the adversarial instance.
    #[arg(long, default_value_t = 2)]
    rho: usize,
    /// random, trace or sorted (gamma-check defaults to sorted).
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    directed: bool,
    /// CSV destination; a JSON sidecar is written beside it. Defaults to stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn numbers<T: std::str::FromStr>(flag: &str, s: &str) -> Result<Vec<T>, HarnessError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| config_err(format!("--{flag}: cannot parse `{p}`")))
        })
        .collect()
}

impl Common {
    fn config(&self, default_order: StreamOrder) -> Result<ExperimentConfig, HarnessError> {
        let source = if let Some(path) = &self.input {
            GraphSource::File { path: path.clone() }
        } else if let Some(s) = &self.er {
            match numbers::<usize>("er", s)?.as_slice() {
                &[n, m] => GraphSource::Er { n, m },
                _ => return Err(config_err("--er expects n,m")),
            }
        } else if let Some(s) = &self.ba {
            match numbers::<usize>("ba", s)?.as_slice() {
                &[n, m0, epc] => GraphSource::Ba {
                    n,
                    m0,
                    edges_per_step: epc,
                },
                _ => return Err(config_err("--ba expects n,m0,epc")),
            }
        } else if let Some(s) = &self.graph {
            GraphSource::Named {
                graph: s.parse::<NamedGraph>()?,
            }
        } else {
            ExperimentConfig::default().source
        };
        let cfg = ExperimentConfig {
            source,
            directed: self.directed,
            order: match &self.order {
                Some(o) => o.parse()?,
                None => default_order,
            },
            phi: numbers("phi", &self.phi)?,
            k: numbers("k", &self.k)?,
            store: self.store.parse::<StoreSpec>()?,
            seeds: self.seeds,
            seed: self.seed,
            init_fraction: self.init_frac,
            snapshots: self.snapshots,
            sample_top: self.sample_top,
            pair_count: self.pair_count,
            similarity_floor: self.floor,
            epsilon: self.epsilon,
            delta: self.delta,
            rho: self.rho,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(
    table: Table,
    out: Option<&Path>,
    sidecar: impl FnOnce(&Path) -> Result<PathBuf, HarnessError>,
) -> Result<(), HarnessError> {
    match out {
        Some(path) => {
            table.write_csv(path)?;
            let side = sidecar(path)?;
            eprintln!("wrote {} and {}", path.display(), side.display());
        }
        None => print!("{}", table.to_csv_string()),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let (name, common) = match &cli.command {
        Command::Coverage(c) => ("coverage", c),
        Command::SizeMape(c) => ("size-mape", c),
        Command::JaccardMape(c) => ("jaccard-mape", c),
        Command::Speedup(c) => ("speedup", c),
        Command::Centrality(c) => ("centrality", c),
        Command::Adversarial(c) => ("adversarial", c),
        Command::GammaCheck(c) => ("gamma-check", c),
        Command::Gen(c) => ("gen", c),
    };
    let default_order = match cli.command {
        Command::GammaCheck(_) => StreamOrder::Sorted,
        _ => StreamOrder::Random,
    };
    let cfg = common.config(default_order)?;
    let out = common.out.as_deref();
    match cli.command {
        Command::Coverage(_) => {
            let r = harness::run_coverage(&cfg)?;
            emit(r.to_table(), out, |p| write_sidecar(p, name, &cfg, &r))
        }
        Command::SizeMape(_) => {
            let r = harness::run_size_mape(&cfg)?;
            emit(r.to_table(), out, |p| write_sidecar(p, name, &cfg, &r))
        }
        Command::JaccardMape(_) => {
            let r = harness::run_jaccard_mape(&cfg)?;
            emit(r.to_table(), out, |p| write_sidecar(p, name, &cfg, &r))
        }
        Command::Speedup(_) => {
            let r = harness::run_speedup(&cfg)?;
            emit(r.to_table(), out, |p| write_sidecar(p, name, &cfg, &r))
        }
        Command::Centrality(_) => {
            let r = harness::run_centrality(&cfg)?;
            emit(r.to_table(), out, |p| write_sidecar(p, name, &cfg, &r))
        }
        Command::Adversarial(_) => {
            let r = harness::run_adversarial(&cfg)?;
            emit(r.to_table(), out, |p| write_sidecar(p, name, &cfg, &r))
        }
        Command::GammaCheck(_) => {
            let r = harness::check_gamma(&cfg)?;
            emit(r.to_table(), out, |p| write_sidecar(p, name, &cfg, &r))
        }
        Command::Gen(_) => {
            let src = harness::load_source(&cfg)?;
            let summary = GraphSummary::of(&src.graph);
            match out {
                Some(path) => {
                    write_edge_list(&src.graph, path)?;
                    let side = write_sidecar(path, name, &cfg, &summary)?;
                    eprintln!("wrote {} and {}", path.display(), side.display());
                }
                None => {
                    for (u, v) in src.graph.edges() {
                        println!("{u} {v}");
                    }
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
