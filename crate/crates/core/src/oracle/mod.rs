//! Ground truth for tests and experiments: BFS balls, structural checks and
//! stream generators.

mod ball;
pub mod generators;
mod sparsity;

use thiserror::Error;

pub use ball::{coverage, exact_ball, exact_jaccard2, BallOracle};
pub use generators::{
    gen_adversarial, gen_ba, gen_er, gen_random_permutation, sorted_order, AdversarialSpec, Edge,
    StreamSpec,
};
pub use sparsity::{
    gamma_sparsity, girth_class, has_four_cycle, has_triangle, GirthClass, SparsityReport,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("operation is only defined for undirected graphs")]
    Directed,
    #[error("{0}")]
    InvalidParameters(String),
}
