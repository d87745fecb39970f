//! Incremental maintenance of approximate 2-hop neighborhoods under edge
//! insertions, with exact and sketched ball stores.

pub mod centrality;
pub mod engine;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod sketch;

pub use engine::{CostAccounting, Engine, EngineConfig, EngineError, InsertReport};
pub use graph::{DynamicGraph, InsertOutcome, VertexId};
