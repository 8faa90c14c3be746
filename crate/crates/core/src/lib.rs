//! Link prediction on directed graphs by exhaustive local similarity
//! scoring, with exact precision-recall evaluation.
//!
//! The pipeline is: [`graph::load_edge_list`] → [`eval::split_edges`] →
//! [`engine::score_all`] → [`eval::build_curves`]. [`oracle`] holds a
//! brute-force reference used to check the engine on small graphs.

pub mod engine;
pub mod eval;
pub mod graph;
pub mod oracle;
pub mod scores;

pub use engine::{score_all, score_all_multi, EdgeSet, EngineConfig, ThresholdHistogram};
pub use eval::{build_curves, split_edges, EdgeSplit, EvaluationReport};
pub use graph::{load_edge_list, EdgeListFormat, Graph, VertexId};
pub use scores::{LogBase, ScoreKind, ScoreSpec};
