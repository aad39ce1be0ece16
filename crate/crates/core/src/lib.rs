//! Stochastic block models with degree correction, directed and oriented
//! variants, degree-generated priors, inference, synthetic benchmarks and
//! word-adjacency corpus ingestion.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod graph;
pub mod inference;
pub mod io;
pub mod likelihood;
pub mod metrics;
pub mod objective;
pub mod partition;
pub mod priors;
pub mod stats;
pub mod sweep;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{ComponentMode, Degrees, Edge, Graph};
pub use inference::{run_inference, Init, InferenceConfig, InferenceResult};
pub use likelihood::{Family, ModelSpec};
pub use objective::{objective, ObjectiveState};
pub use partition::Partition;
pub use priors::PriorConfig;
pub use stats::BlockStats;
