//! Selective harvesting on incomplete networks: the probing environment,
//! synthetic and file-based instance generation, seed-centric node rankings
//! with state compression, heuristic discovery policies, and the embedding
//! evaluation metrics.

pub mod baselines;
pub mod embeddings;
pub mod env;
pub mod error;
pub mod generators;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod seeds;

pub use env::{discounted_return, EpisodeConfig, ObservedState, Reward, TraceRecord};
pub use error::{Error, Result};
pub use graph::{Graph, GroundTruth};
