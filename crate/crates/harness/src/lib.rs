//! Experiment orchestration for selective harvesting: configuration,
//! instance generation, offline training, agent evaluation and the
//! embedding benchmark, all writing plot-ready CSVs.

pub mod bench;
pub mod config;
pub mod experiment;
pub mod output;

pub use bench::{bench_report, embedbench, run_embedbench, BenchRun};
pub use config::{AgentKind, Config};
pub use experiment::{evaluate, generate, report, train};

use harvest_core::Error;

/// Process exit status for each error class.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::Parse { .. } => 3,
        Error::Io { .. } => 4,
        Error::Convergence { .. } | Error::Numerical(_) => 5,
        Error::Unreachable(_) => 6,
        Error::Contract(_) | Error::InvalidAction { .. } | Error::EpisodeOver { .. } => 7,
        Error::Generation(_) => 8,
    }
}
