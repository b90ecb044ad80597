//! Ground-truth instance generation.

mod edgelist;
mod foreground;
mod lfr;
mod sbm;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use edgelist::{load_edgelist, parse_edgelist, TargetSpec};
pub use foreground::{implant_foreground, set_distance, ForegroundParams};
pub use lfr::{fit_tail_exponent, gen_lfr, gen_lfr_with_report, LfrParams, LfrReport};
pub use sbm::{gen_sbm, SbmParams};

use crate::error::{Error, Result};
use crate::graph::GroundTruth;
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum BackgroundSpec {
    Sbm(SbmParams),
    Lfr(LfrParams),
    EdgeList { path: PathBuf },
}

/// A background model plus the foreground implanted into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub background: BackgroundSpec,
    pub foreground: ForegroundParams,
}

impl InstanceSpec {
    /// Draws one instance. Background and foreground use independent streams
    /// derived from `seed`.
    pub fn generate(&self, seed: u64) -> Result<GroundTruth> {
        let bg_seed = seeds::derive(seed, 0);
        let fg_seed = seeds::derive(seed, 1);
        match &self.background {
            BackgroundSpec::Sbm(p) => implant_foreground(&gen_sbm(p, bg_seed)?, &self.foreground, fg_seed),
            BackgroundSpec::Lfr(p) => implant_foreground(&gen_lfr(p, bg_seed)?, &self.foreground, fg_seed),
            BackgroundSpec::EdgeList { path } => load_edgelist(
                path,
                &TargetSpec::Implant {
                    foreground: self.foreground.clone(),
                    rng_seed: fg_seed,
                },
            ),
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        presets::by_name(name)
    }
}

/// Named instance families.
pub mod presets {
    use super::*;

    pub const NAMES: &[&str] = &[
        "two-clique",
        "two-dense",
        "nac-small",
        "trivial-clique",
        "lfr-generalization",
    ];

    pub fn by_name(name: &str) -> Result<InstanceSpec> {
        Ok(match name {
            "two-clique" => two_clique(),
            "two-dense" => two_dense(),
            "nac-small" => nac_small(),
            "trivial-clique" => trivial_clique(),
            "lfr-generalization" => lfr_generalization(),
            other => {
                return Err(Error::Config(format!(
                    "unknown preset {other:?} (known: {})",
                    NAMES.join(", ")
                )))
            }
        })
    }

    /// Two 40-cliques two hops apart in a sparse four-block SBM. From a seed
    /// inside one clique the minimal collection takes 39 + 2 + 40 = 81 probes.
    pub fn two_clique() -> InstanceSpec {
        InstanceSpec {
            background: BackgroundSpec::Sbm(SbmParams {
                n: 2000,
                p: vec![0.006; 4],
                r: 0.0005,
            }),
            foreground: ForegroundParams { size: 40, count: 2, p: 1.0, min_gap: 2, max_gap: 2 },
        }
    }

    /// Two ER(40, 0.2) anomalies in a background of density 0.05.
    pub fn two_dense() -> InstanceSpec {
        InstanceSpec {
            background: BackgroundSpec::Sbm(SbmParams { n: 2000, p: vec![0.05], r: 0.0 }),
            foreground: ForegroundParams { size: 40, count: 2, p: 0.2, min_gap: 1, max_gap: 2 },
        }
    }

    /// Desk-scale training/evaluation family: two 20-cliques two hops apart
    /// in an 800-node two-block SBM.
    pub fn nac_small() -> InstanceSpec {
        InstanceSpec {
            background: BackgroundSpec::Sbm(SbmParams {
                n: 800,
                p: vec![0.012, 0.012],
                r: 0.001,
            }),
            foreground: ForegroundParams { size: 20, count: 2, p: 1.0, min_gap: 2, max_gap: 2 },
        }
    }

    /// A single 10-clique in a small sparse background.
    pub fn trivial_clique() -> InstanceSpec {
        InstanceSpec {
            background: BackgroundSpec::Sbm(SbmParams { n: 200, p: vec![0.02], r: 0.0 }),
            foreground: ForegroundParams { size: 10, count: 1, p: 1.0, min_gap: 0, max_gap: 0 },
        }
    }

    /// LFR background for generalization runs (no pass/fail gate).
    pub fn lfr_generalization() -> InstanceSpec {
        InstanceSpec {
            background: BackgroundSpec::Lfr(LfrParams {
                n: 2000,
                tau1: 2.5,
                tau2: 1.5,
                mu: 0.2,
                avg_degree: 16.0,
                max_degree: 128,
                min_community: 200,
                max_community: 500,
            }),
            foreground: ForegroundParams { size: 40, count: 2, p: 1.0, min_gap: 1, max_gap: 2 },
        }
    }

    pub const EMBED_GRID_R: [f64; 5] = [0.01, 0.025, 0.05, 0.075, 0.1];
    pub const EMBED_GRID_PT: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
    pub const EMBED_GRID_INSTANCES: usize = 10;

    /// One cell of the embedding benchmark grid: two equal communities with
    /// intra-probability 0.25 over 2000 nodes, cross-probability `r`, and two
    /// ER(40, `p_t`) anomalies.
    ///
    /// At these densities every node lies within two hops of a 40-node set,
    /// so the anomalies are placed at gap 1 (one intermediate node).
    pub fn embed_grid_cell(r: f64, p_t: f64) -> InstanceSpec {
        InstanceSpec {
            background: BackgroundSpec::Sbm(SbmParams { n: 2000, p: vec![0.25, 0.25], r }),
            foreground: ForegroundParams { size: 40, count: 2, p: p_t, min_gap: 1, max_gap: 1 },
        }
    }

    /// Every `(r, p_t, instance index)` of the grid, row-major in `r`.
    pub fn embed_grid() -> Vec<(f64, f64, usize)> {
        let mut out = Vec::new();
        for &r in &EMBED_GRID_R {
            for &pt in &EMBED_GRID_PT {
                for i in 0..EMBED_GRID_INSTANCES {
                    out.push((r, pt, i));
                }
            }
        }
        out
    }
}
