//! Seed-centric rankings of the observed graph, and the reorder-and-truncate
//! compression that turns a ranking into a fixed-size agent input.
//!
//! Every ranker sees only an [`ObservedState`]: the known edges and the labels
//! of probed nodes. Targets used as anchors are always the probed targets.
//! All observed nodes are ranked, probed ones included; restricting choices to
//! the boundary is the job of the action mask in [`RankedState`].

mod compress;
mod modrank;
mod node2vec;
mod ppr;
mod spectral;

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use compress::{compress, RankedState, LABEL_BACKGROUND, LABEL_TARGET, LABEL_UNKNOWN};
pub use modrank::rank_mod;
pub use node2vec::{node2vec_embedding, rank_node2vec, random_walks};
pub use ppr::{personalized_pagerank, personalized_pagerank_of, rank_ppr, PprRun};
pub use spectral::{
    adjacency_embedding, adjacency_spectrum, laplacian_embedding, laplacian_spectrum, rank_eigenmap,
    rank_glee, rank_pca, LaplacianEnd, SpectralEmbedding,
};

use crate::env::ObservedState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ppr,
    Mod,
    Pca,
    Eigenmap,
    Glee,
    Node2vec,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Ppr,
        Algorithm::Mod,
        Algorithm::Glee,
        Algorithm::Eigenmap,
        Algorithm::Pca,
        Algorithm::Node2vec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ppr => "ppr",
            Algorithm::Mod => "mod",
            Algorithm::Pca => "pca",
            Algorithm::Eigenmap => "eigenmap",
            Algorithm::Glee => "glee",
            Algorithm::Node2vec => "node2vec",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown embedding {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedConfig {
    pub algorithm: Algorithm,
    /// PPR damping: probability of following an edge rather than teleporting.
    pub alpha: f64,
    pub dim: usize,
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub window: usize,
    pub negative: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// node2vec return and in-out parameters.
    pub p: f64,
    pub q: f64,
    pub ppr_tolerance: f64,
    pub eigen_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            algorithm: Algorithm::Ppr,
            alpha: 0.8,
            dim: 64,
            walks_per_node: 5,
            walk_length: 40,
            window: 5,
            negative: 5,
            epochs: 5,
            learning_rate: 0.025,
            p: 1.0,
            q: 1.0,
            ppr_tolerance: 1e-10,
            eigen_tolerance: 1e-8,
            max_iterations: 10_000,
        }
    }
}

impl EmbedConfig {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        EmbedConfig {
            algorithm,
            ..EmbedConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.dim == 0 {
            return Err(Error::Config("embedding dimension must be >= 1".into()));
        }
        if self.algorithm == Algorithm::Node2vec
            && (self.walks_per_node == 0 || self.walk_length < 2 || self.window == 0)
        {
            return Err(Error::Config("node2vec needs walks, walk_length >= 2 and window >= 1".into()));
        }
        if self.p <= 0.0 || self.q <= 0.0 {
            return Err(Error::Config("node2vec p and q must be positive".into()));
        }
        Ok(())
    }
}

/// Observed nodes ordered best-first. `scores[i]` belongs to `order[i]`;
/// scores never increase along the order and ties go to the smaller node id.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    order: Vec<usize>,
    scores: Vec<f64>,
}

impl Ranking {
    /// Sorts `nodes` by descending score with ascending-id tie-break.
    pub fn from_scores(nodes: &[usize], scores: &[f64]) -> Self {
        assert_eq!(nodes.len(), scores.len());
        let mut idx: Vec<usize> = (0..nodes.len()).collect();
        idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(nodes[a].cmp(&nodes[b])));
        Ranking {
            order: idx.iter().map(|&i| nodes[i]).collect(),
            scores: idx.iter().map(|&i| scores[i]).collect(),
        }
    }

    /// Ranks the observed nodes of `state` from scores indexed by local index.
    pub fn from_local_scores(state: &ObservedState, scores: &[f64]) -> Self {
        Ranking::from_scores(state.observed(), scores)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn positions(&self) -> HashMap<usize, usize> {
        self.order.iter().enumerate().map(|(i, &v)| (v, i)).collect()
    }

    pub fn score_of(&self, v: usize) -> Option<f64> {
        self.order.iter().position(|&x| x == v).map(|i| self.scores[i])
    }

    /// The ranking restricted to nodes accepted by `keep`, order preserved.
    pub fn filtered<F: Fn(usize) -> bool>(&self, keep: F) -> Ranking {
        let (order, scores) = self
            .order
            .iter()
            .zip(&self.scores)
            .filter(|(&v, _)| keep(v))
            .map(|(&v, &s)| (v, s))
            .unzip();
        Ranking { order, scores }
    }

    /// `node,score,rank` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,score,rank\n");
        for (rank, (v, s)) in self.order.iter().zip(&self.scores).enumerate() {
            let _ = writeln!(out, "{v},{s},{rank}");
        }
        out
    }
}

/// Dispatches to the configured ranker. `rng_seed` only affects node2vec.
pub fn rank(state: &ObservedState, cfg: &EmbedConfig, rng_seed: u64) -> Result<Ranking> {
    cfg.validate()?;
    match cfg.algorithm {
        Algorithm::Ppr => rank_ppr(state, cfg),
        Algorithm::Mod => Ok(rank_mod(state)),
        Algorithm::Pca => rank_pca(state, cfg),
        Algorithm::Eigenmap => rank_eigenmap(state, cfg),
        Algorithm::Glee => rank_glee(state, cfg),
        Algorithm::Node2vec => rank_node2vec(state, cfg, rng_seed),
    }
}

/// Local indices of probed targets.
pub(crate) fn probed_target_locals(state: &ObservedState) -> Vec<usize> {
    (0..state.observed_count())
        .filter(|&i| state.local_label(i) == Some(true))
        .collect()
}

/// Score = negative mean Euclidean distance to the anchor rows.
pub(crate) fn mean_distance_scores(emb: &[Vec<f64>], anchors: &[usize]) -> Vec<f64> {
    emb.iter()
        .map(|x| {
            if anchors.is_empty() {
                return 0.0;
            }
            let total: f64 = anchors
                .iter()
                .map(|&a| {
                    x.iter()
                        .zip(&emb[a])
                        .map(|(p, q)| (p - q).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .sum();
            -total / anchors.len() as f64
        })
        .collect()
}
