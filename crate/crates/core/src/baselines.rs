//! Heuristic discovery policies. Each sees only the [`ObservedState`].

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::embeddings::{rank_ppr, EmbedConfig};
use crate::env::{EpisodeConfig, ObservedState, Reward, TraceRecord};
use crate::error::{Error, Result};
use crate::graph::GroundTruth;
use crate::seeds;

/// A discovery strategy driven one probe at a time.
pub trait Policy {
    fn name(&self) -> &str;

    /// Picks a boundary node. Only called while the boundary is non-empty.
    fn choose(&mut self, state: &ObservedState) -> Result<usize>;

    /// Feedback for the last chosen action.
    fn observe(&mut self, _action: usize, _reward: Reward) {}
}

fn empty_boundary() -> Error {
    Error::Contract("policy asked to choose from an empty boundary".into())
}

/// Boundary node with the most probed target neighbors; lowest id on ties.
pub fn mod_policy(state: &ObservedState) -> Result<usize> {
    let mut best: Option<(usize, usize)> = None;
    for &v in state.boundary() {
        let c = state.labeled_neighbor_count(v, true);
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((v, c));
        }
    }
    best.map(|(v, _)| v).ok_or_else(empty_boundary)
}

/// Boundary node with the highest PPR score; lowest id on ties.
pub fn ppr_policy(state: &ObservedState, cfg: &EmbedConfig) -> Result<usize> {
    let ranking = rank_ppr(state, cfg)?;
    ranking
        .order()
        .iter()
        .copied()
        .find(|v| state.boundary().contains(v))
        .ok_or_else(empty_boundary)
}

pub fn random_policy(state: &ObservedState, rng: &mut ChaCha8Rng) -> Result<usize> {
    let b = state.boundary();
    if b.is_empty() {
        return Err(empty_boundary());
    }
    let i = rng.random_range(0..b.len());
    Ok(*b.iter().nth(i).expect("index within boundary"))
}

pub const NOL_FEATURES: usize = 6;

/// Features of a boundary node: probed target neighbors, probed background
/// neighbors, known degree, fraction of probed neighbors that are targets,
/// PPR score scaled by the observed node count, and a bias term.
pub fn nol_features(state: &ObservedState, ppr_scores: &[f64], v: usize) -> [f64; NOL_FEATURES] {
    let t = state.labeled_neighbor_count(v, true) as f64;
    let b = state.labeled_neighbor_count(v, false) as f64;
    let deg = state
        .local_index(v)
        .map_or(0, |i| state.local_neighbors(i).len()) as f64;
    let frac = if t + b > 0.0 { t / (t + b) } else { 0.0 };
    let ppr = state.local_index(v).map_or(0.0, |i| ppr_scores[i]) * state.observed_count() as f64;
    [t, b, deg, frac, ppr, 1.0]
}

/// Online linear regression by recursive least squares, with epsilon-greedy
/// selection over predicted target probability.
#[derive(Debug, Clone)]
pub struct NolModel {
    pub weights: [f64; NOL_FEATURES],
    /// Inverse of the regularized Gram matrix.
    p: [[f64; NOL_FEATURES]; NOL_FEATURES],
    pub epsilon: f64,
    pub updates: usize,
}

impl NolModel {
    pub const DEFAULT_EPSILON: f64 = 0.1;

    /// `ridge` is the initial regularization: the Gram inverse starts at
    /// `I / ridge`.
    pub fn new(epsilon: f64, ridge: f64) -> Self {
        let mut p = [[0.0; NOL_FEATURES]; NOL_FEATURES];
        for (i, row) in p.iter_mut().enumerate() {
            row[i] = 1.0 / ridge;
        }
        NolModel {
            weights: [0.0; NOL_FEATURES],
            p,
            epsilon,
            updates: 0,
        }
    }

    pub fn predict(&self, x: &[f64; NOL_FEATURES]) -> f64 {
        self.weights.iter().zip(x).map(|(w, a)| w * a).sum()
    }
}

impl Default for NolModel {
    fn default() -> Self {
        NolModel::new(NolModel::DEFAULT_EPSILON, 1.0)
    }
}

/// Chooses a boundary node: uniformly at random with probability epsilon,
/// else the highest prediction (lowest id on ties). Returns the node and its
/// features.
pub fn nol_policy(
    state: &ObservedState,
    model: &NolModel,
    cfg: &EmbedConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, [f64; NOL_FEATURES])> {
    if state.boundary().is_empty() {
        return Err(empty_boundary());
    }
    let ppr = crate::embeddings::personalized_pagerank_of(state, cfg)?;
    let explore = rng.random::<f64>() < model.epsilon;
    let v = if explore {
        random_policy(state, rng)?
    } else {
        let mut best: Option<(usize, f64)> = None;
        for &v in state.boundary() {
            let s = model.predict(&nol_features(state, &ppr, v));
            if best.is_none_or(|(_, bs)| s > bs) {
                best = Some((v, s));
            }
        }
        best.expect("non-empty boundary").0
    };
    Ok((v, nol_features(state, &ppr, v)))
}

/// Recursive least-squares update with the observed 0/1 reward.
pub fn nol_update(model: &mut NolModel, x: &[f64; NOL_FEATURES], reward: f64) {
    let mut px = [0.0; NOL_FEATURES];
    for (i, row) in model.p.iter().enumerate() {
        px[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
    let denom = 1.0 + x.iter().zip(&px).map(|(a, b)| a * b).sum::<f64>();
    let gain: Vec<f64> = px.iter().map(|v| v / denom).collect();
    let err = reward - model.predict(x);
    for (w, g) in model.weights.iter_mut().zip(&gain) {
        *w += g * err;
    }
    // P is symmetric, so x^T P = (P x)^T.
    for i in 0..NOL_FEATURES {
        for j in 0..NOL_FEATURES {
            model.p[i][j] -= gain[i] * px[j];
        }
    }
    model.updates += 1;
}

pub struct ModPolicy;

impl Policy for ModPolicy {
    fn name(&self) -> &str {
        "mod"
    }

    fn choose(&mut self, state: &ObservedState) -> Result<usize> {
        mod_policy(state)
    }
}

pub struct PprPolicy(pub EmbedConfig);

impl Policy for PprPolicy {
    fn name(&self) -> &str {
        "ppr"
    }

    fn choose(&mut self, state: &ObservedState) -> Result<usize> {
        ppr_policy(state, &self.0)
    }
}

pub struct RandomPolicy(pub ChaCha8Rng);

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        RandomPolicy(seeds::rng(seed))
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &str {
        "random"
    }

    fn choose(&mut self, state: &ObservedState) -> Result<usize> {
        random_policy(state, &mut self.0)
    }
}

pub struct NolPolicy {
    pub model: NolModel,
    pub embed: EmbedConfig,
    rng: ChaCha8Rng,
    pending: Option<(usize, [f64; NOL_FEATURES])>,
}

impl NolPolicy {
    pub fn new(model: NolModel, embed: EmbedConfig, seed: u64) -> Self {
        NolPolicy {
            model,
            embed,
            rng: seeds::rng(seed),
            pending: None,
        }
    }
}

impl Policy for NolPolicy {
    fn name(&self) -> &str {
        "nol-style"
    }

    fn choose(&mut self, state: &ObservedState) -> Result<usize> {
        let (v, x) = nol_policy(state, &self.model, &self.embed, &mut self.rng)?;
        self.pending = Some((v, x));
        Ok(v)
    }

    fn observe(&mut self, action: usize, reward: Reward) {
        if let Some((v, x)) = self.pending.take() {
            debug_assert_eq!(v, action);
            nol_update(&mut self.model, &x, f64::from(reward));
        }
    }
}

/// Plays one episode to the budget (or until the boundary empties).
pub fn run_episode(
    gt: &GroundTruth,
    cfg: &EpisodeConfig,
    policy: &mut dyn Policy,
) -> Result<Vec<TraceRecord>> {
    let mut state = ObservedState::reset(gt, cfg)?;
    let mut trace = Vec::with_capacity(cfg.budget);
    while !state.is_done() {
        let a = policy.choose(&state)?;
        let reward = state.probe(gt, a)?;
        policy.observe(a, reward);
        trace.push(TraceRecord {
            step: state.step(),
            action: a,
            reward,
            boundary_size: state.boundary().len(),
            targets_found: state.targets_found(),
        });
    }
    Ok(trace)
}
