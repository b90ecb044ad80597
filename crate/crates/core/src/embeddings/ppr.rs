//! Personalized PageRank by power iteration.

use super::{probed_target_locals, EmbedConfig, Ranking};
use crate::env::ObservedState;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PprRun {
    pub scores: Vec<f64>,
    pub iterations: usize,
    /// L1 change of the last iteration.
    pub delta: f64,
}

/// PPR over an adjacency list with teleport distribution `teleport` (must
/// sum to 1). A walker follows a uniformly chosen edge with probability
/// `alpha` and teleports otherwise; nodes without edges teleport always.
/// Fails with a convergence error if the L1 change is still above `tol`
/// after `max_iter` iterations.
pub fn personalized_pagerank(
    adj: &[&[usize]],
    teleport: &[f64],
    alpha: f64,
    tol: f64,
    max_iter: usize,
) -> Result<PprRun> {
    let n = adj.len();
    let mut scores = teleport.to_vec();
    let mut next = vec![0.0; n];
    let mut delta = f64::INFINITY;
    for it in 1..=max_iter {
        let dangling: f64 = (0..n).filter(|&u| adj[u].is_empty()).map(|u| scores[u]).sum();
        let restart = (1.0 - alpha) + alpha * dangling;
        for (x, &t) in next.iter_mut().zip(teleport) {
            *x = restart * t;
        }
        for u in 0..n {
            let d = adj[u].len();
            if d > 0 {
                let share = alpha * scores[u] / d as f64;
                for &w in adj[u] {
                    next[w] += share;
                }
            }
        }
        delta = scores.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut scores, &mut next);
        if delta < tol {
            return Ok(PprRun {
                scores,
                iterations: it,
                delta,
            });
        }
    }
    Err(Error::Convergence {
        solver: "personalized pagerank",
        residual: delta,
        tolerance: tol,
    })
}

/// PPR scores by local index, teleporting uniformly to probed targets.
pub fn personalized_pagerank_of(state: &ObservedState, cfg: &EmbedConfig) -> Result<Vec<f64>> {
    let anchors = probed_target_locals(state);
    if anchors.is_empty() {
        return Err(Error::Config("ppr ranking needs at least one probed target".into()));
    }
    let n = state.observed_count();
    let mut teleport = vec![0.0; n];
    for &a in &anchors {
        teleport[a] = 1.0 / anchors.len() as f64;
    }
    let adj: Vec<&[usize]> = (0..n).map(|i| state.local_neighbors(i)).collect();
    let run = personalized_pagerank(&adj, &teleport, cfg.alpha, cfg.ppr_tolerance, cfg.max_iterations)?;
    Ok(run.scores)
}

pub fn rank_ppr(state: &ObservedState, cfg: &EmbedConfig) -> Result<Ranking> {
    let scores = personalized_pagerank_of(state, cfg)?;
    Ok(Ranking::from_local_scores(state, &scores))
}
