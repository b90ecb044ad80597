//! Embedding-quality metrics and the ground-truth-guided traversal that
//! drives them. These functions read ground truth and are evaluation-only.
//!
//! Accuracy and entropy look at the ranking restricted to the boundary: the
//! nodes an agent could actually probe next.

use std::collections::VecDeque;

use crate::embeddings::{rank, EmbedConfig, Ranking};
use crate::env::{EpisodeConfig, ObservedState, Reward};
use crate::error::{Error, Result};
use crate::graph::GroundTruth;
use crate::seeds;

fn boundary_ranking(ranking: &Ranking, state: &ObservedState) -> Ranking {
    ranking.filtered(|v| state.boundary().contains(&v))
}

/// Targets not yet probed, observed or not.
pub fn undiscovered_targets(state: &ObservedState, gt: &GroundTruth) -> usize {
    gt.target_count() - state.probed_targets().count()
}

/// Fraction of all true targets found in the top `k` of the boundary ranking,
/// where `k` is the number of undiscovered targets.
pub fn accuracy_index(ranking: &Ranking, state: &ObservedState, gt: &GroundTruth) -> f64 {
    let k = undiscovered_targets(state, gt);
    let hits = boundary_ranking(ranking, state)
        .order()
        .iter()
        .take(k)
        .filter(|&&v| gt.is_target(v))
        .count();
    hits as f64 / gt.target_count() as f64
}

/// `0.5 * (1 + ln(2 pi var))` with `var` the population variance of the
/// boundary-ranking positions of boundary targets. `None` with fewer than two
/// boundary targets.
pub fn boundary_entropy(ranking: &Ranking, state: &ObservedState, gt: &GroundTruth) -> Option<f64> {
    let positions: Vec<f64> = boundary_ranking(ranking, state)
        .order()
        .iter()
        .enumerate()
        .filter(|(_, &v)| gt.is_target(v))
        .map(|(i, _)| i as f64)
        .collect();
    if positions.len() < 2 {
        return None;
    }
    Some(gaussian_entropy(population_variance(&positions)))
}

pub fn population_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

pub fn gaussian_entropy(var: f64) -> f64 {
    0.5 * (1.0 + (2.0 * std::f64::consts::PI * var).ln())
}

/// Sum of the per-step accuracy.
pub fn auc(accuracy: &[f64]) -> f64 {
    accuracy.iter().sum()
}

/// Per-step record of a traversal. Metrics at step `t` rank the state seen
/// just before the `t`-th probe.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricSeries {
    pub actions: Vec<usize>,
    pub rewards: Vec<Reward>,
    pub accuracy: Vec<f64>,
    pub entropy: Vec<Option<f64>>,
    pub targets_found: Vec<usize>,
}

impl MetricSeries {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn auc(&self) -> f64 {
        auc(&self.accuracy)
    }

    fn push(&mut self, action: usize, reward: Reward, acc: f64, ent: Option<f64>, found: usize) {
        self.actions.push(action);
        self.rewards.push(reward);
        self.accuracy.push(acc);
        self.entropy.push(ent);
        self.targets_found.push(found);
    }
}

/// The next probe of the minimal collection route: the lowest-id boundary
/// target if any, else the first hop of a shortest ground-truth path from
/// the probed set to the nearest unprobed target (ties by node id). `None`
/// once every target is probed.
pub fn next_optimal_probe(state: &ObservedState, gt: &GroundTruth) -> Result<Option<usize>> {
    if undiscovered_targets(state, gt) == 0 {
        return Ok(None);
    }
    if let Some(&v) = state.boundary().iter().find(|&&v| gt.is_target(v)) {
        return Ok(Some(v));
    }
    // BFS from the probed set through unprobed nodes, remembering which
    // boundary node each search branch started from.
    let n = gt.node_count();
    let mut first_hop = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    state.probed().iter().for_each(|&p| seen[p] = true);
    for &b in state.boundary() {
        seen[b] = true;
        first_hop[b] = b;
        queue.push_back(b);
    }
    while let Some(u) = queue.pop_front() {
        for &w in gt.graph.neighbors(u) {
            if seen[w] {
                continue;
            }
            seen[w] = true;
            first_hop[w] = first_hop[u];
            if gt.is_target(w) {
                return Ok(Some(first_hop[w]));
            }
            queue.push_back(w);
        }
    }
    Err(Error::Unreachable(format!(
        "{} target nodes cannot be reached from the probed set",
        undiscovered_targets(state, gt)
    )))
}

/// Walks the minimal collection route from `seed` and evaluates the
/// embedding before every probe. `max_steps` truncates the walk; the route
/// itself never depends on the embedding.
pub fn optimal_traversal(
    gt: &GroundTruth,
    seed: usize,
    embed: &EmbedConfig,
    rng_seed: u64,
    max_steps: Option<usize>,
) -> Result<MetricSeries> {
    let mut state = ObservedState::reset(gt, &EpisodeConfig::new(seed, usize::MAX))?;
    let mut series = MetricSeries::default();
    while let Some(a) = next_optimal_probe(&state, gt)? {
        if max_steps.is_some_and(|m| series.len() >= m) {
            break;
        }
        let ranking = rank(&state, embed, seeds::derive(rng_seed, series.len() as u64))?;
        let acc = accuracy_index(&ranking, &state, gt);
        let ent = boundary_entropy(&ranking, &state, gt);
        let r = state.probe(gt, a)?;
        series.push(a, r, acc, ent, state.targets_found());
    }
    Ok(series)
}

/// Length of the minimal collection route from `seed`.
pub fn optimal_route(gt: &GroundTruth, seed: usize) -> Result<Vec<usize>> {
    let mut state = ObservedState::reset(gt, &EpisodeConfig::new(seed, usize::MAX))?;
    let mut route = Vec::new();
    while let Some(a) = next_optimal_probe(&state, gt)? {
        state.probe(gt, a)?;
        route.push(a);
    }
    Ok(route)
}
