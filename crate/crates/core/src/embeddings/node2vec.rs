//! node2vec: second-order random walks on the known graph followed by
//! skip-gram training with negative sampling.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use super::{mean_distance_scores, probed_target_locals, EmbedConfig, Ranking};
use crate::env::ObservedState;
use crate::error::Result;
use crate::seeds;

const UNIGRAM_POWER: f64 = 0.75;
const MIN_LR_FRACTION: f64 = 1e-4;

/// Walks of `length` nodes starting `walks_per_node` times from every node,
/// in a freshly shuffled node order each round. Transition weights from `cur` (arrived
/// from `prev`) to `x` are `1/p` for `x == prev`, `1` for neighbors of
/// `prev` and `1/q` otherwise. Walks stop early at isolated nodes.
pub fn random_walks(
    adj: &[&[usize]],
    walks_per_node: usize,
    length: usize,
    p: f64,
    q: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    let n = adj.len();
    let unbiased = p == 1.0 && q == 1.0;
    let mut walks = Vec::with_capacity(n * walks_per_node);
    let mut weights = Vec::new();
    let mut starts: Vec<usize> = (0..n).collect();
    for _ in 0..walks_per_node {
        starts.shuffle(rng);
        for &start in &starts {
            let mut walk = Vec::with_capacity(length);
            walk.push(start);
            while walk.len() < length {
                let cur = *walk.last().unwrap();
                let nb = adj[cur];
                if nb.is_empty() {
                    break;
                }
                let next = if unbiased || walk.len() == 1 {
                    nb[rng.random_range(0..nb.len())]
                } else {
                    let prev = walk[walk.len() - 2];
                    weights.clear();
                    weights.extend(nb.iter().map(|&x| {
                        if x == prev {
                            1.0 / p
                        } else if adj[prev].binary_search(&x).is_ok() {
                            1.0
                        } else {
                            1.0 / q
                        }
                    }));
                    let total: f64 = weights.iter().sum();
                    let mut u = rng.random::<f64>() * total;
                    let mut pick = nb.len() - 1;
                    for (i, w) in weights.iter().enumerate() {
                        if u < *w {
                            pick = i;
                            break;
                        }
                        u -= w;
                    }
                    nb[pick]
                };
                walk.push(next);
            }
            walks.push(walk);
        }
    }
    walks
}

/// Dot product with eight independent partial sums so the loop vectorizes.
fn dot(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0.0f32; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f32 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    acc.iter().sum::<f32>() + tail
}

/// `y += a * x`.
fn axpy(y: &mut [f32], a: f32, x: &[f32]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

const MAX_EXP: f32 = 6.0;
const EXP_TABLE_SIZE: usize = 1000;

/// Logistic function tabulated on [-6, 6] and saturated outside, as in word2vec.
struct Sigmoid(Vec<f32>);

impl Sigmoid {
    fn new() -> Self {
        Sigmoid(
            (0..EXP_TABLE_SIZE)
                .map(|i| {
                    let x = (i as f32 / EXP_TABLE_SIZE as f32 * 2.0 - 1.0) * MAX_EXP;
                    1.0 / (1.0 + (-x).exp())
                })
                .collect(),
        )
    }

    fn at(&self, x: f32) -> f32 {
        if x >= MAX_EXP {
            1.0
        } else if x <= -MAX_EXP {
            0.0
        } else {
            self.0[((x + MAX_EXP) * (EXP_TABLE_SIZE as f32 / MAX_EXP / 2.0)) as usize]
        }
    }
}

/// Trains skip-gram embeddings over the walks. Returns one row per node and
/// a flag telling whether the node occurred in any walk context.
pub fn node2vec_embedding(
    adj: &[&[usize]],
    cfg: &EmbedConfig,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<f64>>, Vec<bool>) {
    let n = adj.len();
    let d = cfg.dim;
    let walks = random_walks(adj, cfg.walks_per_node, cfg.walk_length, cfg.p, cfg.q, rng);

    let mut counts = vec![0usize; n];
    walks.iter().flatten().for_each(|&v| counts[v] += 1);
    // A node is embedded only if it was seen next to something.
    let visited: Vec<bool> = {
        let mut seen = vec![false; n];
        for w in walks.iter().filter(|w| w.len() > 1) {
            w.iter().for_each(|&v| seen[v] = true);
        }
        seen
    };
    let noise = WeightedAliasIndex::new(
        counts.iter().map(|&c| (c as f64).powf(UNIGRAM_POWER)).collect(),
    )
    .ok();

    // Single precision, as in word2vec.
    let mut w_in: Vec<f32> = (0..n * d)
        .map(|_| ((rng.random::<f64>() - 0.5) / d as f64) as f32)
        .collect();
    let mut w_out = vec![0.0f32; n * d];
    let mut grad = vec![0.0f32; d];
    let sigmoid = Sigmoid::new();

    let total_tokens = (walks.iter().map(Vec::len).sum::<usize>() * cfg.epochs).max(1);
    let mut processed = 0usize;
    for _ in 0..cfg.epochs {
        for walk in &walks {
            for (pos, &center) in walk.iter().enumerate() {
                let lr = (cfg.learning_rate * (1.0 - processed as f64 / total_tokens as f64))
                    .max(cfg.learning_rate * MIN_LR_FRACTION);
                processed += 1;
                let reach = rng.random_range(1..=cfg.window);
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach).min(walk.len() - 1);
                for (cpos, &context) in walk.iter().enumerate().take(hi + 1).skip(lo) {
                    if cpos == pos {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let input = &mut w_in[context * d..(context + 1) * d];
                    for s in 0..=cfg.negative {
                        let (target, label) = if s == 0 {
                            (center, 1.0)
                        } else {
                            let Some(noise) = &noise else { continue };
                            let t = noise.sample(rng);
                            if t == center {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let out = &mut w_out[target * d..(target + 1) * d];
                        let g = (label - sigmoid.at(dot(input, out))) * lr as f32;
                        axpy(&mut grad, g, out);
                        axpy(out, g, input);
                    }
                    axpy(input, 1.0, &grad);
                }
            }
        }
    }
    let rows = (0..n)
        .map(|v| w_in[v * d..(v + 1) * d].iter().map(|&x| f64::from(x)).collect())
        .collect();
    (rows, visited)
}

pub fn rank_node2vec(state: &ObservedState, cfg: &EmbedConfig, rng_seed: u64) -> Result<Ranking> {
    let adj: Vec<&[usize]> = (0..state.observed_count())
        .map(|i| state.local_neighbors(i))
        .collect();
    let mut rng = seeds::rng(rng_seed);
    let (rows, visited) = node2vec_embedding(&adj, cfg, &mut rng);
    let anchors: Vec<usize> = probed_target_locals(state)
        .into_iter()
        .filter(|&a| visited[a])
        .collect();
    let mut scores = mean_distance_scores(&rows, &anchors);
    for (s, &seen) in scores.iter_mut().zip(&visited) {
        if !seen {
            *s = f64::NEG_INFINITY;
        }
    }
    Ok(Ranking::from_local_scores(state, &scores))
}
