//! Implanting Erdős–Rényi foreground subnetworks into a background.
//!
//! Host nodes are chosen first, then the background subgraph induced by the
//! union of all host sets is replaced by `count` disjoint ER(size, p) graphs.
//! Replacing the union (not each set separately) removes every background
//! edge between two anomalies, so anomalies are never adjacent.
//!
//! Separation is measured as a *gap*: the number of intermediate nodes on a
//! shortest path between two host sets, i.e. hop distance minus one. Two
//! cliques "two hops apart" have gap 2, and collecting both from inside the
//! first needs exactly two non-target probes.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GroundTruth};
use crate::seeds;

const PLACEMENT_ATTEMPTS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForegroundParams {
    /// Nodes per anomaly.
    pub size: usize,
    /// Number of disjoint anomalies.
    pub count: usize,
    /// ER edge probability inside each anomaly.
    pub p: f64,
    /// Allowed gap between each anomaly after the first and the ones placed
    /// before it.
    pub min_gap: usize,
    pub max_gap: usize,
}

impl ForegroundParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.size == 0 || self.count == 0 {
            return Err(Error::Config("foreground size and count must be positive".into()));
        }
        if self.size * self.count > n {
            return Err(Error::Config(format!(
                "{} anomalies of {} nodes do not fit in {n} nodes",
                self.count, self.size
            )));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Config(format!("foreground p={} outside [0, 1]", self.p)));
        }
        if self.min_gap > self.max_gap {
            return Err(Error::Config("foreground min_gap exceeds max_gap".into()));
        }
        Ok(())
    }
}

/// Hop distance from `set` to `others` (minimum over pairs).
pub fn set_distance(graph: &Graph, set: &[usize], others: &[usize]) -> Option<usize> {
    let dist = graph.bfs_distances(others);
    set.iter().filter_map(|&v| dist[v]).min()
}

fn choose_hosts(
    bg: &GroundTruth,
    params: &ForegroundParams,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Option<Vec<Vec<usize>>> {
    let n = bg.node_count();
    let blocks = bg.communities.iter().copied().max().map_or(0, |m| m + 1);
    let mut by_block: Vec<Vec<usize>> = vec![Vec::new(); blocks];
    for v in 0..n {
        by_block[bg.communities[v]].push(v);
    }
    let roomy: Vec<&Vec<usize>> = by_block.iter().filter(|b| b.len() >= params.size).collect();
    let block = roomy.choose(rng)?;
    let first: Vec<usize> = block.choose_multiple(rng, params.size).copied().collect();

    let mut taken = vec![false; n];
    first.iter().for_each(|&v| taken[v] = true);
    let mut sets = vec![first];
    // Background edges into earlier hosts disappear with the union
    // replacement, so a background-adjacent node still ends up at gap >= 1.
    let lo = if params.min_gap <= 1 { 1 } else { params.min_gap + 1 };
    let hi = params.max_gap + 1;
    for _ in 1..params.count {
        let placed: Vec<usize> = sets.iter().flatten().copied().collect();
        let dist = bg.graph.bfs_distances(&placed);
        let candidates: Vec<usize> = (0..n)
            .filter(|&v| !taken[v] && dist[v].is_some_and(|d| (lo..=hi).contains(&d)))
            .collect();
        if candidates.len() < params.size {
            return None;
        }
        let set: Vec<usize> = candidates.choose_multiple(rng, params.size).copied().collect();
        set.iter().for_each(|&v| taken[v] = true);
        sets.push(set);
    }
    Some(sets)
}

pub fn implant_foreground(
    bg: &GroundTruth,
    params: &ForegroundParams,
    rng_seed: u64,
) -> Result<GroundTruth> {
    params.validate(bg.node_count())?;
    let mut rng = seeds::rng(rng_seed);
    let n = bg.node_count();
    for _ in 0..PLACEMENT_ATTEMPTS {
        let Some(sets) = choose_hosts(bg, params, &mut rng) else {
            continue;
        };
        let mut host = vec![false; n];
        for &v in sets.iter().flatten() {
            host[v] = true;
        }
        let mut edges: Vec<(usize, usize)> = bg
            .graph
            .edges()
            .filter(|&(u, v)| !(host[u] && host[v]))
            .collect();
        for set in &sets {
            let mut sorted = set.clone();
            sorted.sort_unstable();
            for (i, &u) in sorted.iter().enumerate() {
                for &v in &sorted[i + 1..] {
                    if params.p > 0.0 && rng.random::<f64>() < params.p {
                        edges.push((u, v));
                    }
                }
            }
        }
        let graph = Graph::from_edges(n, edges)?;
        let separated = (1..sets.len()).all(|i| {
            let before: Vec<usize> = sets[..i].iter().flatten().copied().collect();
            set_distance(&graph, &sets[i], &before)
                .is_some_and(|d| (params.min_gap + 1..=params.max_gap + 1).contains(&d))
        });
        if !separated {
            continue;
        }
        let mut labels = bg.labels.clone();
        for &v in sets.iter().flatten() {
            labels[v] = true;
        }
        return Ok(GroundTruth {
            graph,
            labels,
            communities: bg.communities.clone(),
            anomalies: sets,
            id_map: bg.id_map.clone(),
        });
    }
    Err(Error::Generation(format!(
        "could not place {} anomalies of {} nodes with gap {}..={} after {PLACEMENT_ATTEMPTS} attempts",
        params.count, params.size, params.min_gap, params.max_gap
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_sbm, SbmParams};

    fn sparse_bg(seed: u64) -> GroundTruth {
        gen_sbm(&SbmParams { n: 400, p: vec![0.02, 0.02], r: 0.002 }, seed).unwrap()
    }

    #[test]
    fn full_probability_gives_clique() {
        let bg = sparse_bg(1);
        let fp = ForegroundParams { size: 40, count: 1, p: 1.0, min_gap: 0, max_gap: 0 };
        let gt = implant_foreground(&bg, &fp, 2).unwrap();
        let set = &gt.anomalies[0];
        for (i, &u) in set.iter().enumerate() {
            for &v in &set[i + 1..] {
                assert!(gt.graph.has_edge(u, v));
            }
        }
        assert_eq!(gt.target_count(), 40);
    }

    #[test]
    fn zero_probability_keeps_outside_edges() {
        let bg = sparse_bg(3);
        let fp = ForegroundParams { size: 30, count: 1, p: 0.0, min_gap: 0, max_gap: 0 };
        let gt = implant_foreground(&bg, &fp, 4).unwrap();
        let host: Vec<bool> = (0..400).map(|v| gt.labels[v]).collect();
        for (u, v) in gt.graph.edges() {
            assert!(!(host[u] && host[v]));
        }
        for (u, v) in bg.graph.edges() {
            if !(host[u] && host[v]) {
                assert!(gt.graph.has_edge(u, v));
            }
        }
    }

    #[test]
    fn two_anomalies_respect_gap() {
        let bg = sparse_bg(5);
        let fp = ForegroundParams { size: 10, count: 2, p: 1.0, min_gap: 2, max_gap: 2 };
        let gt = implant_foreground(&bg, &fp, 6).unwrap();
        assert_eq!(gt.target_count(), 20);
        assert_eq!(set_distance(&gt.graph, &gt.anomalies[1], &gt.anomalies[0]), Some(3));
    }

    #[test]
    fn unsatisfiable_placement_errors() {
        // A complete background leaves no node at gap 3.
        let bg = gen_sbm(&SbmParams { n: 30, p: vec![1.0], r: 0.0 }, 0).unwrap();
        let fp = ForegroundParams { size: 5, count: 2, p: 1.0, min_gap: 3, max_gap: 3 };
        assert!(matches!(implant_foreground(&bg, &fp, 0), Err(Error::Generation(_))));
    }

    #[test]
    fn oversized_foreground_is_config_error() {
        let bg = sparse_bg(0);
        let fp = ForegroundParams { size: 300, count: 2, p: 1.0, min_gap: 0, max_gap: 5 };
        assert!(matches!(implant_foreground(&bg, &fp, 0), Err(Error::Config(_))));
    }
}
