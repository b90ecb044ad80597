//! The incomplete-network discovery process.
//!
//! An [`ObservedState`] is everything an agent may see: which nodes have been
//! probed, the nodes revealed as their neighbors, the edges incident to probed
//! nodes and the labels of probed nodes. Labels of unprobed nodes are never
//! copied into the state, so policies that only receive an `ObservedState`
//! cannot read them.
//!
//! Conventions:
//! - the episode starts with the seed node probed (plus any extra nodes named
//!   in [`EpisodeConfig::extra_revealed`]); these initial reveals do not count
//!   as steps and never count towards [`ObservedState::targets_found`];
//! - probing a node reveals all of its ground-truth neighbors and every edge
//!   between it and them;
//! - the episode ends when the budget is spent or the boundary is empty.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::GroundTruth;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpisodeConfig {
    /// A target node; probed before the first step.
    pub seed_node: usize,
    /// Maximum number of probes after the seed.
    pub budget: usize,
    /// Further nodes probed at reset. Empty by default.
    pub extra_revealed: Vec<usize>,
    /// Seed that chose `seed_node`, kept for provenance.
    pub rng_seed: u64,
}

impl EpisodeConfig {
    pub fn new(seed_node: usize, budget: usize) -> Self {
        EpisodeConfig {
            seed_node,
            budget,
            extra_revealed: Vec::new(),
            rng_seed: 0,
        }
    }

    /// Draws the seed uniformly from the first target group of `gt` (the
    /// first implanted anomaly when there is one).
    pub fn sample(gt: &GroundTruth, budget: usize, rng_seed: u64) -> Result<Self> {
        let groups = gt.target_groups();
        let group = groups
            .first()
            .filter(|g| !g.is_empty())
            .ok_or_else(|| Error::Config("instance has no target nodes".into()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let seed_node = *group.choose(&mut rng).expect("non-empty group");
        Ok(EpisodeConfig {
            seed_node,
            budget,
            extra_revealed: Vec::new(),
            rng_seed,
        })
    }
}

/// Reward for one probe: 1 when the probed node is a target.
pub type Reward = u8;

#[derive(Debug, Clone, PartialEq)]
pub struct ObservedState {
    /// Observed node ids in discovery order; position = local index.
    nodes: Vec<usize>,
    local: HashMap<usize, usize>,
    /// Known edges by local index, each list sorted.
    adj: Vec<Vec<usize>>,
    labels: Vec<Option<bool>>,
    boundary: BTreeSet<usize>,
    probed: Vec<usize>,
    initial_probes: usize,
    known_edges: usize,
    seed: usize,
    step: usize,
    budget: usize,
}

impl ObservedState {
    /// Starts an episode: the seed (and any extra reveals) are probed.
    pub fn reset(gt: &GroundTruth, cfg: &EpisodeConfig) -> Result<Self> {
        let n = gt.node_count();
        if cfg.seed_node >= n {
            return Err(Error::Config(format!(
                "seed node {} is outside 0..{n}",
                cfg.seed_node
            )));
        }
        if !gt.is_target(cfg.seed_node) {
            return Err(Error::Config(format!(
                "seed node {} is not a target node",
                cfg.seed_node
            )));
        }
        let mut state = ObservedState {
            nodes: Vec::new(),
            local: HashMap::new(),
            adj: Vec::new(),
            labels: Vec::new(),
            boundary: BTreeSet::new(),
            probed: Vec::new(),
            initial_probes: 0,
            known_edges: 0,
            seed: cfg.seed_node,
            step: 0,
            budget: cfg.budget,
        };
        state.reveal(gt, cfg.seed_node);
        for &v in &cfg.extra_revealed {
            if v >= n {
                return Err(Error::Config(format!("revealed node {v} is outside 0..{n}")));
            }
            if !state.is_probed(v) {
                state.reveal(gt, v);
            }
        }
        state.initial_probes = state.probed.len();
        Ok(state)
    }

    /// Probes boundary node `a`, returning the reward.
    pub fn probe(&mut self, gt: &GroundTruth, a: usize) -> Result<Reward> {
        if self.step >= self.budget {
            return Err(Error::EpisodeOver {
                step: self.step,
                budget: self.budget,
            });
        }
        if !self.boundary.contains(&a) {
            return Err(Error::InvalidAction { node: a });
        }
        let reward = Reward::from(self.reveal(gt, a));
        self.step += 1;
        Ok(reward)
    }

    fn observe(&mut self, v: usize) -> usize {
        if let Some(&i) = self.local.get(&v) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(v);
        self.local.insert(v, i);
        self.adj.push(Vec::new());
        self.labels.push(None);
        self.boundary.insert(v);
        i
    }

    fn reveal(&mut self, gt: &GroundTruth, v: usize) -> bool {
        let iv = self.observe(v);
        let label = gt.is_target(v);
        self.labels[iv] = Some(label);
        self.boundary.remove(&v);
        self.probed.push(v);
        for &w in gt.graph.neighbors(v) {
            let iw = self.observe(w);
            // Edges to already probed nodes were revealed when they were probed.
            if self.labels[iw].is_none() {
                insert_sorted(&mut self.adj[iv], iw);
                insert_sorted(&mut self.adj[iw], iv);
                self.known_edges += 1;
            }
        }
        label
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.budget || self.boundary.is_empty()
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn seed(&self) -> usize {
        self.seed
    }

    /// Observed node ids in discovery order.
    pub fn observed(&self) -> &[usize] {
        &self.nodes
    }

    pub fn observed_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn local_index(&self, v: usize) -> Option<usize> {
        self.local.get(&v).copied()
    }

    /// Known neighbors of the node at local index `i`, as sorted local indices.
    pub fn local_neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn known_edge_count(&self) -> usize {
        self.known_edges
    }

    pub fn has_known_edge(&self, u: usize, v: usize) -> bool {
        match (self.local_index(u), self.local_index(v)) {
            (Some(iu), Some(iv)) => self.adj[iu].binary_search(&iv).is_ok(),
            _ => false,
        }
    }

    /// Known edges as global id pairs `(u, v)` with `u < v`, sorted.
    pub fn known_edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(self.known_edges);
        for (i, list) in self.adj.iter().enumerate() {
            for &j in list {
                let (u, v) = (self.nodes[i], self.nodes[j]);
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Label of `v` if it has been probed.
    pub fn known_label(&self, v: usize) -> Option<bool> {
        self.local_index(v).and_then(|i| self.labels[i])
    }

    pub fn local_label(&self, i: usize) -> Option<bool> {
        self.labels[i]
    }

    pub fn is_probed(&self, v: usize) -> bool {
        self.known_label(v).is_some()
    }

    /// Observed but unprobed nodes: the action set.
    pub fn boundary(&self) -> &BTreeSet<usize> {
        &self.boundary
    }

    /// Probed nodes in probe order, initial reveals first.
    pub fn probed(&self) -> &[usize] {
        &self.probed
    }

    /// Probed nodes with label 1 (including initial reveals).
    pub fn probed_targets(&self) -> impl Iterator<Item = usize> + '_ {
        self.probed
            .iter()
            .copied()
            .filter(move |&v| self.known_label(v) == Some(true))
    }

    /// Targets discovered by probes, excluding the seed and any other
    /// initial reveal.
    pub fn targets_found(&self) -> usize {
        self.probed[self.initial_probes..]
            .iter()
            .filter(|&&v| self.known_label(v) == Some(true))
            .count()
    }

    /// Number of known edges from `v` to probed nodes with the given label.
    pub fn labeled_neighbor_count(&self, v: usize, label: bool) -> usize {
        match self.local_index(v) {
            Some(i) => self.adj[i]
                .iter()
                .filter(|&&j| self.labels[j] == Some(label))
                .count(),
            None => 0,
        }
    }
}

fn insert_sorted(list: &mut Vec<usize>, x: usize) {
    if let Err(pos) = list.binary_search(&x) {
        list.insert(pos, x);
    }
}

/// `sum_t gamma^t r_t` with the first reward at exponent 0.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Config(format!("discount {gamma} is outside [0, 1]")));
    }
    if rewards.is_empty() {
        return Err(Error::Config("reward sequence is empty".into()));
    }
    let mut total = 0.0;
    let mut weight = 1.0;
    for &r in rewards {
        total += weight * r;
        weight *= gamma;
    }
    Ok(total)
}

/// One line of an episode trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRecord {
    pub step: usize,
    pub action: usize,
    pub reward: Reward,
    /// Boundary size after the probe.
    pub boundary_size: usize,
    pub targets_found: usize,
}

impl TraceRecord {
    pub const CSV_HEADER: &'static str = "step,action,reward,boundary_size,targets_found";
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{}",
            self.step, self.action, self.reward, self.boundary_size, self.targets_found
        )
    }
}
