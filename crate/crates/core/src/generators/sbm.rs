use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GroundTruth};
use crate::seeds;

/// Stochastic block model background. `p[i]` is the intra-community edge
/// probability of community `i`; `r` is the edge probability across
/// communities. Communities split `n` evenly, the remainder going to the
/// first community.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub n: usize,
    pub p: Vec<f64>,
    pub r: f64,
}

impl SbmParams {
    pub fn validate(&self) -> Result<()> {
        let k = self.p.len();
        if k == 0 || self.n < k {
            return Err(Error::Config(format!(
                "sbm needs 1 <= k <= n (k={k}, n={})",
                self.n
            )));
        }
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !in_unit(self.r) || self.p.iter().any(|&p| !in_unit(p)) {
            return Err(Error::Config("sbm probabilities must lie in [0, 1]".into()));
        }
        if let Some(p) = self.p.iter().find(|&&p| p <= self.r) {
            return Err(Error::Config(format!(
                "sbm intra-community probability {p} must exceed r={}",
                self.r
            )));
        }
        Ok(())
    }

    pub fn community_sizes(&self) -> Vec<usize> {
        let k = self.p.len();
        let mut sizes = vec![self.n / k; k];
        sizes[0] += self.n % k;
        sizes
    }

    /// Closed-form expected edge count.
    pub fn expected_edges(&self) -> f64 {
        let sizes = self.community_sizes();
        let within: f64 = sizes
            .iter()
            .zip(&self.p)
            .map(|(&s, &p)| (s * s.saturating_sub(1) / 2) as f64 * p)
            .sum();
        let all = (self.n * (self.n - 1) / 2) as f64;
        let within_pairs: f64 = sizes.iter().map(|&s| (s * s.saturating_sub(1) / 2) as f64).sum();
        within + (all - within_pairs) * self.r
    }
}

pub fn gen_sbm(params: &SbmParams, rng_seed: u64) -> Result<GroundTruth> {
    params.validate()?;
    let mut rng = seeds::rng(rng_seed);
    let n = params.n;
    let mut community = Vec::with_capacity(n);
    for (c, &size) in params.community_sizes().iter().enumerate() {
        community.extend(std::iter::repeat_n(c, size));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if community[u] == community[v] {
                params.p[community[u]]
            } else {
                params.r
            };
            if p > 0.0 && rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let mut gt = GroundTruth::unlabeled(Graph::from_edges(n, edges)?);
    gt.communities = community;
    Ok(gt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_one_gives_complete_graph() {
        let gt = gen_sbm(&SbmParams { n: 5, p: vec![1.0], r: 0.0 }, 1).unwrap();
        assert_eq!(gt.graph.edge_count(), 10);
        assert_eq!(gt.target_count(), 0);
    }

    #[test]
    fn zero_cross_probability_disconnects_communities() {
        let gt = gen_sbm(&SbmParams { n: 40, p: vec![0.5, 0.5], r: 0.0 }, 3).unwrap();
        for (u, v) in gt.graph.edges() {
            assert_eq!(gt.communities[u], gt.communities[v]);
        }
        let comp = gt.graph.components();
        assert_ne!(comp[0], comp[39]);
    }

    #[test]
    fn remainder_goes_to_first_community() {
        let p = SbmParams { n: 11, p: vec![0.5, 0.5, 0.5], r: 0.1 };
        assert_eq!(p.community_sizes(), vec![5, 3, 3]);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(gen_sbm(&SbmParams { n: 10, p: vec![0.1], r: 0.2 }, 0).is_err());
        assert!(gen_sbm(&SbmParams { n: 10, p: vec![1.5], r: 0.0 }, 0).is_err());
        assert!(gen_sbm(&SbmParams { n: 10, p: vec![], r: 0.0 }, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let p = SbmParams { n: 60, p: vec![0.3, 0.2], r: 0.05 };
        assert_eq!(gen_sbm(&p, 9).unwrap().graph, gen_sbm(&p, 9).unwrap().graph);
    }
}
