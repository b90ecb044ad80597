//! LFR-style benchmark backgrounds: power-law degrees, power-law community
//! sizes and a mixing fraction, wired with a configuration model followed by
//! a bounded number of rewiring rounds. Stubs that cannot be placed after the
//! last round are dropped, so the realized mixing fraction is reported rather
//! than guaranteed.

use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GroundTruth};
use crate::seeds;

const ASSIGNMENT_ATTEMPTS: usize = 20;
const REWIRE_ROUNDS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LfrParams {
    pub n: usize,
    /// Degree distribution exponent.
    pub tau1: f64,
    /// Community size exponent.
    pub tau2: f64,
    /// Fraction of each node's edges that leave its community.
    pub mu: f64,
    pub avg_degree: f64,
    pub max_degree: usize,
    pub min_community: usize,
    pub max_community: usize,
}

/// Diagnostics from one LFR draw.
#[derive(Debug, Clone)]
pub struct LfrReport {
    /// Sampled target degrees before wiring.
    pub degree_sequence: Vec<usize>,
    pub community_sizes: Vec<usize>,
    /// Mean over non-isolated nodes of external edges / degree.
    pub achieved_mu: f64,
    pub dropped_stubs: usize,
}

impl LfrParams {
    pub fn validate(&self) -> Result<()> {
        if self.tau1 <= 1.0 || self.tau2 <= 1.0 {
            return Err(Error::Config("lfr exponents must exceed 1".into()));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::Config(format!("lfr mixing {} outside [0, 1]", self.mu)));
        }
        if self.min_community == 0
            || self.min_community > self.max_community
            || self.max_community > self.n
        {
            return Err(Error::Config(format!(
                "lfr community bounds need 1 <= min_c <= max_c <= n (got {}, {}, {})",
                self.min_community, self.max_community, self.n
            )));
        }
        if self.max_degree >= self.n || self.avg_degree < 1.0 || self.avg_degree > self.max_degree as f64 {
            return Err(Error::Config(format!(
                "lfr degrees need 1 <= avg ({}) <= d_max ({}) < n ({})",
                self.avg_degree, self.max_degree, self.n
            )));
        }
        let max_internal = ((1.0 - self.mu) * self.max_degree as f64).round() as usize;
        if max_internal >= self.max_community {
            return Err(Error::Config(format!(
                "lfr internal degree {max_internal} of the largest hub cannot fit a community of at most {} nodes",
                self.max_community
            )));
        }
        Ok(())
    }
}

/// Mean of the continuous power law `x^-tau` truncated to `[lo, hi]`.
fn truncated_mean(tau: f64, lo: f64, hi: f64) -> f64 {
    let moment = |k: f64| {
        let e = k - tau;
        if e.abs() < 1e-12 {
            (hi / lo).ln()
        } else {
            (hi.powf(e) - lo.powf(e)) / e
        }
    };
    moment(2.0) / moment(1.0)
}

/// Lower cutoff giving the requested mean, by bisection.
fn lower_cutoff(tau: f64, mean: f64, hi: f64) -> Result<f64> {
    let (mut lo_x, mut hi_x) = (1.0, hi);
    if truncated_mean(tau, lo_x, hi) > mean {
        return Err(Error::Config(format!(
            "average degree {mean} is below the minimum reachable with exponent {tau}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo_x + hi_x);
        if truncated_mean(tau, mid, hi) < mean {
            lo_x = mid;
        } else {
            hi_x = mid;
        }
    }
    Ok(0.5 * (lo_x + hi_x))
}

fn sample_power_law(rng: &mut ChaCha8Rng, tau: f64, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    let e = 1.0 - tau;
    (lo.powf(e) + u * (hi.powf(e) - lo.powf(e))).powf(1.0 / e)
}

fn community_sizes(params: &LfrParams, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let (lo, hi) = (params.min_community as f64, params.max_community as f64 + 0.5);
    for _ in 0..ASSIGNMENT_ATTEMPTS {
        let mut sizes = Vec::new();
        let mut total = 0;
        while total < params.n {
            let s = (sample_power_law(rng, params.tau2, lo, hi).floor() as usize)
                .clamp(params.min_community, params.max_community);
            sizes.push(s);
            total += s;
        }
        // Trim the overshoot from the largest communities.
        let mut excess = total - params.n;
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        for s in sizes.iter_mut() {
            let room = *s - params.min_community;
            let cut = room.min(excess);
            *s -= cut;
            excess -= cut;
        }
        if excess == 0 {
            return Ok(sizes);
        }
    }
    Err(Error::Generation(format!(
        "could not split {} nodes into communities of size {}..={}",
        params.n, params.min_community, params.max_community
    )))
}

fn assign(
    internal: &[usize],
    sizes: &[usize],
    rng: &mut ChaCha8Rng,
) -> Option<Vec<usize>> {
    let n = internal.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.sort_by(|&a, &b| internal[b].cmp(&internal[a]));
    let mut free = sizes.to_vec();
    let mut membership = vec![0; n];
    let mut eligible = Vec::with_capacity(sizes.len());
    for v in order {
        eligible.clear();
        eligible.extend((0..sizes.len()).filter(|&c| free[c] > 0 && sizes[c] > internal[v]));
        let &c = eligible.as_slice().choose(rng)?;
        free[c] -= 1;
        membership[v] = c;
    }
    Some(membership)
}

fn key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Configuration-model pairing of `stubs`, with rewiring of rejected pairs.
/// Returns the number of stubs that could not be placed.
fn wire<F>(
    mut stubs: Vec<usize>,
    forbidden: F,
    existing: &mut HashSet<(usize, usize)>,
    edges: &mut Vec<(usize, usize)>,
    rng: &mut ChaCha8Rng,
) -> usize
where
    F: Fn(usize, usize) -> bool,
{
    if stubs.len() % 2 == 1 {
        stubs.pop();
    }
    stubs.shuffle(rng);
    let ok = |u: usize, v: usize, existing: &HashSet<(usize, usize)>| {
        u != v && !forbidden(u, v) && !existing.contains(&key(u, v))
    };
    let mut placed: Vec<(usize, usize)> = Vec::new();
    let mut rejected = Vec::new();
    for pair in stubs.chunks_exact(2) {
        let (u, v) = (pair[0], pair[1]);
        if ok(u, v, existing) {
            existing.insert(key(u, v));
            placed.push((u, v));
        } else {
            rejected.push((u, v));
        }
    }
    for _ in 0..REWIRE_ROUNDS {
        if rejected.is_empty() || placed.is_empty() {
            break;
        }
        let mut still = Vec::new();
        for (u, v) in rejected {
            let idx = rng.random_range(0..placed.len());
            let (a, b) = placed[idx];
            existing.remove(&key(a, b));
            let swapped = if ok(u, a, existing) && ok(v, b, existing) && key(u, a) != key(v, b) {
                Some(((u, a), (v, b)))
            } else if ok(u, b, existing) && ok(v, a, existing) && key(u, b) != key(v, a) {
                Some(((u, b), (v, a)))
            } else {
                None
            };
            match swapped {
                Some((e1, e2)) => {
                    existing.insert(key(e1.0, e1.1));
                    existing.insert(key(e2.0, e2.1));
                    placed[idx] = e1;
                    placed.push(e2);
                }
                None => {
                    existing.insert(key(a, b));
                    still.push((u, v));
                }
            }
        }
        rejected = still;
    }
    edges.extend(placed);
    2 * rejected.len()
}

pub fn gen_lfr(params: &LfrParams, rng_seed: u64) -> Result<GroundTruth> {
    gen_lfr_with_report(params, rng_seed).map(|(gt, _)| gt)
}

pub fn gen_lfr_with_report(params: &LfrParams, rng_seed: u64) -> Result<(GroundTruth, LfrReport)> {
    params.validate()?;
    let mut rng = seeds::rng(rng_seed);
    let n = params.n;
    let hi = params.max_degree as f64;
    let lo = lower_cutoff(params.tau1, params.avg_degree, hi)?;
    let mut degrees: Vec<usize> = (0..n)
        .map(|_| {
            (sample_power_law(&mut rng, params.tau1, lo, hi).round() as usize)
                .clamp(1, params.max_degree)
        })
        .collect();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        if let Some(d) = degrees.iter_mut().find(|d| **d < params.max_degree) {
            *d += 1;
        }
    }
    let internal: Vec<usize> = degrees
        .iter()
        .map(|&d| ((1.0 - params.mu) * d as f64).round() as usize)
        .collect();

    let mut found = None;
    for _ in 0..ASSIGNMENT_ATTEMPTS {
        let sizes = community_sizes(params, &mut rng)?;
        if let Some(m) = assign(&internal, &sizes, &mut rng) {
            found = Some((sizes, m));
            break;
        }
    }
    let (sizes, membership) = found.ok_or_else(|| {
        Error::Generation(format!(
            "no community assignment fits the internal degrees after {ASSIGNMENT_ATTEMPTS} attempts \
             (max internal degree {}, max community {})",
            internal.iter().max().copied().unwrap_or(0),
            params.max_community
        ))
    })?;

    let mut existing = HashSet::new();
    let mut edges = Vec::new();
    let mut dropped = 0;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); sizes.len()];
    for v in 0..n {
        members[membership[v]].push(v);
    }
    for group in &members {
        let stubs: Vec<usize> = group
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, internal[v]))
            .collect();
        dropped += wire(stubs, |_, _| false, &mut existing, &mut edges, &mut rng);
    }
    let external: Vec<usize> = (0..n)
        .flat_map(|v| std::iter::repeat_n(v, degrees[v] - internal[v]))
        .collect();
    dropped += wire(
        external,
        |u, v| membership[u] == membership[v],
        &mut existing,
        &mut edges,
        &mut rng,
    );

    let graph = Graph::from_edges(n, edges)?;
    let mut mu_sum = 0.0;
    let mut counted = 0;
    for v in 0..n {
        let d = graph.degree(v);
        if d > 0 {
            let out = graph
                .neighbors(v)
                .iter()
                .filter(|&&w| membership[w] != membership[v])
                .count();
            mu_sum += out as f64 / d as f64;
            counted += 1;
        }
    }
    let report = LfrReport {
        degree_sequence: degrees,
        community_sizes: sizes,
        achieved_mu: if counted > 0 { mu_sum / counted as f64 } else { 0.0 },
        dropped_stubs: dropped,
    };
    let mut gt = GroundTruth::unlabeled(graph);
    gt.communities = membership;
    Ok((gt, report))
}

/// Discrete power-law tail exponent by maximum likelihood with the usual
/// half-integer correction.
pub fn fit_tail_exponent(samples: &[usize], x_min: usize) -> f64 {
    let tail: Vec<f64> = samples
        .iter()
        .filter(|&&x| x >= x_min)
        .map(|&x| x as f64)
        .collect();
    let denom: f64 = tail.iter().map(|x| (x / (x_min as f64 - 0.5)).ln()).sum();
    1.0 + tail.len() as f64 / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> LfrParams {
        LfrParams {
            n: 600,
            tau1: 2.5,
            tau2: 1.5,
            mu: 0.2,
            avg_degree: 12.0,
            max_degree: 60,
            min_community: 60,
            max_community: 200,
        }
    }

    #[test]
    fn truncated_mean_matches_quadrature() {
        let (tau, lo, hi) = (2.5, 3.0, 40.0);
        let steps = 200_000;
        let h = (hi - lo) / steps as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..steps {
            let x = lo + (i as f64 + 0.5) * h;
            num += x * x.powf(-tau) * h;
            den += x.powf(-tau) * h;
        }
        assert!((truncated_mean(tau, lo, hi) - num / den).abs() < 1e-6);
    }

    #[test]
    fn zero_mixing_keeps_edges_inside_communities() {
        let p = LfrParams { mu: 0.0, ..base() };
        let (gt, report) = gen_lfr_with_report(&p, 5).unwrap();
        for (u, v) in gt.graph.edges() {
            assert_eq!(gt.communities[u], gt.communities[v]);
        }
        assert_eq!(report.achieved_mu, 0.0);
        assert_eq!(report.community_sizes.iter().sum::<usize>(), p.n);
        assert!(report
            .community_sizes
            .iter()
            .all(|&s| (p.min_community..=p.max_community).contains(&s)));
    }

    #[test]
    fn mixing_is_close_to_requested() {
        let (_, report) = gen_lfr_with_report(&base(), 11).unwrap();
        assert!((report.achieved_mu - 0.2).abs() < 0.05, "{}", report.achieved_mu);
    }

    #[test]
    fn infeasible_hub_is_rejected() {
        let p = LfrParams {
            max_degree: 300,
            max_community: 100,
            mu: 0.1,
            ..base()
        };
        assert!(matches!(gen_lfr(&p, 0), Err(Error::Config(_))));
    }

    #[test]
    fn deterministic() {
        assert_eq!(gen_lfr(&base(), 4).unwrap().graph, gen_lfr(&base(), 4).unwrap().graph);
    }
}
