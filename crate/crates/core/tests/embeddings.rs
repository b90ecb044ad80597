use harvest_core::embeddings::{
    adjacency_embedding, adjacency_spectrum, compress, laplacian_embedding, personalized_pagerank,
    rank, rank_mod, rank_node2vec, rank_ppr, Algorithm, EmbedConfig, LaplacianEnd, Ranking,
};
use harvest_core::generators::{gen_sbm, implant_foreground, ForegroundParams, SbmParams};
use harvest_core::{seeds, EpisodeConfig, Graph, GroundTruth, ObservedState};
use proptest::prelude::*;

mod common;
use common::{jacobi, ppr_oracle, random_adj};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

#[test]
fn ppr_matches_linear_solve() {
    let mut rng = seeds::rng(17);
    for _ in 0..50 {
        let n = rng.random_range(2..=12);
        let adj = random_adj(n, rng.random_range(0.1..0.6), &mut rng);
        let mut anchors: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < 0.3).collect();
        if anchors.is_empty() {
            anchors.push(0);
        }
        let mut teleport = vec![0.0; n];
        anchors.iter().for_each(|&a| teleport[a] = 1.0 / anchors.len() as f64);
        let refs: Vec<&[usize]> = adj.iter().map(Vec::as_slice).collect();
        let run = personalized_pagerank(&refs, &teleport, 0.8, 1e-12, 10_000).unwrap();
        let oracle = ppr_oracle(&adj, &teleport, 0.8);
        for (a, b) in run.scores.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
    }
}

/// Ground truth from edges with the listed targets, and the state after
/// probing `probes` from seed `targets[0]`.
fn state_for(n: usize, edges: &[(usize, usize)], targets: &[usize], probes: &[usize]) -> (GroundTruth, ObservedState) {
    let mut gt = GroundTruth::unlabeled(Graph::from_edges(n, edges.iter().copied()).unwrap());
    for &t in targets {
        gt.labels[t] = true;
    }
    let mut s = ObservedState::reset(&gt, &EpisodeConfig::new(targets[0], 100)).unwrap();
    for &p in probes {
        s.probe(&gt, p).unwrap();
    }
    (gt, s)
}

fn dense_known_adjacency(s: &ObservedState) -> Vec<Vec<f64>> {
    let n = s.observed_count();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for &j in s.local_neighbors(i) {
            a[i][j] = 1.0;
        }
    }
    a
}

#[test]
fn adjacency_eigenpairs_match_dense_oracle() {
    let mut rng = seeds::rng(5);
    for trial in 0..20 {
        let adj = random_adj(8, 0.45, &mut rng);
        let edges: Vec<(usize, usize)> = adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().map(move |&v| (u, v)))
            .collect();
        if adj[0].is_empty() {
            continue;
        }
        let mut gt = GroundTruth::unlabeled(Graph::from_edges(8, edges).unwrap());
        gt.labels[0] = true;
        let mut s = ObservedState::reset(&gt, &EpisodeConfig::new(0, 100)).unwrap();
        for _ in 0..(trial % 4) {
            if let Some(&b) = s.boundary().iter().next() {
                s.probe(&gt, b).unwrap();
            }
        }
        let (oracle_values, _) = jacobi(dense_known_adjacency(&s));
        let refs: Vec<&[usize]> = (0..s.observed_count()).map(|i| s.local_neighbors(i)).collect();
        let cover: Vec<usize> = (0..s.observed_count()).filter(|&i| s.local_label(i).is_some()).collect();
        let (values, vectors) = adjacency_spectrum(&refs, &cover, 1e-8).unwrap();
        let mut nonzero_oracle: Vec<f64> = oracle_values.into_iter().filter(|v| v.abs() > 1e-9).collect();
        let mut nonzero: Vec<f64> = values.iter().copied().filter(|v| v.abs() > 1e-9).collect();
        nonzero_oracle.sort_by(f64::total_cmp);
        nonzero.sort_by(f64::total_cmp);
        assert_eq!(nonzero.len(), nonzero_oracle.len());
        for (a, b) in nonzero.iter().zip(&nonzero_oracle) {
            assert!((a - b).abs() <= 1e-6 * b.abs(), "{a} vs {b}");
        }
        // Residuals against the dense matrix.
        let dense = dense_known_adjacency(&s);
        for (&l, v) in values.iter().zip(&vectors) {
            let res: f64 = (0..v.len())
                .map(|i| {
                    let av: f64 = (0..v.len()).map(|j| dense[i][j] * v[j]).sum();
                    (av - l * v[i]).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            assert!(res <= 1e-6);
        }
        let emb = adjacency_embedding(&s, 3, 1e-8).unwrap();
        assert_eq!(emb.rows.len(), s.observed_count());
        assert!(emb.rows.iter().all(|r| r.len() == 3));
    }
}

/// Path 0-1-2-3, fully observed.
fn path4() -> ObservedState {
    state_for(4, &[(0, 1), (1, 2), (2, 3)], &[0], &[1, 2]).1
}

fn assert_parallel(got: &[f64], want: &[f64]) {
    let norm: f64 = want.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot: f64 = got.iter().zip(want).map(|(a, b)| a * b).sum::<f64>() / norm;
    let sign = dot.signum();
    for (g, w) in got.iter().zip(want) {
        assert!((g - sign * w / norm).abs() < 1e-8, "{got:?} vs {want:?}");
    }
}

#[test]
fn path_laplacian_matches_cosine_form() {
    let s = path4();
    assert_eq!(s.observed(), &[0, 1, 2, 3]);
    let cosine = |k: f64| -> Vec<f64> {
        (0..4)
            .map(|j| (std::f64::consts::PI * k * (j as f64 + 0.5) / 4.0).cos())
            .collect()
    };
    let small = laplacian_embedding(&s, 1, LaplacianEnd::Smallest, 1e-8).unwrap();
    let fiedler: Vec<f64> = small.rows.iter().map(|r| r[0]).collect();
    assert!((small.values[0] - (2.0 - 2.0 * (std::f64::consts::PI / 4.0).cos())).abs() < 1e-10);
    assert_parallel(&fiedler, &cosine(1.0));
    let large = laplacian_embedding(&s, 1, LaplacianEnd::Largest, 1e-8).unwrap();
    let top: Vec<f64> = large.rows.iter().map(|r| r[0]).collect();
    assert!((large.values[0] - (2.0 - 2.0 * (3.0 * std::f64::consts::PI / 4.0).cos())).abs() < 1e-10);
    assert_parallel(&top, &cosine(3.0));
}

#[test]
fn laplacian_eigenpairs_match_dense_oracle() {
    let mut rng = seeds::rng(23);
    for _ in 0..10 {
        let adj = random_adj(8, 0.5, &mut rng);
        let edges: Vec<(usize, usize)> = adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().map(move |&v| (u, v)))
            .collect();
        let mut gt = GroundTruth::unlabeled(Graph::from_edges(8, edges).unwrap());
        gt.labels[0] = true;
        let mut s = ObservedState::reset(&gt, &EpisodeConfig::new(0, 100)).unwrap();
        while let Some(&b) = s.boundary().iter().next() {
            s.probe(&gt, b).unwrap();
        }
        let n = s.observed_count();
        let mut l = dense_known_adjacency(&s);
        for (i, row) in l.iter_mut().enumerate() {
            let d: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x = -*x);
            row[i] = d;
        }
        let (oracle, _) = jacobi(l);
        let low = laplacian_embedding(&s, n, LaplacianEnd::Smallest, 1e-8).unwrap();
        // One zero per component is skipped.
        let skipped = n - low.values.len();
        for (a, b) in low.values.iter().zip(&oracle[skipped..]) {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0));
        }
        let high = laplacian_embedding(&s, 2, LaplacianEnd::Largest, 1e-8).unwrap();
        assert!((high.values[0] - oracle[n - 1]).abs() <= 1e-6 * oracle[n - 1].max(1.0));
    }
}

#[test]
fn connected_laplacian_null_vector_is_constant() {
    let s = path4();
    let all = laplacian_embedding(&s, 4, LaplacianEnd::Largest, 1e-8).unwrap();
    // Largest-first order: the last column is the null vector.
    let null: Vec<f64> = all.rows.iter().map(|r| r[3]).collect();
    assert!(all.values[3].abs() < 1e-10);
    for x in &null {
        assert!((x - null[0]).abs() < 1e-8);
    }
}

#[test]
fn mod_ranks_clique_members_first() {
    // Clique {0,1,2,3} of targets; 4 hangs off 0, 5 off 1.
    let edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (0, 4), (1, 5)];
    let (gt, s) = state_for(6, &edges, &[0, 1, 2, 3], &[1]);
    let r = rank_mod(&s).filtered(|v| s.boundary().contains(&v));
    // Exhaustive count from ground truth over probed targets.
    let count = |v: usize| s.probed().iter().filter(|&&p| gt.labels[p] && gt.graph.has_edge(p, v)).count();
    for (&v, &score) in r.order().iter().zip(r.scores()) {
        assert_eq!(score, count(v) as f64);
    }
    assert_eq!(&r.order()[..2], &[2, 3]);
}

#[test]
fn star_of_targets_puts_common_neighbor_first() {
    // Targets 0,1,2 around a background hub 3; 4 and 5 hang off 0 and 1.
    let edges = [(0, 3), (1, 3), (2, 3), (0, 1), (1, 2), (0, 4), (1, 5)];
    let (_, s) = state_for(6, &edges, &[0, 1, 2], &[1, 2]);
    let boundary = |r: Ranking| r.filtered(|v| s.boundary().contains(&v)).order()[0];
    assert_eq!(boundary(rank_mod(&s)), 3);
    assert_eq!(boundary(rank_ppr(&s, &EmbedConfig::default()).unwrap()), 3);
}

fn clique_instance(seed: u64) -> GroundTruth {
    let bg = gen_sbm(&SbmParams { n: 300, p: vec![0.02], r: 0.0 }, seed).unwrap();
    let fg = ForegroundParams { size: 40, count: 1, p: 1.0, min_gap: 0, max_gap: 0 };
    implant_foreground(&bg, &fg, seed + 1000).unwrap()
}

#[test]
fn node2vec_prefers_clique_members() {
    let cfg = EmbedConfig { dim: 32, ..EmbedConfig::with_algorithm(Algorithm::Node2vec) };
    let mut wins = 0;
    for seed in 0..10 {
        let gt = clique_instance(seed);
        let cfg_ep = EpisodeConfig::sample(&gt, 10, seed).unwrap();
        let mut s = ObservedState::reset(&gt, &cfg_ep).unwrap();
        // Probe a few clique members so the anchor set is not a single node.
        for _ in 0..3 {
            let t = *s.boundary().iter().find(|&&v| gt.labels[v]).unwrap();
            s.probe(&gt, t).unwrap();
        }
        let r = rank_node2vec(&s, &cfg, seed).unwrap().filtered(|v| s.boundary().contains(&v));
        let (mut tsum, mut tn, mut bsum, mut bn) = (0.0, 0.0, 0.0, 0.0);
        for (pos, &v) in r.order().iter().enumerate() {
            if gt.labels[v] {
                tsum += pos as f64;
                tn += 1.0;
            } else {
                bsum += pos as f64;
                bn += 1.0;
            }
        }
        if tsum / tn < bsum / bn {
            wins += 1;
        }
    }
    assert!(wins >= 9, "clique mean rank better on {wins}/10 seeds");
}

#[test]
fn node2vec_is_seeded() {
    let gt = clique_instance(3);
    let s = ObservedState::reset(&gt, &EpisodeConfig::sample(&gt, 5, 1).unwrap()).unwrap();
    let cfg = EmbedConfig { dim: 16, ..EmbedConfig::with_algorithm(Algorithm::Node2vec) };
    assert_eq!(rank_node2vec(&s, &cfg, 7).unwrap(), rank_node2vec(&s, &cfg, 7).unwrap());
    assert_ne!(
        rank_node2vec(&s, &cfg, 7).unwrap().scores(),
        rank_node2vec(&s, &cfg, 8).unwrap().scores()
    );
}

#[test]
fn node2vec_is_exchangeable_across_mirror_components() {
    // Two copies of the same 12-node graph; node i mirrors node i + 12. The
    // seed sits in copy A and its mirror is revealed, so both copies are
    // observed symmetrically.
    let mut rng = seeds::rng(31);
    let half = random_adj(12, 0.35, &mut rng);
    let mut edges = Vec::new();
    for (u, nb) in half.iter().enumerate() {
        for &v in nb {
            edges.push((u, v));
            edges.push((u + 12, v + 12));
        }
    }
    edges.push((0, 1));
    edges.push((12, 13));
    let mut gt = GroundTruth::unlabeled(Graph::from_edges(24, edges).unwrap());
    gt.labels[0] = true;
    gt.labels[12] = true;
    let cfg_ep = EpisodeConfig { extra_revealed: vec![12], ..EpisodeConfig::new(0, 10) };
    let s = ObservedState::reset(&gt, &cfg_ep).unwrap();
    let cfg = EmbedConfig { dim: 8, ..EmbedConfig::with_algorithm(Algorithm::Node2vec) };
    let mut a_better = 0;
    for seed in 0..20 {
        let r = rank_node2vec(&s, &cfg, seed).unwrap();
        let pos = r.positions();
        let (mut a, mut b) = (0.0, 0.0);
        for &v in s.boundary() {
            if v < 12 {
                a += pos[&v] as f64;
            } else {
                b += pos[&v] as f64;
            }
        }
        if a < b {
            a_better += 1;
        }
    }
    // Two-sided sign test at roughly the 1% level.
    assert!((4..=16).contains(&a_better), "copy A ranked better on {a_better}/20 seeds");
}

fn small_state() -> impl Strategy<Value = (GroundTruth, ObservedState)> {
    (3usize..12, any::<u64>(), 0usize..5).prop_map(|(n, seed, probes)| {
        let mut rng = seeds::rng(seed);
        let adj = random_adj(n, 0.4, &mut rng);
        let edges: Vec<(usize, usize)> = adj
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().map(move |&v| (u, v)))
            .collect();
        let mut gt = GroundTruth::unlabeled(Graph::from_edges(n, edges).unwrap());
        for v in 0..n {
            gt.labels[v] = v == 0 || rng.random::<f64>() < 0.4;
        }
        let mut s = ObservedState::reset(&gt, &EpisodeConfig::new(0, 100)).unwrap();
        for _ in 0..probes {
            let b: Vec<usize> = s.boundary().iter().copied().collect();
            if let Some(&v) = b.choose(&mut rng) {
                s.probe(&gt, v).unwrap();
            }
        }
        (gt, s)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_ranker_returns_a_permutation((_gt, s) in small_state()) {
        for alg in Algorithm::ALL {
            let cfg = EmbedConfig { dim: 4, ..EmbedConfig::with_algorithm(alg) };
            let r = rank(&s, &cfg, 1).unwrap();
            let mut nodes = r.order().to_vec();
            nodes.sort_unstable();
            let mut observed = s.observed().to_vec();
            observed.sort_unstable();
            prop_assert_eq!(nodes, observed);
            for w in r.order().windows(2).zip(r.scores().windows(2)) {
                let (v, sc) = w;
                prop_assert!(sc[0] > sc[1] || (sc[0] == sc[1] && v[0] < v[1]));
            }
        }
    }

    #[test]
    fn ppr_mass_is_one((_gt, s) in small_state()) {
        let r = rank_ppr(&s, &EmbedConfig::default()).unwrap();
        prop_assert!((r.scores().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn compress_is_pure_and_padded((_gt, s) in small_state(), k in 1usize..20) {
        let r = rank_ppr(&s, &EmbedConfig::default()).unwrap();
        let a = compress(&s, &r, k);
        let b = compress(&s, &r, k);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.tensor.len(), 2 * k * k);
        for (slot, m) in a.slots.iter().zip(&a.mask) {
            match slot {
                None => prop_assert!(!m),
                Some(v) => prop_assert_eq!(*m, s.boundary().contains(v)),
            }
        }
        if k >= s.observed_count() {
            // No truncation: channel 0 is the permuted known adjacency.
            for i in 0..s.observed_count() {
                for j in 0..s.observed_count() {
                    let (u, v) = (a.slots[i].unwrap(), a.slots[j].unwrap());
                    prop_assert_eq!(a.adj(i, j) == 1.0, s.has_known_edge(u, v));
                }
            }
        }
    }

    #[test]
    fn compress_ignores_node_ids(seed in any::<u64>(), k in 2usize..12) {
        let mut rng = seeds::rng(seed);
        let n = 10;
        let adj = random_adj(n, 0.35, &mut rng);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let labels: Vec<bool> = (0..n).map(|v| v == 0 || rng.random::<f64>() < 0.3).collect();
        let build = |map: &dyn Fn(usize) -> usize| {
            let edges: Vec<(usize, usize)> = adj
                .iter()
                .enumerate()
                .flat_map(|(u, nb)| nb.iter().map(move |&v| (map(u), map(v))))
                .collect();
            let mut gt = GroundTruth::unlabeled(Graph::from_edges(n, edges).unwrap());
            for v in 0..n {
                gt.labels[map(v)] = labels[v];
            }
            gt
        };
        let gt_a = build(&|v| v);
        let gt_b = build(&|v| perm[v]);
        let mut sa = ObservedState::reset(&gt_a, &EpisodeConfig::new(0, 100)).unwrap();
        let mut sb = ObservedState::reset(&gt_b, &EpisodeConfig::new(perm[0], 100)).unwrap();
        for _ in 0..3 {
            let Some(&v) = sa.boundary().iter().next() else { break };
            sa.probe(&gt_a, v).unwrap();
            sb.probe(&gt_b, perm[v]).unwrap();
        }
        let ra = rank_ppr(&sa, &EmbedConfig::default()).unwrap();
        let rb = rank_ppr(&sb, &EmbedConfig::default()).unwrap();
        let distinct = ra.scores().windows(2).all(|w| w[0] - w[1] > 1e-9);
        prop_assume!(distinct);
        let ca = compress(&sa, &ra, k);
        let cb = compress(&sb, &rb, k);
        prop_assert_eq!(&ca.tensor, &cb.tensor);
        prop_assert_eq!(&ca.mask, &cb.mask);
        let mapped: Vec<Option<usize>> = ca.slots.iter().map(|s| s.map(|v| perm[v])).collect();
        prop_assert_eq!(mapped, cb.slots);
    }
}
