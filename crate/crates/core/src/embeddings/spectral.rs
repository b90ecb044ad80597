//! Spectral rankers: adjacency (PCA) and Laplacian (eigenmap, GLEE)
//! embeddings of the known graph.
//!
//! Every known edge touches a probed node, so the known adjacency matrix maps
//! into `span{e_p} + span{A e_p}` over probed nodes `p`, a subspace of
//! dimension at most twice the probe count. The adjacency eigenproblem is
//! solved exactly on an orthonormal basis of that subspace; all eigenvectors
//! with non-zero eigenvalue live there. Laplacian spectra have no such
//! structure and use a dense decomposition of the full observed graph.
//!
//! Returned eigenpairs are verified against the sparse operator; a residual
//! above tolerance is a convergence error.

use nalgebra::DMatrix;

use super::{mean_distance_scores, probed_target_locals, EmbedConfig, Ranking};
use crate::env::ObservedState;
use crate::error::{Error, Result};
use crate::linalg::{check_residuals, dot, orthonormal_basis, symmetric_eigen};

/// Which end of the Laplacian spectrum to embed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianEnd {
    /// Smallest eigenvalues, skipping one null vector per component.
    Smallest,
    /// Largest eigenvalues.
    Largest,
}

/// Node coordinates (one row per node) and the eigenvalues that produced
/// each column.
#[derive(Debug, Clone)]
pub struct SpectralEmbedding {
    pub values: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

fn adj_apply<'a>(adj: &'a [&'a [usize]]) -> impl Fn(&[f64], &mut [f64]) + 'a {
    move |x, out| {
        for (i, nb) in adj.iter().enumerate() {
            out[i] = nb.iter().map(|&j| x[j]).sum();
        }
    }
}

fn laplacian_apply<'a>(adj: &'a [&'a [usize]]) -> impl Fn(&[f64], &mut [f64]) + 'a {
    move |x, out| {
        for (i, nb) in adj.iter().enumerate() {
            out[i] = nb.len() as f64 * x[i] - nb.iter().map(|&j| x[j]).sum::<f64>();
        }
    }
}

/// Eigenpairs of the adjacency matrix restricted to its range-containing
/// subspace. `cover` must be a vertex cover (every edge has an endpoint in
/// it). Values ascending, vectors unit-norm.
pub fn adjacency_spectrum(
    adj: &[&[usize]],
    cover: &[usize],
    tol: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = adj.len();
    let mut in_cover = vec![false; n];
    cover.iter().for_each(|&c| in_cover[c] = true);
    for (i, nb) in adj.iter().enumerate() {
        if !in_cover[i] && nb.iter().any(|&j| !in_cover[j]) {
            return Err(Error::Contract(
                "adjacency spectrum needs a vertex cover of the known graph".into(),
            ));
        }
    }
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(2 * cover.len());
    for &c in cover {
        let mut e = vec![0.0; n];
        e[c] = 1.0;
        columns.push(e);
    }
    for &c in cover {
        let mut b = vec![0.0; n];
        for &j in adj[c] {
            if !in_cover[j] {
                b[j] = 1.0;
            }
        }
        columns.push(b);
    }
    let basis = orthonormal_basis(columns, 1e-10);
    let apply = adj_apply(adj);
    let r = basis.len();
    let mut image = vec![0.0; n];
    let mut images = Vec::with_capacity(r);
    for q in &basis {
        apply(q, &mut image);
        images.push(image.clone());
    }
    let reduced = DMatrix::from_fn(r, r, |i, j| {
        let v = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
        if v.abs() < 1e-15 {
            0.0
        } else {
            v
        }
    });
    let spec = symmetric_eigen(reduced);
    let vectors: Vec<Vec<f64>> = (0..r)
        .map(|k| {
            let y = spec.vectors.column(k);
            let mut v = vec![0.0; n];
            for (q, &w) in basis.iter().zip(y.iter()) {
                v.iter_mut().zip(q).for_each(|(a, b)| *a += w * b);
            }
            v
        })
        .collect();
    check_residuals("adjacency eigensolver", &apply, &spec.values, &vectors, tol)?;
    Ok((spec.values, vectors))
}

/// Full Laplacian spectrum of the graph, ascending.
pub fn laplacian_spectrum(adj: &[&[usize]]) -> (Vec<f64>, DMatrix<f64>) {
    let n = adj.len();
    let mut l = DMatrix::zeros(n, n);
    for (i, nb) in adj.iter().enumerate() {
        l[(i, i)] = nb.len() as f64;
        for &j in *nb {
            l[(i, j)] = -1.0;
        }
    }
    let spec = symmetric_eigen(l);
    (spec.values, spec.vectors)
}

fn local_adj(state: &ObservedState) -> Vec<&[usize]> {
    (0..state.observed_count()).map(|i| state.local_neighbors(i)).collect()
}

fn probed_locals(state: &ObservedState) -> Vec<usize> {
    (0..state.observed_count())
        .filter(|&i| state.local_label(i).is_some())
        .collect()
}

/// Adjacency spectral embedding: the `dim` eigenpairs of largest magnitude,
/// coordinates `v * sqrt(|lambda|)`. Columns beyond the rank are zero.
pub fn adjacency_embedding(state: &ObservedState, dim: usize, tol: f64) -> Result<SpectralEmbedding> {
    let adj = local_adj(state);
    let (values, vectors) = adjacency_spectrum(&adj, &probed_locals(state), tol)?;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(values[b].total_cmp(&values[a]))
    });
    idx.truncate(dim);
    let n = adj.len();
    let rows = (0..n)
        .map(|i| {
            let mut row = vec![0.0; dim];
            for (c, &k) in idx.iter().enumerate() {
                row[c] = vectors[k][i] * values[k].abs().sqrt();
            }
            row
        })
        .collect();
    Ok(SpectralEmbedding {
        values: idx.iter().map(|&k| values[k]).collect(),
        rows,
    })
}

/// Laplacian eigenmap coordinates from one end of the spectrum.
pub fn laplacian_embedding(
    state: &ObservedState,
    dim: usize,
    end: LaplacianEnd,
    tol: f64,
) -> Result<SpectralEmbedding> {
    let adj = local_adj(state);
    let n = adj.len();
    let (values, vectors) = laplacian_spectrum(&adj);
    let picked: Vec<usize> = match end {
        LaplacianEnd::Smallest => {
            let components = crate::graph::Graph::from_edges(
                n,
                adj.iter()
                    .enumerate()
                    .flat_map(|(i, nb)| nb.iter().map(move |&j| (i, j))),
            )?
            .components()
            .into_iter()
            .max()
            .map_or(0, |m| m + 1);
            (components..n).take(dim).collect()
        }
        LaplacianEnd::Largest => (0..n).rev().take(dim).collect(),
    };
    let picked_values: Vec<f64> = picked.iter().map(|&k| values[k]).collect();
    let picked_vectors: Vec<Vec<f64>> = picked
        .iter()
        .map(|&k| vectors.column(k).iter().copied().collect())
        .collect();
    check_residuals(
        "laplacian eigensolver",
        laplacian_apply(&adj),
        &picked_values,
        &picked_vectors,
        tol,
    )?;
    let rows = (0..n)
        .map(|i| {
            let mut row = vec![0.0; dim];
            for (c, v) in picked_vectors.iter().enumerate() {
                row[c] = v[i];
            }
            row
        })
        .collect();
    Ok(SpectralEmbedding {
        values: picked_values,
        rows,
    })
}

/// Score = |<emb(v), mean anchor embedding>|.
fn dot_with_anchor_mean(rows: &[Vec<f64>], anchors: &[usize]) -> Vec<f64> {
    let dim = rows.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; dim];
    for &a in anchors {
        mean.iter_mut().zip(&rows[a]).for_each(|(m, x)| *m += x);
    }
    if !anchors.is_empty() {
        mean.iter_mut().for_each(|m| *m /= anchors.len() as f64);
    }
    rows.iter().map(|r| dot(r, &mean).abs()).collect()
}

pub fn rank_pca(state: &ObservedState, cfg: &EmbedConfig) -> Result<Ranking> {
    let emb = adjacency_embedding(state, cfg.dim, cfg.eigen_tolerance)?;
    let scores = mean_distance_scores(&emb.rows, &probed_target_locals(state));
    Ok(Ranking::from_local_scores(state, &scores))
}

pub fn rank_eigenmap(state: &ObservedState, cfg: &EmbedConfig) -> Result<Ranking> {
    let emb = laplacian_embedding(state, cfg.dim, LaplacianEnd::Smallest, cfg.eigen_tolerance)?;
    let scores = dot_with_anchor_mean(&emb.rows, &probed_target_locals(state));
    Ok(Ranking::from_local_scores(state, &scores))
}

pub fn rank_glee(state: &ObservedState, cfg: &EmbedConfig) -> Result<Ranking> {
    let emb = laplacian_embedding(state, cfg.dim, LaplacianEnd::Largest, cfg.eigen_tolerance)?;
    let scores = dot_with_anchor_mean(&emb.rows, &probed_target_locals(state));
    Ok(Ranking::from_local_scores(state, &scores))
}
