//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;

/// Cyclic Jacobi eigenvalue iteration; returns (values ascending, vectors as
/// columns in matching order).
pub fn jacobi(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| a[x][x].total_cmp(&a[y][y]));
    let values = idx.iter().map(|&i| a[i][i]).collect();
    let vectors = idx.iter().map(|&i| v.iter().map(|row| row[i]).collect()).collect();
    (values, vectors)
}

/// PPR by solving (I - alpha W^T - alpha v d^T) x = (1 - alpha) v with
/// Gaussian elimination, where W is the random-walk matrix and d marks
/// dangling nodes.
pub fn ppr_oracle(adj: &[Vec<usize>], teleport: &[f64], alpha: f64) -> Vec<f64> {
    let n = adj.len();
    let mut m = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        m[i][i] += 1.0;
        m[i][n] = (1.0 - alpha) * teleport[i];
    }
    for (u, nb) in adj.iter().enumerate() {
        if nb.is_empty() {
            for (i, row) in m.iter_mut().enumerate() {
                row[u] -= alpha * teleport[i];
            }
        }
        for &w in nb {
            m[w][u] -= alpha / nb.len() as f64;
        }
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

pub fn random_adj(n: usize, p: f64, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    adj
}


pub fn edges_of(adj: &[Vec<usize>]) -> Vec<(usize, usize)> {
    adj.iter()
        .enumerate()
        .flat_map(|(u, nb)| nb.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
        .collect()
}

/// Three-sigma check of observed counts against multinomial probabilities.
pub fn assert_multinomial(counts: &[usize], probs: &[f64]) {
    let n: usize = counts.iter().sum();
    for (&c, &p) in counts.iter().zip(probs) {
        let mean = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (c as f64 - mean).abs() <= 3.0 * sd.max(1e-12),
            "count {c} vs expected {mean:.1} +- {sd:.1}"
        );
    }
}
