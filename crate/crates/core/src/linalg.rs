//! Dense symmetric eigensolvers with residual verification.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenpairs sorted by ascending eigenvalue; `vectors` holds unit-norm
/// eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i).iter().copied().collect()
    }
}

/// Full eigendecomposition of a symmetric matrix, ascending.
pub fn symmetric_eigen(m: DMatrix<f64>) -> Spectrum {
    let n = m.nrows();
    if n == 0 {
        return Spectrum {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(m);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    Spectrum { values, vectors }
}

/// Checks `||A v - lambda v|| <= tol * scale * ||v||` for every listed pair,
/// where `apply` computes `A v` and `scale` is `max(1, max |lambda|)`.
pub fn check_residuals<F>(
    solver: &'static str,
    apply: F,
    values: &[f64],
    vectors: &[Vec<f64>],
    tol: f64,
) -> Result<()>
where
    F: Fn(&[f64], &mut [f64]),
{
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut av = Vec::new();
    for (&lambda, v) in values.iter().zip(vectors) {
        av.clear();
        av.resize(v.len(), 0.0);
        apply(v, &mut av);
        let res = av
            .iter()
            .zip(v)
            .map(|(a, x)| (a - lambda * x).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        if res > tol * scale * norm {
            return Err(Error::Convergence {
                solver,
                residual: res / norm,
                tolerance: tol * scale,
            });
        }
    }
    Ok(())
}

/// Orthonormalizes `columns` by modified Gram-Schmidt (two passes), dropping
/// vectors whose remaining norm falls below `drop_tol` times their original
/// norm.
pub fn orthonormal_basis(columns: Vec<Vec<f64>>, drop_tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in columns {
        let orig = norm(&v);
        if orig == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let d = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= d * qi);
            }
        }
        let nv = norm(&v);
        if nv > drop_tol * orig {
            v.iter_mut().for_each(|x| *x /= nv);
            basis.push(v);
        }
    }
    basis
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
