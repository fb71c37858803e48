//! Deterministic PCA for producing low-dimensional conditioning embeddings.
//!
//! Eigendecomposition of the centered sample covariance (divisor `n − 1`) by
//! cyclic Jacobi rotations. Eigenvectors are ordered by decreasing eigenvalue
//! and sign-fixed so the first nonzero entry of each is positive, which makes
//! outputs reproducible across runs and platforms.

use crate::error::{Error, Result};

/// Result of [`pca_reduce`].
#[derive(Debug, Clone)]
pub struct PcaReduction {
    /// Column means of the input, subtracted before projection.
    pub mean: Vec<f64>,
    /// `features × target_dim` matrix whose columns are orthonormal
    /// eigenvectors of the covariance, by decreasing eigenvalue.
    pub basis: Vec<Vec<f64>>,
    /// Eigenvalues (explained variance) for the retained components.
    pub eigenvalues: Vec<f64>,
    /// `samples × target_dim` projections of the centered input.
    pub projected: Vec<Vec<f64>>,
}

impl PcaReduction {
    /// Project a new point onto the retained components.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.mean.len() {
            return Err(Error::invalid(format!(
                "pca projection dimension mismatch: expected {}, got {}",
                self.mean.len(),
                x.len()
            )));
        }
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(v, m)| v - m).collect();
        Ok((0..self.basis[0].len())
            .map(|c| (0..centered.len()).map(|r| centered[r] * self.basis[r][c]).sum())
            .collect())
    }
}

/// Reduce a `samples × features` matrix to `target_dim` principal components.
pub fn pca_reduce(matrix: &[Vec<f64>], target_dim: usize) -> Result<PcaReduction> {
    let samples = matrix.len();
    if samples < 2 {
        return Err(Error::invalid("pca needs at least 2 samples"));
    }
    let features = matrix[0].len();
    if matrix.iter().any(|r| r.len() != features) {
        return Err(Error::invalid("pca input rows have inconsistent lengths"));
    }
    if target_dim == 0 || target_dim > features.min(samples) {
        return Err(Error::invalid(format!(
            "target_dim must be in 1..=min(samples, features) = {}",
            features.min(samples)
        )));
    }

    let mut mean = vec![0.0; features];
    for row in matrix {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= samples as f64;
    }

    let centered: Vec<Vec<f64>> = matrix
        .iter()
        .map(|row| row.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();

    // Sample covariance with divisor n − 1.
    let mut cov = vec![0.0; features * features];
    for row in &centered {
        for i in 0..features {
            for j in i..features {
                cov[i * features + j] += row[i] * row[j];
            }
        }
    }
    let denom = (samples - 1) as f64;
    for i in 0..features {
        for j in i..features {
            let v = cov[i * features + j] / denom;
            cov[i * features + j] = v;
            cov[j * features + i] = v;
        }
    }

    let (mut eigenvalues, mut vectors) = jacobi_eigen(&mut cov, features);

    // Sort eigenpairs by decreasing eigenvalue, deterministically.
    let mut order: Vec<usize> = (0..features).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]).then(a.cmp(&b)));
    eigenvalues = order.iter().map(|&i| eigenvalues[i]).collect();
    vectors = (0..features)
        .map(|r| order.iter().map(|&c| vectors[r][c]).collect())
        .collect();

    // Sign convention: first entry of each eigenvector with magnitude above
    // tolerance is positive.
    for c in 0..features {
        let lead = (0..features).find(|&r| vectors[r][c].abs() > 1e-12);
        if let Some(r) = lead {
            if vectors[r][c] < 0.0 {
                for row in vectors.iter_mut() {
                    row[c] = -row[c];
                }
            }
        }
    }

    let basis: Vec<Vec<f64>> =
        vectors.iter().map(|row| row[..target_dim].to_vec()).collect();
    let eigenvalues = eigenvalues[..target_dim].to_vec();
    let projected: Vec<Vec<f64>> = centered
        .iter()
        .map(|row| {
            (0..target_dim)
                .map(|c| (0..features).map(|r| row[r] * basis[r][c]).sum())
                .collect()
        })
        .collect();

    Ok(PcaReduction { mean, basis, eigenvalues, projected })
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major,
/// destroyed in place). Returns eigenvalues and the rotation accumulator
/// whose columns are the eigenvectors.
fn jacobi_eigen(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let idx = |i: usize, j: usize| i * n + j;

    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[idx(i, j)] * a[idx(i, j)];
            }
        }
        s
    };
    let scale: f64 = (0..n).map(|i| a[idx(i, i)].abs()).fold(1.0, f64::max);
    let tol = (scale * 1e-14).powi(2).max(1e-300);

    for _sweep in 0..100 {
        if off(a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[idx(q, q)] - a[idx(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let eigenvalues: Vec<f64> = (0..n).map(|i| a[idx(i, i)]).collect();
    (eigenvalues, v)
}
