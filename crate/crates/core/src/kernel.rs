//! RBF kernel on conditioning embeddings and Gram-matrix assembly.
//!
//! The localization kernel is `W(x, y) = exp(−ξ‖x − y‖²)`. Only the RBF
//! family ships: it is the one the coverage-gap analysis relies on, since
//! `W(x, ·)` must define a density up to normalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel family and bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Bandwidth ξ; larger values localize harder.
    pub bandwidth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Rbf,
}

impl KernelSpec {
    pub fn rbf(bandwidth: f64) -> Result<Self> {
        if !bandwidth.is_finite() || bandwidth <= 0.0 {
            return Err(Error::invalid(format!("bandwidth must be positive, got {bandwidth}")));
        }
        Ok(KernelSpec { family: KernelFamily::Rbf, bandwidth })
    }

    /// Evaluate the kernel on a pair of points.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self.family {
            KernelFamily::Rbf => rbf_eval(x, y, self.bandwidth),
        }
    }
}

fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `exp(−ξ‖x−y‖²)`; lies in `(0, 1]` with value 1 iff `x = y`.
pub fn rbf_eval(x: &[f64], y: &[f64], xi: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "kernel dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if !xi.is_finite() || xi <= 0.0 {
        return Err(Error::invalid(format!("bandwidth must be positive, got {xi}")));
    }
    Ok((-xi * squared_distance(x, y)).exp())
}

/// Square symmetric matrix of kernel evaluations over a fixed anchor set.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    /// Number of anchors.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Build from raw row-major entries; callers must supply a symmetric
    /// matrix of matching size.
    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::invalid("gram data size does not match dimension"));
        }
        Ok(GramMatrix { n, data })
    }

    /// Extend an `n×n` Gram over calibration anchors with one extra anchor,
    /// given that anchor's kernel row against the originals. Used to share
    /// the calibration block across test points.
    pub fn bordered(&self, cross: &[f64], diag: f64) -> Result<GramMatrix> {
        if cross.len() != self.n {
            return Err(Error::invalid("border row length does not match gram size"));
        }
        let m = self.n + 1;
        let mut data = vec![0.0; m * m];
        for i in 0..self.n {
            data[i * m..i * m + self.n].copy_from_slice(self.row(i));
            data[i * m + self.n] = cross[i];
            data[self.n * m + i] = cross[i];
        }
        data[self.n * m + self.n] = diag;
        Ok(GramMatrix { n: m, data })
    }

    pub(crate) fn add_jitter(&mut self, eps: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += eps;
        }
    }
}

/// Pairwise kernel matrix over an anchor set; symmetric by construction.
pub fn gram(anchors: &[Vec<f64>], spec: &KernelSpec) -> Result<GramMatrix> {
    if anchors.is_empty() {
        return Err(Error::invalid("gram of an empty anchor set"));
    }
    let n = anchors.len();
    let dim = anchors[0].len();
    if let Some(bad) = anchors.iter().find(|a| a.len() != dim) {
        return Err(Error::invalid(format!(
            "anchor dimension mismatch: expected {dim}, found {}",
            bad.len()
        )));
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let v = spec.eval(&anchors[i], &anchors[j])?;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    Ok(GramMatrix { n, data })
}

/// Median-heuristic bandwidth: `ξ = 1 / median(pairwise squared distances)`.
///
/// Used when the bandwidth is configured as `auto` and no externally
/// cross-validated value is supplied.
pub fn median_heuristic_bandwidth(anchors: &[Vec<f64>]) -> Result<f64> {
    if anchors.len() < 2 {
        return Err(Error::invalid("median heuristic needs at least 2 anchors"));
    }
    let dim = anchors[0].len();
    if anchors.iter().any(|a| a.len() != dim) {
        return Err(Error::invalid("anchor dimension mismatch"));
    }
    let mut dists = Vec::with_capacity(anchors.len() * (anchors.len() - 1) / 2);
    for i in 0..anchors.len() {
        for j in (i + 1)..anchors.len() {
            dists.push(squared_distance(&anchors[i], &anchors[j]));
        }
    }
    dists.sort_by(|a, b| a.total_cmp(b));
    let mid = dists.len() / 2;
    let median = if dists.len() % 2 == 1 {
        dists[mid]
    } else {
        0.5 * (dists[mid - 1] + dists[mid])
    };
    if median <= 0.0 {
        return Err(Error::invalid(
            "median pairwise distance is zero (anchors are duplicated)",
        ));
    }
    Ok(1.0 / median)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rbf_is_one_at_zero_distance() {
        let x = vec![0.3, -1.2];
        assert_eq!(rbf_eval(&x, &x, 2.5).unwrap(), 1.0);
    }

    #[test]
    fn rbf_unit_distance() {
        let v = rbf_eval(&[0.0, 0.0], &[1.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(v, (-1.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn rbf_decays_monotonically_in_bandwidth() {
        let mut prev = 1.0;
        for xi in [0.5, 1.0, 2.0, 8.0, 64.0] {
            let v = rbf_eval(&[0.0], &[0.7], xi).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn rbf_rejects_bad_inputs() {
        assert!(rbf_eval(&[0.0], &[0.0, 1.0], 1.0).is_err());
        assert!(rbf_eval(&[0.0], &[1.0], 0.0).is_err());
        assert!(rbf_eval(&[0.0], &[1.0], -1.0).is_err());
    }

    #[test]
    fn gram_single_anchor() {
        let g = gram(&[vec![1.0, 2.0]], &KernelSpec::rbf(1.0).unwrap()).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.get(0, 0), 1.0);
    }

    #[test]
    fn gram_identical_anchors_all_ones() {
        let a = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let g = gram(&a, &KernelSpec::rbf(3.0).unwrap()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(g.get(i, j), 1.0);
            }
        }
    }

    #[test]
    fn gram_matches_elementwise_evaluation() {
        let anchors = vec![vec![0.1, -0.4], vec![1.3, 0.2], vec![-0.7, 0.9]];
        let spec = KernelSpec::rbf(0.8).unwrap();
        let g = gram(&anchors, &spec).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let direct = spec.eval(&anchors[i], &anchors[j]).unwrap();
                assert_relative_eq!(g.get(i, j), direct, max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn bordered_gram_appends_row_and_column() {
        let anchors = vec![vec![0.0], vec![1.0]];
        let spec = KernelSpec::rbf(1.0).unwrap();
        let base = gram(&anchors, &spec).unwrap();
        let cross = vec![
            spec.eval(&[2.0], &anchors[0]).unwrap(),
            spec.eval(&[2.0], &anchors[1]).unwrap(),
        ];
        let full = base.bordered(&cross, 1.0).unwrap();
        let direct = gram(&[vec![0.0], vec![1.0], vec![2.0]], &spec).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(full.get(i, j), direct.get(i, j));
            }
        }
    }

    #[test]
    fn median_bandwidth_two_points() {
        let xi = median_heuristic_bandwidth(&[vec![0.0], vec![2.0]]).unwrap();
        assert_relative_eq!(xi, 0.25, max_relative = 1e-15);
    }

    #[test]
    fn median_bandwidth_three_collinear_points() {
        let xi = median_heuristic_bandwidth(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        assert_relative_eq!(xi, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn median_bandwidth_duplicates_rejected() {
        let p = vec![0.3, 0.3];
        assert!(median_heuristic_bandwidth(&[p.clone(), p]).is_err());
    }

    /// Power iteration estimate of the smallest eigenvalue via shifting;
    /// enough to confirm there is no substantially negative eigenvalue.
    fn min_eigenvalue(g: &GramMatrix) -> f64 {
        let n = g.len();
        // Largest eigenvalue of (c·I − G) gives c − λ_min; c = n bounds the
        // spectral radius since entries are in [0, 1].
        let c = n as f64;
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        for _ in 0..600 {
            let mut w = vec![0.0; n];
            for i in 0..n {
                let gi = g.row(i);
                let mut acc = c * v[i];
                for j in 0..n {
                    acc -= gi[j] * v[j];
                }
                w[i] = acc;
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                return c;
            }
            for x in &mut w {
                *x /= norm;
            }
            v = w;
        }
        let mut rayleigh = 0.0;
        for i in 0..n {
            let gi = g.row(i);
            let mut acc = c * v[i];
            for j in 0..n {
                acc -= gi[j] * v[j];
            }
            rayleigh += v[i] * acc;
        }
        c - rayleigh
    }

    proptest! {
        #[test]
        fn rbf_is_symmetric(
            x in prop::collection::vec(-3.0f64..3.0, 1..5),
            y_seed in prop::collection::vec(-3.0f64..3.0, 1..5),
            xi in 0.1f64..5.0,
        ) {
            let y: Vec<f64> = y_seed.iter().cycle().take(x.len()).copied().collect();
            prop_assert_eq!(
                rbf_eval(&x, &y, xi).unwrap(),
                rbf_eval(&y, &x, xi).unwrap()
            );
        }

        #[test]
        fn gram_is_positive_semidefinite(
            flat in prop::collection::vec(-2.0f64..2.0, 4..24),
            xi in 0.1f64..4.0,
        ) {
            let anchors: Vec<Vec<f64>> = flat.chunks_exact(2).map(|c| c.to_vec()).collect();
            prop_assume!(anchors.len() >= 2);
            let g = gram(&anchors, &KernelSpec::rbf(xi).unwrap()).unwrap();
            prop_assert!(min_eigenvalue(&g) >= -1e-8);
        }
    }
}
