//! Kernel principal component analysis.
//!
//! The feature-space mapping is never formed: everything goes through the
//! P×P centered Gram matrix of the training rows.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::kernel::{gram_matrix, KernelSpec};
use crate::error::{Error, Result};

/// Components whose eigenvalue falls below this fraction of the largest
/// eigenvalue are dropped.
pub const RELATIVE_EIGEN_FLOOR: f64 = 1e-10;

/// Double-centers a square kernel matrix:
/// K' = K − 1ₚK − K1ₚ + 1ₚK1ₚ with 1ₚ the all-(1/P) matrix.
pub fn center_gram(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = k.nrows();
    if k.ncols() != p {
        return Err(Error::Shape(format!(
            "gram matrix must be square, got {}x{}",
            p,
            k.ncols()
        )));
    }
    if p == 0 {
        return Ok(k.clone());
    }
    let (row_means, col_means, grand) = gram_means(k);
    Ok(DMatrix::from_fn(p, p, |i, j| {
        k[(i, j)] - col_means[j] - row_means[i] + grand
    }))
}

fn gram_means(k: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>, f64) {
    let p = k.nrows() as f64;
    let row_means: Vec<f64> = (0..k.nrows())
        .map(|i| k.row(i).iter().sum::<f64>() / p)
        .collect();
    let col_means: Vec<f64> = (0..k.ncols())
        .map(|j| k.column(j).iter().sum::<f64>() / p)
        .collect();
    let grand = row_means.iter().sum::<f64>() / p;
    (row_means, col_means, grand)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpcaModel {
    pub kernel: KernelSpec,
    /// Training inputs, one row per sample.
    pub training_rows: Vec<Vec<f64>>,
    /// `alphas[k]` holds the P expansion coefficients of component k,
    /// scaled so that αₖᵀK'αₖ = 1.
    pub alphas: Vec<Vec<f64>>,
    /// Retained eigenvalues of the centered Gram, descending.
    pub eigenvalues: Vec<f64>,
    /// Row means of the uncentered training Gram.
    pub gram_row_means: Vec<f64>,
    pub gram_grand_mean: f64,
}

impl KpcaModel {
    pub fn n_components(&self) -> usize {
        self.alphas.len()
    }

    pub fn input_dim(&self) -> usize {
        self.training_rows.first().map_or(0, Vec::len)
    }

    /// Scores of a new point on every retained component. The kernel vector
    /// is centered against the training Gram before projecting.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "kpca input has length {}, model expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let kv: Vec<f64> = self
            .training_rows
            .iter()
            .map(|r| self.kernel.eval_unchecked(x, r))
            .collect();
        let p = kv.len() as f64;
        let kv_mean = kv.iter().sum::<f64>() / p;
        let centered: Vec<f64> = kv
            .iter()
            .zip(&self.gram_row_means)
            .map(|(k, rm)| k - kv_mean - rm + self.gram_grand_mean)
            .collect();
        Ok(self
            .alphas
            .iter()
            .map(|a| a.iter().zip(&centered).map(|(a, k)| a * k).sum())
            .collect())
    }
}

/// Fits KPCA and also returns the training scores (P rows of
/// `n_components` values) computed from the centered Gram.
pub fn kpca_fit_scores(
    rows: &[Vec<f64>],
    kernel: KernelSpec,
    n_components: usize,
) -> Result<(KpcaModel, Vec<Vec<f64>>)> {
    kernel.validate()?;
    let p = rows.len();
    if p < 2 {
        return Err(Error::InvalidArgument(format!(
            "kpca needs at least 2 training rows, got {p}"
        )));
    }
    if n_components < 1 || n_components > p {
        return Err(Error::InvalidArgument(format!(
            "n_components must be in 1..={p}, got {n_components}"
        )));
    }
    let m = rows[0].len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Shape("kpca training rows differ in length".into()));
    }

    let k = gram_matrix(&kernel, rows);
    let (row_means, _, grand) = gram_means(&k);
    let kc = center_gram(&k)?;
    let eig = kc.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let top = eig.eigenvalues[order[0]];
    let k_scale = k.amax().max(f64::MIN_POSITIVE);
    if !(top > 1e-12 * k_scale * p as f64) {
        return Err(Error::Degenerate(format!(
            "centered gram has no positive eigenvalue (largest {top:e})"
        )));
    }

    let mut alphas = Vec::new();
    let mut eigenvalues = Vec::new();
    for &idx in order.iter().take(n_components) {
        let lambda = eig.eigenvalues[idx];
        if lambda < RELATIVE_EIGEN_FLOOR * top {
            break;
        }
        let u = eig.eigenvectors.column(idx);
        let scale = 1.0 / lambda.sqrt();
        alphas.push(u.iter().map(|v| v * scale).collect::<Vec<f64>>());
        eigenvalues.push(lambda);
    }

    let mut scores = vec![vec![0.0; alphas.len()]; p];
    for (c, a) in alphas.iter().enumerate() {
        for (r, row) in scores.iter_mut().enumerate() {
            row[c] = (0..p).map(|j| kc[(r, j)] * a[j]).sum();
        }
    }

    let model = KpcaModel {
        kernel,
        training_rows: rows.to_vec(),
        alphas,
        eigenvalues,
        gram_row_means: row_means,
        gram_grand_mean: grand,
    };
    Ok((model, scores))
}

pub fn kpca_fit(rows: &[Vec<f64>], kernel: KernelSpec, n_components: usize) -> Result<KpcaModel> {
    kpca_fit_scores(rows, kernel, n_components).map(|(m, _)| m)
}
