//! Small dense linear-algebra helpers shared by the kernel methods.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

/// Relative jitter tried first, as a fraction of the mean diagonal.
pub const JITTER_START: f64 = 1e-8;
/// Largest relative jitter before giving up.
pub const JITTER_MAX: f64 = 1e-2;

/// Cholesky factor of `k + jitter·I`, escalating jitter ×10 from
/// `JITTER_START·mean(diag)` up to `JITTER_MAX·mean(diag)`.
///
/// Returns the factor and the absolute jitter that was added.
pub fn cholesky_with_jitter(k: &DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = k.nrows();
    let mean_diag = if n == 0 {
        0.0
    } else {
        k.diagonal().iter().sum::<f64>() / n as f64
    };
    let scale = if mean_diag > 0.0 { mean_diag } else { 1.0 };
    let mut rel = JITTER_START;
    loop {
        let jitter = rel * scale;
        let mut kj = k.clone();
        for i in 0..n {
            kj[(i, i)] += jitter;
        }
        if let Some(chol) = kj.cholesky() {
            return Ok((chol, jitter));
        }
        if rel >= JITTER_MAX * (1.0 - 1e-12) {
            return Err(Error::Cholesky { jitter, mean_diag });
        }
        rel *= 10.0;
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Median of the Euclidean distances between all distinct pairs of rows.
/// Falls back to 1 when every pair coincides or there is only one row.
pub fn median_pairwise_distance(rows: &[Vec<f64>]) -> f64 {
    let mut dists = Vec::with_capacity(rows.len() * rows.len().saturating_sub(1) / 2);
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            dists.push(squared_distance(&rows[i], &rows[j]).sqrt());
        }
    }
    match median(&mut dists) {
        Some(m) if m > 0.0 && m.is_finite() => m,
        _ => 1.0,
    }
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Rows of a row-major slice-of-vectors as a dense matrix.
pub fn rows_to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let ncols = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jitter_rescues_singular_matrix() {
        let k = DMatrix::from_element(3, 3, 1.0);
        let (chol, jitter) = cholesky_with_jitter(&k).unwrap();
        assert!((1e-8..=1e-2).contains(&jitter));
        assert_eq!(chol.l().nrows(), 3);
    }

    #[test]
    fn indefinite_matrix_fails_after_max_jitter() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            cholesky_with_jitter(&k),
            Err(Error::Cholesky { .. })
        ));
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn median_distance_of_unit_square() {
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ];
        // four sides of length 1, two diagonals of sqrt(2)
        assert_eq!(median_pairwise_distance(&rows), 1.0);
    }
}
