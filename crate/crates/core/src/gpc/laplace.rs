//! Laplace approximation of the latent posterior p(f | X, y).
//!
//! Newton's method on Ψ(f) = log p(y|f) − ½(f−m)ᵀK⁻¹(f−m), carried in the
//! `a = K⁻¹(f−m)` parameterization so K is never inverted. Only the
//! well-conditioned B = I + W^½ K W^½ is factored.

use nalgebra::{DMatrix, DVector};

use super::likelihood::LikKind;
use crate::error::{Error, Result};

pub const GRADIENT_TOL: f64 = 1e-6;
pub const MAX_NEWTON_ITERS: usize = 100;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct LaplacePosterior {
    /// Latent mode f̂.
    pub mode: DVector<f64>,
    /// W = −∇∇ log p(y|f̂), diagonal.
    pub hessian_w: DVector<f64>,
    /// ∇ log p(y|f̂).
    pub grad_log_lik: DVector<f64>,
    /// Lower Cholesky factor of B = I + W^½ K W^½.
    pub cholesky_b: DMatrix<f64>,
    pub log_marginal: f64,
    pub iterations: usize,
    /// Ψ after each accepted Newton step, starting from the prior mean.
    pub psi_trace: Vec<f64>,
}

struct Point {
    a: DVector<f64>,
    f: DVector<f64>,
    psi: f64,
}

fn evaluate(k: &DMatrix<f64>, m: &DVector<f64>, y: &[f64], lik: LikKind, a: DVector<f64>) -> Point {
    let f = k * &a + m;
    let centered = &f - m;
    let log_lik: f64 = y
        .iter()
        .zip(f.iter())
        .map(|(&yi, &fi)| lik.derivs(yi, fi).log_p)
        .sum();
    let psi = log_lik - 0.5 * a.dot(&centered);
    Point { a, f, psi }
}

fn factor_b(k: &DMatrix<f64>, sqrt_w: &DVector<f64>) -> Result<DMatrix<f64>> {
    let p = k.nrows();
    let b = DMatrix::from_fn(p, p, |i, j| {
        let v = sqrt_w[i] * k[(i, j)] * sqrt_w[j];
        if i == j {
            1.0 + v
        } else {
            v
        }
    });
    b.cholesky().map(|c| c.unpack()).ok_or(Error::Cholesky {
        jitter: 0.0,
        mean_diag: k.diagonal().mean(),
    })
}

/// Posterior mode and Laplace evidence for covariance `k` (jitter already
/// added), prior mean vector `m`, and ±1 labels `y`.
pub fn laplace_fit(k: &DMatrix<f64>, m: &DVector<f64>, y: &[f64], lik: LikKind) -> Result<LaplacePosterior> {
    let p = y.len();
    if p == 0 {
        return Err(Error::NoSamples);
    }
    if k.nrows() != p || k.ncols() != p || m.len() != p {
        return Err(Error::Shape(format!(
            "covariance {}x{} and mean {} do not match {p} labels",
            k.nrows(),
            k.ncols(),
            m.len()
        )));
    }
    if let Some(bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidArgument(format!("labels must be +1 or -1, got {bad}")));
    }

    let mut cur = evaluate(k, m, y, lik, DVector::zeros(p));
    let mut trace = vec![cur.psi];
    let mut iterations = 0;
    loop {
        let derivs: Vec<_> = y
            .iter()
            .zip(cur.f.iter())
            .map(|(&yi, &fi)| lik.derivs(yi, fi))
            .collect();
        let g = DVector::from_iterator(p, derivs.iter().map(|d| d.d1));
        let w = DVector::from_iterator(p, derivs.iter().map(|d| (-d.d2).max(0.0)));
        let grad_norm = (&g - &cur.a).amax();
        let sqrt_w = w.map(f64::sqrt);
        let l = factor_b(k, &sqrt_w)?;

        if grad_norm <= GRADIENT_TOL {
            let log_det_half: f64 = l.diagonal().iter().map(|v| v.ln()).sum();
            return Ok(LaplacePosterior {
                mode: cur.f,
                hessian_w: w,
                grad_log_lik: g,
                cholesky_b: l,
                log_marginal: cur.psi - log_det_half,
                iterations,
                psi_trace: trace,
            });
        }
        if iterations == MAX_NEWTON_ITERS {
            return Err(Error::NotConverged {
                iterations,
                grad_norm,
            });
        }

        let b = w.component_mul(&(&cur.f - m)) + &g;
        let rhs = sqrt_w.component_mul(&(k * &b));
        let c = l
            .solve_lower_triangular(&rhs)
            .expect("cholesky factor has a positive diagonal");
        let back = l
            .transpose()
            .solve_upper_triangular(&c)
            .expect("cholesky factor has a positive diagonal");
        let a_newton = b - sqrt_w.component_mul(&back);
        let step = &a_newton - &cur.a;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand = evaluate(k, m, y, lik, &cur.a + &step * t);
            if cand.psi.is_finite() && cand.psi >= cur.psi {
                accepted = Some(cand);
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some(next) => {
                cur = next;
                trace.push(cur.psi);
            }
            None => {
                return Err(Error::NotConverged {
                    iterations,
                    grad_norm,
                })
            }
        }
        iterations += 1;
    }
}
