use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, squared_distance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Linear,
    /// exp(-‖x−y‖² / 2σ²)
    Gaussian,
    /// (xᵀy + a)^b
    Polynomial,
    /// tanh(a·xᵀy + b)
    Sigmoid,
    /// exp(-‖x−y‖ / σ)
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default)]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
}

fn one() -> f64 {
    1.0
}

impl KernelSpec {
    pub fn linear() -> Self {
        KernelSpec {
            kind: KernelKind::Linear,
            sigma: 1.0,
            a: 0.0,
            b: 1.0,
        }
    }

    pub fn gaussian(sigma: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Gaussian,
            sigma,
            ..Self::linear()
        }
    }

    pub fn exponential(sigma: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Exponential,
            sigma,
            ..Self::linear()
        }
    }

    pub fn polynomial(a: f64, b: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Polynomial,
            sigma: 1.0,
            a,
            b,
        }
    }

    pub fn sigmoid(a: f64, b: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Sigmoid,
            sigma: 1.0,
            a,
            b,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            KernelKind::Gaussian | KernelKind::Exponential if !(self.sigma > 0.0) => Err(
                Error::InvalidArgument(format!("kernel sigma must be positive, got {}", self.sigma)),
            ),
            KernelKind::Polynomial if !(self.b >= 1.0) => Err(Error::InvalidArgument(format!(
                "polynomial degree must be at least 1, got {}",
                self.b
            ))),
            _ => Ok(()),
        }
    }

    /// κ(x, y) without the length check.
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Linear => dot(x, y),
            KernelKind::Gaussian => {
                (-squared_distance(x, y) / (2.0 * self.sigma * self.sigma)).exp()
            }
            KernelKind::Exponential => (-squared_distance(x, y).sqrt() / self.sigma).exp(),
            KernelKind::Polynomial => {
                let base = dot(x, y) + self.a;
                if self.b.fract() == 0.0 && self.b.abs() < i32::MAX as f64 {
                    base.powi(self.b as i32)
                } else {
                    base.powf(self.b)
                }
            }
            KernelKind::Sigmoid => (self.a * dot(x, y) + self.b).tanh(),
        }
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "kernel arguments have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(spec.eval_unchecked(x, y))
}

/// Symmetric Gram matrix of the rows.
pub fn gram_matrix(spec: &KernelSpec, rows: &[Vec<f64>]) -> DMatrix<f64> {
    let p = rows.len();
    let mut k = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let v = spec.eval_unchecked(&rows[i], &rows[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}
