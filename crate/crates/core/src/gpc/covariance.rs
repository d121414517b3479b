use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovKind {
    SquaredExponential,
    RationalQuadratic,
    #[serde(rename = "matern-3/2", alias = "matern32")]
    Matern32,
}

/// Stationary covariance with signal std `sigma_f` and either one shared
/// length scale or one per input dimension (ARD).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub kind: CovKind,
    pub ard: bool,
    pub sigma_f: f64,
    pub length_scales: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_rq: Option<f64>,
}

impl CovarianceSpec {
    pub fn isotropic(kind: CovKind, sigma_f: f64, length_scale: f64) -> Self {
        CovarianceSpec {
            kind,
            ard: false,
            sigma_f,
            length_scales: vec![length_scale],
            alpha_rq: (kind == CovKind::RationalQuadratic).then_some(1.0),
        }
    }

    pub fn ard(kind: CovKind, sigma_f: f64, length_scales: Vec<f64>) -> Self {
        CovarianceSpec {
            kind,
            ard: true,
            sigma_f,
            length_scales,
            alpha_rq: (kind == CovKind::RationalQuadratic).then_some(1.0),
        }
    }

    pub fn validate(&self, dim: Option<usize>) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.sigma_f) || !self.length_scales.iter().all(|&l| positive(l)) {
            return Err(Error::InvalidArgument(
                "covariance parameters must be positive and finite".into(),
            ));
        }
        match (self.kind, self.alpha_rq) {
            (CovKind::RationalQuadratic, Some(a)) if positive(a) => {}
            (CovKind::RationalQuadratic, _) => {
                return Err(Error::InvalidArgument(
                    "rational quadratic needs a positive alpha".into(),
                ))
            }
            (_, Some(_)) => {
                return Err(Error::InvalidArgument(
                    "alpha is only used by the rational quadratic".into(),
                ))
            }
            _ => {}
        }
        let expected = if self.ard { dim } else { Some(1) };
        if let Some(n) = expected {
            if self.length_scales.len() != n {
                return Err(Error::Shape(format!(
                    "{} length scales, expected {n}",
                    self.length_scales.len()
                )));
            }
        }
        Ok(())
    }

    /// Σⱼ (xⱼ − yⱼ)² / ℓⱼ²
    fn scaled_sq_dist(&self, x: &[f64], y: &[f64]) -> f64 {
        if self.ard {
            x.iter()
                .zip(y)
                .zip(&self.length_scales)
                .map(|((a, b), l)| {
                    let d = (a - b) / l;
                    d * d
                })
                .sum()
        } else {
            let l = self.length_scales[0];
            x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (l * l)
        }
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let r2 = self.scaled_sq_dist(x, y);
        let s2 = self.sigma_f * self.sigma_f;
        match self.kind {
            CovKind::SquaredExponential => s2 * (-0.5 * r2).exp(),
            CovKind::RationalQuadratic => {
                let a = self.alpha_rq.unwrap_or(1.0);
                s2 * (1.0 + r2 / (2.0 * a)).powf(-a)
            }
            CovKind::Matern32 => {
                let r = (3.0 * r2).sqrt();
                s2 * (1.0 + r) * (-r).exp()
            }
        }
    }

    pub fn prior_variance(&self) -> f64 {
        self.sigma_f * self.sigma_f
    }

    pub fn matrix(&self, rows: &[Vec<f64>]) -> DMatrix<f64> {
        let p = rows.len();
        let mut k = DMatrix::zeros(p, p);
        let s2 = self.prior_variance();
        for i in 0..p {
            k[(i, i)] = s2;
            for j in (i + 1)..p {
                let v = self.eval_unchecked(&rows[i], &rows[j]);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }

    pub fn cross(&self, rows: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        rows.iter().map(|r| self.eval_unchecked(r, x)).collect()
    }
}

pub fn cov_eval(spec: &CovarianceSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "covariance arguments have lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    spec.validate(Some(x.len()))?;
    Ok(spec.eval_unchecked(x, y))
}
