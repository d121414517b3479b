use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::covariance::CovarianceSpec;
use super::laplace::{laplace_fit, LaplacePosterior};
use super::likelihood::{norm_cdf, LikKind};
use super::quadrature::gaussian_expectation;
use crate::error::{Error, Result};
use crate::linalg::cholesky_with_jitter;

/// Predictive probabilities are clamped to [ε, 1 − ε].
pub const PROB_EPS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanKind {
    Zero,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSpec {
    pub kind: MeanKind,
    #[serde(default)]
    pub c: f64,
}

impl MeanSpec {
    pub fn zero() -> Self {
        MeanSpec {
            kind: MeanKind::Zero,
            c: 0.0,
        }
    }

    pub fn constant(c: f64) -> Self {
        MeanSpec {
            kind: MeanKind::Constant,
            c,
        }
    }

    pub fn value(&self) -> f64 {
        match self.kind {
            MeanKind::Zero => 0.0,
            MeanKind::Constant => self.c,
        }
    }
}

/// Binary GP classifier with a fitted Laplace posterior. Labels are ±1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct BinaryGpcModel {
    pub train_x: Vec<Vec<f64>>,
    pub train_y: Vec<f64>,
    pub cov: CovarianceSpec,
    pub mean: MeanSpec,
    pub lik: LikKind,
    pub jitter_used: f64,
    pub posterior: LaplacePosterior,
}

/// Serialized form. The posterior is recomputed on load from the stored
/// hyperparameters, which reproduces predictions exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelRecord {
    train_x: Vec<Vec<f64>>,
    train_y: Vec<f64>,
    cov: CovarianceSpec,
    mean: MeanSpec,
    lik: LikKind,
    jitter_used: f64,
    log_marginal: f64,
    posterior_mode: Vec<f64>,
}

impl From<BinaryGpcModel> for ModelRecord {
    fn from(m: BinaryGpcModel) -> Self {
        ModelRecord {
            log_marginal: m.posterior.log_marginal,
            posterior_mode: m.posterior.mode.iter().copied().collect(),
            train_x: m.train_x,
            train_y: m.train_y,
            cov: m.cov,
            mean: m.mean,
            lik: m.lik,
            jitter_used: m.jitter_used,
        }
    }
}

impl TryFrom<ModelRecord> for BinaryGpcModel {
    type Error = Error;

    fn try_from(r: ModelRecord) -> Result<Self> {
        BinaryGpcModel::fit(r.train_x, r.train_y, r.cov, r.mean, r.lik)
    }
}

impl BinaryGpcModel {
    pub fn fit(
        train_x: Vec<Vec<f64>>,
        train_y: Vec<f64>,
        cov: CovarianceSpec,
        mean: MeanSpec,
        lik: LikKind,
    ) -> Result<Self> {
        if train_x.is_empty() {
            return Err(Error::NoSamples);
        }
        if train_x.len() != train_y.len() {
            return Err(Error::Shape(format!(
                "{} training rows but {} labels",
                train_x.len(),
                train_y.len()
            )));
        }
        let d = train_x[0].len();
        if train_x.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("training rows differ in length".into()));
        }
        cov.validate(Some(d))?;
        if !mean.c.is_finite() {
            return Err(Error::InvalidArgument("mean constant must be finite".into()));
        }
        let mut k = cov.matrix(&train_x);
        let (_, jitter) = cholesky_with_jitter(&k)?;
        for i in 0..k.nrows() {
            k[(i, i)] += jitter;
        }
        let m = DVector::from_element(train_x.len(), mean.value());
        let posterior = laplace_fit(&k, &m, &train_y, lik)?;
        Ok(BinaryGpcModel {
            train_x,
            train_y,
            cov,
            mean,
            lik,
            jitter_used: jitter,
            posterior,
        })
    }

    pub fn dim(&self) -> usize {
        self.train_x[0].len()
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.posterior.log_marginal
    }

    /// Laplace predictive mean and variance of the latent at `x`.
    pub fn predict_latent(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.dim() {
            return Err(Error::Shape(format!(
                "test point has dimension {}, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        let ks = DVector::from_vec(self.cov.cross(&self.train_x, x));
        let kss = self.cov.prior_variance();
        let mu = self.mean.value() + ks.dot(&self.posterior.grad_log_lik);
        let sqrt_w = self.posterior.hessian_w.map(f64::sqrt);
        let v = self
            .posterior
            .cholesky_b
            .solve_lower_triangular(&sqrt_w.component_mul(&ks))
            .expect("cholesky factor has a positive diagonal");
        let var = (kss - v.norm_squared()).clamp(kss * 1e-15, kss);
        Ok((mu, var))
    }

    /// Posterior mean of p(y* = +1 | x*).
    pub fn predict_probability(&self, x: &[f64]) -> Result<f64> {
        let (mu, var) = self.predict_latent(x)?;
        Ok(predictive_probability(self.lik, mu, var))
    }
}

/// E[p(y = +1 | f)] for f ~ N(mu, var): closed form for the cumulative
/// Gaussian, 32-node Gauss–Hermite for the logistic.
pub fn predictive_probability(lik: LikKind, mu: f64, var: f64) -> f64 {
    let p = match lik {
        LikKind::CumulativeGaussian => norm_cdf(mu / (1.0 + var).sqrt()),
        LikKind::Logistic => 0.5 + 0.5 * gaussian_expectation(mu, var, |f| (0.5 * f).tanh()),
    };
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}
