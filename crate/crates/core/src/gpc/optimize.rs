use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::covariance::{CovKind, CovarianceSpec};
use super::likelihood::LikKind;
use super::model::{BinaryGpcModel, MeanKind, MeanSpec};
use super::simplex::minimize;
use crate::error::{Error, Result};
use crate::linalg::median_pairwise_distance;

/// Bound on every log-parameter (log σ_f, log ℓ, log α).
pub const LOG_PARAM_BOUND: f64 = 5.0;
/// Bound on the constant mean.
pub const MEAN_BOUND: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpcConfig {
    pub cov_kind: CovKind,
    pub ard: bool,
    pub mean_kind: MeanKind,
    pub lik: LikKind,
    /// Objective evaluations per start.
    pub budget: usize,
    /// Number of starts, including the deterministic first one.
    pub n_restarts: usize,
}

impl Default for GpcConfig {
    fn default() -> Self {
        GpcConfig {
            cov_kind: CovKind::Matern32,
            ard: true,
            mean_kind: MeanKind::Constant,
            lik: LikKind::CumulativeGaussian,
            budget: 200,
            n_restarts: 3,
        }
    }
}

/// Maps the free parameter vector to covariance and mean specs:
/// `[log σ_f, log ℓ₁ … log ℓ_d, (log α), (c)]`.
struct Layout {
    kind: CovKind,
    ard: bool,
    n_scales: usize,
    mean_kind: MeanKind,
}

impl Layout {
    fn new(config: &GpcConfig, dim: usize) -> Self {
        Layout {
            kind: config.cov_kind,
            ard: config.ard,
            n_scales: if config.ard { dim } else { 1 },
            mean_kind: config.mean_kind,
        }
    }

    fn has_alpha(&self) -> bool {
        self.kind == CovKind::RationalQuadratic
    }

    fn has_mean(&self) -> bool {
        self.mean_kind == MeanKind::Constant
    }

    fn len(&self) -> usize {
        1 + self.n_scales + usize::from(self.has_alpha()) + usize::from(self.has_mean())
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(-LOG_PARAM_BOUND, LOG_PARAM_BOUND); self.len()];
        if self.has_mean() {
            *b.last_mut().expect("mean slot") = (-MEAN_BOUND, MEAN_BOUND);
        }
        b
    }

    fn decode(&self, theta: &[f64]) -> (CovarianceSpec, MeanSpec) {
        let sigma_f = theta[0].exp();
        let scales: Vec<f64> = theta[1..1 + self.n_scales].iter().map(|v| v.exp()).collect();
        let mut cov = if self.ard {
            CovarianceSpec::ard(self.kind, sigma_f, scales)
        } else {
            CovarianceSpec::isotropic(self.kind, sigma_f, scales[0])
        };
        if self.has_alpha() {
            cov.alpha_rq = Some(theta[1 + self.n_scales].exp());
        }
        let mean = if self.has_mean() {
            MeanSpec::constant(theta[self.len() - 1])
        } else {
            MeanSpec::zero()
        };
        (cov, mean)
    }

    fn initial(&self, median_dist: f64) -> Vec<f64> {
        let l = median_dist.ln().clamp(-LOG_PARAM_BOUND, LOG_PARAM_BOUND);
        let mut theta = vec![0.0];
        theta.extend(std::iter::repeat_n(l, self.n_scales));
        if self.has_alpha() {
            theta.push(0.0);
        }
        if self.has_mean() {
            theta.push(0.0);
        }
        theta
    }
}

/// Multi-start simplex search maximizing the Laplace evidence. Returns the
/// best model found; deterministic for a given seed.
pub fn optimize_hyperparams(
    train_x: &[Vec<f64>],
    train_y: &[f64],
    config: &GpcConfig,
    seed: u64,
) -> Result<BinaryGpcModel> {
    if config.budget < 1 || config.n_restarts < 1 {
        return Err(Error::InvalidArgument(
            "optimizer budget and restarts must be at least 1".into(),
        ));
    }
    if train_x.len() < 2 || train_x.len() != train_y.len() {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 labeled rows, got {} rows and {} labels",
            train_x.len(),
            train_y.len()
        )));
    }
    if !(train_y.contains(&1.0) && train_y.contains(&-1.0)) {
        return Err(Error::InvalidArgument("both labels must be present".into()));
    }
    let dim = train_x[0].len();
    let layout = Layout::new(config, dim);
    let bounds = layout.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_error = None;

    let mut objective = |theta: &[f64]| -> f64 {
        let (cov, mean) = layout.decode(theta);
        match BinaryGpcModel::fit(train_x.to_vec(), train_y.to_vec(), cov, mean, config.lik) {
            Ok(m) => -m.log_marginal_likelihood(),
            Err(e) => {
                last_error = Some(e.to_string());
                f64::INFINITY
            }
        }
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in 0..config.n_restarts {
        let theta0 = if start == 0 {
            layout.initial(median_pairwise_distance(train_x))
        } else {
            bounds.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect()
        };
        let result = minimize(&mut objective, &theta0, 1.0, &bounds, config.budget);
        log::trace!("start {start}: -lml {:.6} after {} evals", result.value, result.evaluations);
        if result.value.is_finite() && best.as_ref().is_none_or(|(_, v)| result.value < *v) {
            best = Some((result.x, result.value));
        }
    }

    let (theta, _) = best.ok_or_else(|| {
        Error::AllStartsFailed(last_error.unwrap_or_else(|| "objective was never finite".into()))
    })?;
    let (cov, mean) = layout.decode(&theta);
    BinaryGpcModel::fit(train_x.to_vec(), train_y.to_vec(), cov, mean, config.lik)
}
