//! Binary Gaussian-process classification with a Laplace posterior.

mod covariance;
mod laplace;
mod likelihood;
mod model;
mod optimize;
mod quadrature;
mod simplex;

pub use covariance::{cov_eval, CovKind, CovarianceSpec};
pub use laplace::{laplace_fit, LaplacePosterior, GRADIENT_TOL, MAX_NEWTON_ITERS};
pub use likelihood::{likelihood_eval, log_norm_cdf, norm_cdf, LikDerivs, LikKind};
pub use model::{predictive_probability, BinaryGpcModel, MeanKind, MeanSpec, PROB_EPS};
pub use optimize::{optimize_hyperparams, GpcConfig, LOG_PARAM_BOUND, MEAN_BOUND};
pub use quadrature::gauss_hermite;
pub use simplex::{minimize, SimplexResult};
