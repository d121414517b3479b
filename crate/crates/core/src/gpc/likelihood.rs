use serde::{Deserialize, Serialize};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
/// ln √(2π)
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LikKind {
    /// p(y|f) = 1 / (1 + exp(−y·f))
    Logistic,
    /// p(y|f) = Φ(y·f)
    #[serde(alias = "probit")]
    CumulativeGaussian,
}

/// log p(y|f) and its first two derivatives in f.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikDerivs {
    pub log_p: f64,
    pub d1: f64,
    pub d2: f64,
}

pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

pub fn norm_log_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// ln Φ(z), accurate far into the lower tail.
pub fn log_norm_cdf(z: f64) -> f64 {
    if z > 0.0 {
        (-0.5 * libm::erfc(z / SQRT_2)).ln_1p()
    } else if z > -30.0 {
        (0.5 * libm::erfc(-z / SQRT_2)).ln()
    } else {
        // Φ(z) ~ φ(z)/(−z) · Σ (−1)ⁿ (2n−1)!! / z²ⁿ
        let inv = 1.0 / (z * z);
        let mut term = 1.0;
        let mut series = 1.0;
        for n in 1..=6 {
            term *= -((2 * n - 1) as f64) * inv;
            series += term;
        }
        norm_log_pdf(z) - (-z).ln() + series.ln()
    }
}

fn log_sigmoid(z: f64) -> f64 {
    if z > 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LikKind {
    /// Derivatives of log p(y|f); `y` is ±1.
    pub fn derivs(self, y: f64, f: f64) -> LikDerivs {
        match self {
            LikKind::Logistic => {
                let pi = sigmoid(f);
                let t = 0.5 * (y + 1.0);
                LikDerivs {
                    log_p: log_sigmoid(y * f),
                    d1: t - pi,
                    d2: -pi * (1.0 - pi),
                }
            }
            LikKind::CumulativeGaussian => {
                let z = y * f;
                let log_p = log_norm_cdf(z);
                let ratio = (norm_log_pdf(z) - log_p).exp();
                LikDerivs {
                    log_p,
                    d1: y * ratio,
                    d2: -(ratio * ratio + z * ratio),
                }
            }
        }
    }

    /// p(y|f)
    pub fn prob(self, y: f64, f: f64) -> f64 {
        match self {
            LikKind::Logistic => sigmoid(y * f),
            LikKind::CumulativeGaussian => norm_cdf(y * f),
        }
    }
}

/// p(y|f) for a ±1 label.
pub fn likelihood_eval(kind: LikKind, f: f64, y: f64) -> f64 {
    kind.prob(y, f)
}
