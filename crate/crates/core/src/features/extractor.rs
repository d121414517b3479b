use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::autoencoder::{sae_fit, SaeModel, SaeSpec};
use super::kernel::{KernelKind, KernelSpec};
use super::kpca::{kpca_fit, KpcaModel};
use crate::dataset::FaultDataset;
use crate::error::{Error, Result};
use crate::linalg::median_pairwise_distance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMethod {
    Sae,
    KpcaLinear,
    KpcaPolynomial,
    KpcaGaussian,
    KpcaExponential,
    KpcaSigmoid,
}

impl FeatureMethod {
    /// The grid-search pool: stacked autoencoder plus four KPCA kernels.
    pub const DEFAULT_POOL: [FeatureMethod; 5] = [
        FeatureMethod::Sae,
        FeatureMethod::KpcaLinear,
        FeatureMethod::KpcaPolynomial,
        FeatureMethod::KpcaGaussian,
        FeatureMethod::KpcaExponential,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMethod::Sae => "sae",
            FeatureMethod::KpcaLinear => "kpca-linear",
            FeatureMethod::KpcaPolynomial => "kpca-polynomial",
            FeatureMethod::KpcaGaussian => "kpca-gaussian",
            FeatureMethod::KpcaExponential => "kpca-exponential",
            FeatureMethod::KpcaSigmoid => "kpca-sigmoid",
        }
    }

    fn kernel_kind(self) -> Option<KernelKind> {
        match self {
            FeatureMethod::Sae => None,
            FeatureMethod::KpcaLinear => Some(KernelKind::Linear),
            FeatureMethod::KpcaPolynomial => Some(KernelKind::Polynomial),
            FeatureMethod::KpcaGaussian => Some(KernelKind::Gaussian),
            FeatureMethod::KpcaExponential => Some(KernelKind::Exponential),
            FeatureMethod::KpcaSigmoid => Some(KernelKind::Sigmoid),
        }
    }
}

impl fmt::Display for FeatureMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            FeatureMethod::Sae,
            FeatureMethod::KpcaLinear,
            FeatureMethod::KpcaPolynomial,
            FeatureMethod::KpcaGaussian,
            FeatureMethod::KpcaExponential,
            FeatureMethod::KpcaSigmoid,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaeConfig {
    /// Hidden sizes after the input, e.g. `[100, 10]`.
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SaeConfig {
    fn default() -> Self {
        SaeConfig {
            hidden: vec![100, 10],
            learning_rate: 1e-3,
            momentum: 0.9,
            epochs: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractorConfig {
    /// Retained KPCA components per channel.
    pub n_components: usize,
    /// Width for gaussian/exponential kernels; the median pairwise training
    /// distance of each channel when absent.
    pub sigma: Option<f64>,
    pub polynomial_a: f64,
    pub polynomial_b: f64,
    pub sigmoid_a: f64,
    pub sigmoid_b: f64,
    pub sae: SaeConfig,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig {
            n_components: 10,
            sigma: None,
            polynomial_a: 1.0,
            polynomial_b: 3.0,
            sigmoid_a: 1e-3,
            sigmoid_b: 0.0,
            sae: SaeConfig::default(),
        }
    }
}

/// Per-dimension affine map to zero mean and unit variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population std; zero marks a constant column, which maps to 0.
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut std = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in std.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        for (s, m) in std.iter_mut().zip(&mean) {
            *s = (*s / n).sqrt();
            if *s <= 1e-12 * (1.0 + m.abs()) {
                *s = 0.0;
            }
        }
        Standardizer { mean, std }
    }

    pub fn apply(&self, x: &mut [f64]) {
        for ((v, m), s) in x.iter_mut().zip(&self.mean).zip(&self.std) {
            *v = if *s == 0.0 { 0.0 } else { (*v - m) / s };
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ChannelModel {
    Kpca(KpcaModel),
    Sae {
        /// Training min and max of the channel, for [0, 1] scaling.
        min: f64,
        max: f64,
        model: SaeModel,
    },
}

impl ChannelModel {
    fn output_dim(&self) -> usize {
        match self {
            ChannelModel::Kpca(m) => m.n_components(),
            ChannelModel::Sae { model, .. } => model.output_dim(),
        }
    }

    fn transform(&self, segment: &[f64]) -> Result<Vec<f64>> {
        match self {
            ChannelModel::Kpca(m) => m.project(segment),
            ChannelModel::Sae { min, max, model } => {
                let scaled: Vec<f64> = segment.iter().map(|v| min_max(*v, *min, *max)).collect();
                Ok(model.encode(&scaled))
            }
        }
    }
}

fn min_max(v: f64, min: f64, max: f64) -> f64 {
    if max > min {
        (v - min) / (max - min)
    } else {
        0.0
    }
}

/// Fitted per-channel reducers plus the standardization that follows them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureExtractor {
    pub method: FeatureMethod,
    pub channels: Vec<String>,
    pub points_per_channel: usize,
    pub per_channel: Vec<ChannelModel>,
    pub standardizer: Standardizer,
}

impl FeatureExtractor {
    pub fn output_dim(&self) -> usize {
        self.per_channel.iter().map(ChannelModel::output_dim).sum()
    }

    pub fn input_len(&self) -> usize {
        self.points_per_channel * self.channels.len()
    }

    /// Raw channel-fused features, before standardization.
    fn raw_features(&self, points: &[f64]) -> Result<Vec<f64>> {
        if points.len() != self.input_len() {
            return Err(Error::Shape(format!(
                "sample has {} points, extractor expects {}",
                points.len(),
                self.input_len()
            )));
        }
        let mut out = Vec::with_capacity(self.output_dim());
        for (segment, model) in points
            .chunks_exact(self.points_per_channel)
            .zip(&self.per_channel)
        {
            out.extend(model.transform(segment)?);
        }
        Ok(out)
    }

    pub fn transform_sample(&self, points: &[f64]) -> Result<Vec<f64>> {
        let mut f = self.raw_features(points)?;
        self.standardizer.apply(&mut f);
        Ok(f)
    }

    pub fn transform(&self, dataset: &FaultDataset) -> Result<Vec<Vec<f64>>> {
        if dataset.channels != self.channels {
            return Err(Error::Shape(format!(
                "dataset channels {:?} differ from extractor channels {:?}",
                dataset.channels, self.channels
            )));
        }
        dataset
            .samples
            .iter()
            .map(|s| self.transform_sample(&s.points))
            .collect()
    }
}

fn fit_channel(
    rows: &[Vec<f64>],
    method: FeatureMethod,
    config: &ExtractorConfig,
    channel: usize,
) -> Result<ChannelModel> {
    match method.kernel_kind() {
        Some(kind) => {
            let width = || config.sigma.unwrap_or_else(|| median_pairwise_distance(rows));
            let kernel = match kind {
                KernelKind::Linear => KernelSpec::linear(),
                KernelKind::Gaussian => KernelSpec::gaussian(width()),
                KernelKind::Exponential => KernelSpec::exponential(width()),
                KernelKind::Polynomial => {
                    KernelSpec::polynomial(config.polynomial_a, config.polynomial_b)
                }
                KernelKind::Sigmoid => KernelSpec::sigmoid(config.sigmoid_a, config.sigmoid_b),
            };
            let n = config.n_components.min(rows.len());
            Ok(ChannelModel::Kpca(kpca_fit(rows, kernel, n)?))
        }
        None => {
            let (min, max) = rows
                .iter()
                .flatten()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let m = rows[0].len();
            let x = DMatrix::from_fn(rows.len(), m, |i, j| min_max(rows[i][j], min, max));
            let mut layer_sizes = vec![m];
            layer_sizes.extend(&config.sae.hidden);
            let spec = SaeSpec {
                layer_sizes,
                learning_rate: config.sae.learning_rate,
                momentum: config.sae.momentum,
                epochs: config.sae.epochs,
                seed: config.sae.seed.wrapping_add(1000 * channel as u64),
            };
            Ok(ChannelModel::Sae {
                min,
                max,
                model: sae_fit(&x, &spec)?,
            })
        }
    }
}

/// Fits one reducer per channel on `dataset`, concatenates the per-channel
/// features in channel order, and standardizes each feature dimension with
/// training statistics. Returns the extractor and the training features.
pub fn extract_features(
    dataset: &FaultDataset,
    method: FeatureMethod,
    config: &ExtractorConfig,
) -> Result<(FeatureExtractor, Vec<Vec<f64>>)> {
    if dataset.is_empty() {
        return Err(Error::NoSamples);
    }
    dataset.validate(true)?;
    let per_channel = (0..dataset.channels.len())
        .map(|c| {
            let rows: Vec<Vec<f64>> = (0..dataset.len())
                .map(|i| dataset.channel_points(i, c).to_vec())
                .collect();
            fit_channel(&rows, method, config, c)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut extractor = FeatureExtractor {
        method,
        channels: dataset.channels.clone(),
        points_per_channel: dataset.points_per_channel,
        per_channel,
        standardizer: Standardizer {
            mean: Vec::new(),
            std: Vec::new(),
        },
    };
    let raw = dataset
        .samples
        .iter()
        .map(|s| extractor.raw_features(&s.points))
        .collect::<Result<Vec<_>>>()?;
    extractor.standardizer = Standardizer::fit(&raw);
    let features = extractor.transform(dataset)?;
    Ok((extractor, features))
}
