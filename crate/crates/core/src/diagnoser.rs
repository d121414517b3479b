use serde::{Deserialize, Serialize};

use crate::dataset::FaultDataset;
use crate::error::{Error, Result};
use crate::features::{extract_features, ExtractorConfig, FeatureExtractor, FeatureMethod};
use crate::gpc::GpcConfig;
use crate::ovr::{ovr_predict, ovr_train, predict_batch, ClassProbabilities, OvrEnsemble};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub extractor: ExtractorConfig,
    pub gpc: GpcConfig,
}

/// A fitted feature extractor together with the ensemble trained on its
/// output: raw segments in, class probabilities out.
#[derive(Debug, Clone)]
pub struct Diagnoser {
    pub extractor: FeatureExtractor,
    pub ensemble: OvrEnsemble,
}

impl Diagnoser {
    pub fn new(extractor: FeatureExtractor, ensemble: OvrEnsemble) -> Result<Self> {
        if extractor.output_dim() != ensemble.dim() {
            return Err(Error::Shape(format!(
                "extractor emits {} features but the ensemble expects {}",
                extractor.output_dim(),
                ensemble.dim()
            )));
        }
        Ok(Diagnoser { extractor, ensemble })
    }

    /// Fits the extractor on `train` only, then the ensemble on its features.
    /// The autoencoder seed (if any) and the optimizer seeds both derive from
    /// `seed`.
    pub fn train(train: &FaultDataset, method: FeatureMethod, config: &PipelineConfig, seed: u64) -> Result<Self> {
        let mut extractor_config = config.extractor.clone();
        extractor_config.sae.seed = derive_seed(seed, 0);
        let (extractor, features) = extract_features(train, method, &extractor_config)?;
        let ensemble = ovr_train(&features, &train.labels(), &config.gpc, derive_seed(seed, 1))?;
        Diagnoser::new(extractor, ensemble)
    }

    /// Length of one fused sample (all channels, concatenated).
    pub fn input_len(&self) -> usize {
        self.extractor.input_len()
    }

    pub fn diagnose(&self, points: &[f64]) -> Result<ClassProbabilities> {
        ovr_predict(&self.ensemble, &self.extractor.transform_sample(points)?)
    }

    pub fn diagnose_dataset(&self, dataset: &FaultDataset) -> Result<Vec<ClassProbabilities>> {
        predict_batch(&self.ensemble, &self.extractor.transform(dataset)?)
    }
}
