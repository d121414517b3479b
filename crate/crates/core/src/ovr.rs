//! One-against-all multiclass diagnosis from binary GPCs.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::ClassId;
use crate::error::{Error, Result};
use crate::gpc::{optimize_hyperparams, BinaryGpcModel, GpcConfig};
use crate::seed::derive_seed;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "EnsembleRecord")]
pub struct OvrEnsemble {
    pub class_ids: Vec<ClassId>,
    /// `models[i]` separates `class_ids[i]` (+1) from every other class (−1).
    pub models: Vec<BinaryGpcModel>,
}

#[derive(Deserialize)]
struct EnsembleRecord {
    class_ids: Vec<ClassId>,
    models: Vec<BinaryGpcModel>,
}

impl TryFrom<EnsembleRecord> for OvrEnsemble {
    type Error = Error;

    fn try_from(r: EnsembleRecord) -> Result<Self> {
        let e = OvrEnsemble {
            class_ids: r.class_ids,
            models: r.models,
        };
        e.validate()?;
        Ok(e)
    }
}

impl OvrEnsemble {
    fn validate(&self) -> Result<()> {
        if self.class_ids.len() < 2 || self.class_ids.len() != self.models.len() {
            return Err(Error::Shape(format!(
                "ensemble needs one model per class and at least 2 classes, got {} ids and {} models",
                self.class_ids.len(),
                self.models.len()
            )));
        }
        if !self.class_ids.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("class ids must be strictly increasing".into()));
        }
        let d = self.models[0].dim();
        if self.models.iter().any(|m| m.dim() != d) {
            return Err(Error::Shape("models disagree on feature dimension".into()));
        }
        Ok(())
    }

    pub fn n_classes(&self) -> usize {
        self.class_ids.len()
    }

    pub fn dim(&self) -> usize {
        self.models[0].dim()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProbabilities {
    /// Posterior-mean probability from each class's own model. These do not
    /// sum to one.
    pub raw: BTreeMap<ClassId, f64>,
    pub normalized: BTreeMap<ClassId, f64>,
    pub decision: ClassId,
    pub runner_up: ClassId,
}

impl ClassProbabilities {
    /// Builds the report from raw per-class probabilities. Ties go to the
    /// lowest class id.
    pub fn from_raw(raw: BTreeMap<ClassId, f64>) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::InvalidArgument("need probabilities for at least 2 classes".into()));
        }
        if let Some((c, p)) = raw.iter().find(|(_, p)| !(p.is_finite() && **p > 0.0 && **p < 1.0)) {
            return Err(Error::InvalidArgument(format!("class {c}: probability {p} outside (0, 1)")));
        }
        // descending probability, then ascending id
        let mut ranked: Vec<(ClassId, f64)> = raw.iter().map(|(&c, &p)| (c, p)).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let total: f64 = raw.values().sum();
        let normalized = raw.iter().map(|(&c, &p)| (c, p / total)).collect();
        Ok(ClassProbabilities {
            decision: ranked[0].0,
            runner_up: ranked[1].0,
            raw,
            normalized,
        })
    }
}

/// Trains one binary GPC per class. Each class's search is seeded from the
/// master seed and the positions of that class's samples, so renaming the
/// classes leaves every binary problem and its seed unchanged.
pub fn ovr_train(
    features: &[Vec<f64>],
    labels: &[ClassId],
    config: &GpcConfig,
    seed: u64,
) -> Result<OvrEnsemble> {
    if features.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    if let Some(d) = features.first().map(Vec::len) {
        if features.iter().any(|r| r.len() != d) {
            return Err(Error::Shape("feature rows differ in length".into()));
        }
    }
    let mut counts: BTreeMap<ClassId, usize> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    if counts.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "one-against-all needs at least 2 classes, got {}",
            counts.len()
        )));
    }
    if let Some((&class, &have)) = counts.iter().find(|(_, &n)| n < 2) {
        return Err(Error::ClassTooSmall { class, have, need: 2 });
    }

    let class_ids: Vec<ClassId> = counts.keys().copied().collect();
    let models = class_ids
        .par_iter()
        .map(|&c| {
            let y: Vec<f64> = labels.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
            let class_seed = labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == c)
                .fold(seed, |s, (i, _)| derive_seed(s, i as u64));
            log::debug!("training class {c} against the rest");
            optimize_hyperparams(features, &y, config, class_seed).map_err(|e| {
                Error::ClassFit {
                    class: c,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OvrEnsemble { class_ids, models })
}

pub fn ovr_predict(ensemble: &OvrEnsemble, x: &[f64]) -> Result<ClassProbabilities> {
    let raw = ensemble
        .class_ids
        .iter()
        .zip(&ensemble.models)
        .map(|(&c, m)| m.predict_probability(x).map(|p| (c, p)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    ClassProbabilities::from_raw(raw)
}

pub fn predict_batch(ensemble: &OvrEnsemble, rows: &[Vec<f64>]) -> Result<Vec<ClassProbabilities>> {
    rows.par_iter().map(|r| ovr_predict(ensemble, r)).collect()
}
