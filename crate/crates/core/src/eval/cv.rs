use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::confusion::{confusion_matrix, ConfusionMatrix};
use crate::dataset::{inject_noise, stratified_split_indices, ClassId, FaultDataset};
use crate::diagnoser::{Diagnoser, PipelineConfig};
use crate::error::{Error, Result};
use crate::features::FeatureMethod;
use crate::ovr::ClassProbabilities;
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MisclassRecord {
    pub sample_id: usize,
    pub actual_class: ClassId,
    pub actual_prob: f64,
    pub predicted_class: ClassId,
    pub predicted_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutcome {
    /// Percent correct.
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    /// `sample_id` is the position within the test set.
    pub misclassified: Vec<MisclassRecord>,
    pub predictions: Vec<ClassProbabilities>,
}

/// Fits extractor and ensemble on `train`, then scores `test`.
pub fn run_pipeline(
    train: &FaultDataset,
    test: &FaultDataset,
    method: FeatureMethod,
    config: &PipelineConfig,
    seed: u64,
) -> Result<PipelineOutcome> {
    if test.is_empty() {
        return Err(Error::NoSamples);
    }
    if train.channels != test.channels || train.points_per_channel != test.points_per_channel {
        return Err(Error::Shape("train and test sets have different channel layouts".into()));
    }
    let diagnoser = Diagnoser::train(train, method, config, seed)?;
    let predictions = diagnoser.diagnose_dataset(test)?;
    let targets = test.labels();
    let decisions: Vec<ClassId> = predictions.iter().map(|p| p.decision).collect();
    let class_ids: Vec<ClassId> = train
        .class_map
        .keys()
        .chain(test.class_map.keys())
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let confusion = confusion_matrix(&decisions, &targets, &class_ids)?;
    let misclassified = predictions
        .iter()
        .zip(&targets)
        .enumerate()
        .filter(|(_, (p, &t))| p.decision != t)
        .map(|(i, (p, &t))| MisclassRecord {
            sample_id: i,
            actual_class: t,
            // a test class absent from training has no model
            actual_prob: p.raw.get(&t).copied().unwrap_or(0.0),
            predicted_class: p.decision,
            predicted_prob: p.raw[&p.decision],
        })
        .collect();
    Ok(PipelineOutcome {
        accuracy: 100.0 * confusion.accuracy(),
        confusion,
        misclassified,
        predictions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub n_runs: usize,
    pub n_test_per_class: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            n_runs: 5,
            n_test_per_class: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// Percent correct; 0 for a failed run.
    pub accuracy: f64,
    /// Dataset indices of the held-out samples.
    pub test_indices: Vec<usize>,
    pub confusion: Option<ConfusionMatrix>,
    /// `sample_id` is the dataset index.
    pub misclassified: Vec<MisclassRecord>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub method: FeatureMethod,
    pub accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator); 0 for a single run.
    pub std: f64,
    pub runs: Vec<RunResult>,
    /// Set when every run failed.
    pub failed: bool,
}

impl CvResult {
    fn from_runs(method: FeatureMethod, runs: Vec<RunResult>) -> Self {
        let accuracies: Vec<f64> = runs.iter().map(|r| r.accuracy).collect();
        let n = accuracies.len() as f64;
        let mean = accuracies.iter().sum::<f64>() / n;
        let std = if accuracies.len() > 1 {
            (accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        CvResult {
            method,
            failed: runs.iter().all(|r| r.error.is_some()),
            accuracies,
            mean,
            std,
            runs,
        }
    }

    pub fn misclassified(&self) -> impl Iterator<Item = &MisclassRecord> {
        self.runs.iter().flat_map(|r| &r.misclassified)
    }
}

fn run_seed(seed: u64, run: usize) -> u64 {
    derive_seed(seed, run as u64)
}

fn cv_runs(
    dataset: &FaultDataset,
    method: FeatureMethod,
    config: &PipelineConfig,
    cv: &CvConfig,
    seed: u64,
    tolerate_failures: bool,
) -> Result<CvResult> {
    if cv.n_runs == 0 {
        return Err(Error::InvalidArgument("cross-validation needs at least one run".into()));
    }
    let labels = dataset.labels();
    let runs = (0..cv.n_runs)
        .into_par_iter()
        .map(|r| {
            // split depends only on (seed, run), which pairs runs across methods
            let split_seed = run_seed(seed, r);
            let (train_idx, test_idx) = stratified_split_indices(&labels, cv.n_test_per_class, split_seed)?;
            let outcome = run_pipeline(
                &dataset.subset(&train_idx),
                &dataset.subset(&test_idx),
                method,
                config,
                derive_seed(split_seed, 1),
            );
            log::info!(
                "{method} run {}/{}: {}",
                r + 1,
                cv.n_runs,
                match &outcome {
                    Ok(o) => format!("{:.1}%", o.accuracy),
                    Err(e) => format!("failed ({e})"),
                }
            );
            match outcome {
                Ok(o) => Ok(RunResult {
                    accuracy: o.accuracy,
                    confusion: Some(o.confusion),
                    misclassified: o
                        .misclassified
                        .into_iter()
                        .map(|m| MisclassRecord {
                            sample_id: test_idx[m.sample_id],
                            ..m
                        })
                        .collect(),
                    test_indices: test_idx,
                    error: None,
                }),
                Err(e) if tolerate_failures => Ok(RunResult {
                    accuracy: 0.0,
                    confusion: None,
                    misclassified: Vec::new(),
                    test_indices: test_idx,
                    error: Some(e.to_string()),
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvResult::from_runs(method, runs))
}

/// `n_runs` stratified random splits, each scored with [`run_pipeline`].
/// Errors in any run are returned.
pub fn stratified_cv(
    dataset: &FaultDataset,
    method: FeatureMethod,
    config: &PipelineConfig,
    cv: &CvConfig,
    seed: u64,
) -> Result<CvResult> {
    cv_runs(dataset, method, config, cv, seed, false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    /// One entry per pool method, in pool order.
    pub results: Vec<CvResult>,
    pub best_method: FeatureMethod,
}

impl GridSearchResult {
    pub fn get(&self, method: FeatureMethod) -> Option<&CvResult> {
        self.results.iter().find(|r| r.method == method)
    }
}

/// Cross-validates every method on identical splits. A run that fails
/// scores 0 instead of aborting the search. Best is the highest mean, then
/// the lower std, then the earlier pool entry.
pub fn grid_search(
    dataset: &FaultDataset,
    pool: &[FeatureMethod],
    config: &PipelineConfig,
    cv: &CvConfig,
    seed: u64,
) -> Result<GridSearchResult> {
    if pool.is_empty() {
        return Err(Error::InvalidArgument("method pool is empty".into()));
    }
    if let Some(dup) = pool.iter().enumerate().find(|(i, m)| pool[..*i].contains(m)) {
        return Err(Error::InvalidArgument(format!("method {} listed twice", dup.1)));
    }
    let results = pool
        .iter()
        .map(|&m| cv_runs(dataset, m, config, cv, seed, true))
        .collect::<Result<Vec<_>>>()?;
    let mut best = &results[0];
    for r in &results[1..] {
        if r.mean > best.mean || (r.mean == best.mean && r.std < best.std) {
            best = r;
        }
    }
    Ok(GridSearchResult {
        best_method: best.method,
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevel {
    pub percent: f64,
    pub cv: CvResult,
    pub n_misclassified: usize,
    /// Mean raw probability of the (wrong) decided class over every
    /// misclassified sample; absent when nothing was misclassified.
    pub wrong_class_probability: Option<f64>,
}

/// Corrupts the dataset at each level and cross-validates it. All levels
/// share the noise draw (scaled) and the splits.
pub fn noise_sweep(
    dataset: &FaultDataset,
    percents: &[f64],
    method: FeatureMethod,
    config: &PipelineConfig,
    cv: &CvConfig,
    seed: u64,
) -> Result<Vec<NoiseLevel>> {
    if let Some(p) = percents.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::InvalidArgument(format!("noise percent {p} must be finite and non-negative")));
    }
    let noise_seed = derive_seed(seed, u64::MAX);
    percents
        .iter()
        .map(|&percent| {
            let noisy = inject_noise(dataset, percent, noise_seed)?;
            let result = stratified_cv(&noisy, method, config, cv, seed)?;
            let wrong: Vec<f64> = result.misclassified().map(|m| m.predicted_prob).collect();
            Ok(NoiseLevel {
                percent,
                n_misclassified: wrong.len(),
                wrong_class_probability: (!wrong.is_empty()).then(|| wrong.iter().sum::<f64>() / wrong.len() as f64),
                cv: result,
            })
        })
        .collect()
}

pub fn misclassified_csv<'a>(records: impl IntoIterator<Item = &'a MisclassRecord>) -> String {
    let mut out = String::from("sample_id,actual_class,actual_prob,predicted_class,predicted_prob\n");
    for m in records {
        writeln!(
            out,
            "{},{},{:.6},{},{:.6}",
            m.sample_id, m.actual_class, m.actual_prob, m.predicted_class, m.predicted_prob
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{stratified_split, synth_dataset, SynthSpec};
    use crate::features::{extract_features, ExtractorConfig};
    use crate::gpc::{CovKind, GpcConfig};

    fn quick() -> PipelineConfig {
        PipelineConfig {
            extractor: ExtractorConfig {
                n_components: 3,
                ..ExtractorConfig::default()
            },
            gpc: GpcConfig {
                cov_kind: CovKind::SquaredExponential,
                ard: false,
                budget: 25,
                n_restarts: 1,
                ..GpcConfig::default()
            },
        }
    }

    fn data() -> FaultDataset {
        synth_dataset(&SynthSpec::with_classes(3, 10, 120), 3).unwrap()
    }

    #[test]
    fn pipeline_reports_consistent_misclassifications() {
        let ds = data();
        let (train, test) = stratified_split(&ds, 3, 1).unwrap();
        let out = run_pipeline(&train, &test, FeatureMethod::KpcaGaussian, &quick(), 5).unwrap();
        assert_eq!(out.confusion.total(), 9);
        assert_eq!(out.predictions.len(), 9);
        assert_eq!(out.misclassified.len(), 9 - out.confusion.correct());
        for m in &out.misclassified {
            assert_ne!(m.predicted_class, m.actual_class);
            assert!(m.predicted_prob >= m.actual_prob);
        }
        let empty = test.subset(&[]);
        assert!(matches!(
            run_pipeline(&train, &empty, FeatureMethod::KpcaGaussian, &quick(), 5),
            Err(Error::NoSamples)
        ));
    }

    #[test]
    fn fitting_on_test_data_changes_features() {
        let ds = data();
        let (train, test) = stratified_split(&ds, 3, 1).unwrap();
        let cfg = ExtractorConfig::default();
        let (train_only, _) = extract_features(&train, FeatureMethod::KpcaGaussian, &cfg).unwrap();
        let (leaky, _) = extract_features(&ds, FeatureMethod::KpcaGaussian, &cfg).unwrap();
        let a = train_only.transform(&test).unwrap();
        let b = leaky.transform(&test).unwrap();
        let diff = a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff > 1e-6);
    }

    #[test]
    fn cv_statistics_and_determinism() {
        let ds = data();
        let cv = CvConfig {
            n_runs: 3,
            n_test_per_class: 2,
        };
        let r = stratified_cv(&ds, FeatureMethod::KpcaLinear, &quick(), &cv, 9).unwrap();
        assert_eq!(r.accuracies.len(), 3);
        let mean = r.accuracies.iter().sum::<f64>() / 3.0;
        let var = r.accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 2.0;
        assert!((r.mean - mean).abs() <= 1e-12);
        assert!((r.std - var.sqrt()).abs() <= 1e-12);
        let labels = ds.labels();
        for run in &r.runs {
            for c in 1..=3 {
                assert_eq!(run.test_indices.iter().filter(|&&i| labels[i] == c).count(), 2);
            }
            for m in &run.misclassified {
                assert!(run.test_indices.contains(&m.sample_id));
                assert_eq!(labels[m.sample_id], m.actual_class);
            }
        }
        assert_eq!(r, stratified_cv(&ds, FeatureMethod::KpcaLinear, &quick(), &cv, 9).unwrap());
        let zero = CvConfig { n_runs: 0, ..cv };
        assert!(stratified_cv(&ds, FeatureMethod::KpcaLinear, &quick(), &zero, 9).is_err());
    }

    #[test]
    fn grid_search_pairs_splits_and_scores_failures_zero() {
        let ds = data();
        let cv = CvConfig {
            n_runs: 2,
            n_test_per_class: 2,
        };
        let mut config = quick();
        // tanh(0) makes the sigmoid Gram matrix vanish
        config.extractor.sigmoid_a = 0.0;
        let pool = [FeatureMethod::KpcaLinear, FeatureMethod::KpcaSigmoid, FeatureMethod::KpcaGaussian];
        let g = grid_search(&ds, &pool, &config, &cv, 4).unwrap();
        assert_eq!(g.results.len(), 3);
        let sig = g.get(FeatureMethod::KpcaSigmoid).unwrap();
        assert!(sig.failed && sig.mean == 0.0 && sig.runs.iter().all(|r| r.error.is_some()));
        for r in 0..2 {
            let a = &g.results[0].runs[r].test_indices;
            assert!(g.results.iter().all(|m| &m.runs[r].test_indices == a));
        }
        let best = g.get(g.best_method).unwrap();
        assert!(g.results.iter().all(|r| r.mean <= best.mean));
        assert!(grid_search(&ds, &[], &config, &cv, 4).is_err());
        assert!(grid_search(&ds, &[FeatureMethod::Sae, FeatureMethod::Sae], &config, &cv, 4).is_err());
    }

    #[test]
    fn noise_sweep_zero_level_is_plain_cv() {
        let ds = data();
        let cv = CvConfig {
            n_runs: 2,
            n_test_per_class: 2,
        };
        let levels = noise_sweep(&ds, &[0.0, 10.0], FeatureMethod::KpcaLinear, &quick(), &cv, 2).unwrap();
        assert_eq!(levels.len(), 2);
        let plain = stratified_cv(&ds, FeatureMethod::KpcaLinear, &quick(), &cv, 2).unwrap();
        assert_eq!(levels[0].cv, plain);
        for l in &levels {
            assert_eq!(l.n_misclassified, l.cv.misclassified().count());
            assert_eq!(l.wrong_class_probability.is_some(), l.n_misclassified > 0);
        }
        assert!(noise_sweep(&ds, &[-1.0], FeatureMethod::KpcaLinear, &quick(), &cv, 2).is_err());
    }

    #[test]
    fn misclassification_csv_layout() {
        let rec = MisclassRecord {
            sample_id: 12,
            actual_class: 3,
            actual_prob: 0.2771,
            predicted_class: 7,
            predicted_prob: 0.2953,
        };
        assert_eq!(
            misclassified_csv([&rec]),
            "sample_id,actual_class,actual_prob,predicted_class,predicted_prob\n12,3,0.277100,7,0.295300\n"
        );
    }
}
