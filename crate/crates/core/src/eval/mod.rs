//! Experimental protocol: train/test scoring, repeated stratified splits,
//! method grid search and noise sweeps.

mod confusion;
mod cv;

pub use confusion::{confusion_matrix, ConfusionMatrix};
pub use cv::{
    grid_search, misclassified_csv, noise_sweep, run_pipeline, stratified_cv, CvConfig, CvResult, GridSearchResult,
    MisclassRecord, NoiseLevel, PipelineOutcome, RunResult,
};
