//! Dimensionality reduction of raw windows: kernel PCA and stacked
//! autoencoders, fitted per channel and fused at the feature level.

pub mod autoencoder;
mod extractor;
pub mod kernel;
pub mod kpca;

pub use autoencoder::{ae_fit, sae_fit, Activation, AeParams, Autoencoder, SaeModel, SaeSpec};
pub use extractor::{
    extract_features, ChannelModel, ExtractorConfig, FeatureExtractor, FeatureMethod, SaeConfig,
    Standardizer,
};
pub use kernel::{gram_matrix, kernel_eval, KernelKind, KernelSpec};
pub use kpca::{center_gram, kpca_fit, kpca_fit_scores, KpcaModel};
