use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::FaultDataset;
use crate::error::{Error, Result};

/// Adds white Gaussian noise whose std is `percent`% of each channel
/// segment's own sample standard deviation.
pub fn inject_noise(dataset: &FaultDataset, percent: f64, seed: u64) -> Result<FaultDataset> {
    if !(percent >= 0.0 && percent.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise percent must be non-negative, got {percent}"
        )));
    }
    let mut out = dataset.clone();
    if percent == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = dataset.points_per_channel;
    for sample in &mut out.samples {
        for segment in sample.points.chunks_exact_mut(l) {
            let std = sample_std(segment) * percent / 100.0;
            for v in segment.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += std * z;
            }
        }
    }
    Ok(out)
}

pub(crate) fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
}
