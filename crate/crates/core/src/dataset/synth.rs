//! Desk-scale stand-in for bench recordings: each fault class is a periodic
//! train of impacts at its characteristic frequency, each impact ringing a
//! decaying structural resonance, plus white measurement noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{fuse_channels, segment_record, ClassId, FaultDataset, FusionMode, VibrationRecord};
use crate::error::{Error, Result};

/// Amplitude of the fan-end channel relative to the drive end.
pub const FE_ATTENUATION: f64 = 0.5;
/// Fan-end noise std as a multiple of the base noise std.
pub const FE_NOISE_FACTOR: f64 = 1.5;

/// Impulse response is truncated once its envelope drops below this.
const RESPONSE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSignature {
    pub label: String,
    pub characteristic_hz: f64,
    pub impulse_amplitude: f64,
    pub resonance_hz: f64,
    pub resonance_width_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_classes: usize,
    pub samples_per_class: usize,
    pub points_per_channel: usize,
    pub sampling_rate_hz: f64,
    pub noise_std: f64,
    pub classes: Vec<ClassSignature>,
}

impl SynthSpec {
    /// A spec with `n_classes` evenly spread signatures, 12 kHz sampling.
    pub fn with_classes(n_classes: usize, samples_per_class: usize, points_per_channel: usize) -> Self {
        let classes = (0..n_classes)
            .map(|c| {
                let c = c as f64;
                ClassSignature {
                    label: if c == 0.0 { "healthy".into() } else { format!("fault {c}") },
                    characteristic_hz: 150.0 + 47.0 * c,
                    impulse_amplitude: 1.0 + 0.6 * c,
                    resonance_hz: 1200.0 + 450.0 * c,
                    resonance_width_hz: 150.0 + 20.0 * c,
                }
            })
            .collect();
        SynthSpec {
            n_classes,
            samples_per_class,
            points_per_channel,
            sampling_rate_hz: 12_000.0,
            noise_std: 0.1,
            classes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(format!("synth spec: {m}")));
        if self.n_classes == 0 || self.classes.len() != self.n_classes {
            return bad(format!(
                "n_classes = {} but {} class signatures given",
                self.n_classes,
                self.classes.len()
            ));
        }
        if self.samples_per_class == 0 || self.points_per_channel == 0 {
            return bad("samples_per_class and points_per_channel must be positive".into());
        }
        if !(self.sampling_rate_hz > 0.0) || !(self.noise_std >= 0.0) {
            return bad("sampling rate must be positive and noise std non-negative".into());
        }
        for (i, c) in self.classes.iter().enumerate() {
            let positive = [
                c.characteristic_hz,
                c.impulse_amplitude,
                c.resonance_hz,
                c.resonance_width_hz,
            ];
            if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return bad(format!("class {} has a non-positive parameter", i + 1));
            }
            for other in &self.classes[..i] {
                if other.characteristic_hz == c.characteristic_hz {
                    return bad(format!(
                        "characteristic frequency {} Hz is used twice",
                        c.characteristic_hz
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Noise-free ringing impulse train of `n` points.
fn impulse_train(sig: &ClassSignature, fs: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let decay = std::f64::consts::PI * sig.resonance_width_hz;
    let support = ((-RESPONSE_FLOOR.ln()) / decay * fs).ceil() as usize + 1;
    let omega = 2.0 * std::f64::consts::PI * sig.resonance_hz;
    let period = 1.0 / sig.characteristic_hz;
    let duration = n as f64 / fs;
    let mut k = 0usize;
    loop {
        let t0 = k as f64 * period;
        if t0 >= duration {
            break;
        }
        let start = (t0 * fs).ceil() as usize;
        for (idx, slot) in out.iter_mut().enumerate().skip(start).take(support) {
            let dt = idx as f64 / fs - t0;
            *slot += sig.impulse_amplitude * (-decay * dt).exp() * (omega * dt).sin();
        }
        k += 1;
    }
    out
}

/// Continuous DE and FE records per class, long enough for
/// `samples_per_class` windows.
pub fn synth_records(spec: &SynthSpec, seed: u64) -> Result<Vec<(ClassId, [VibrationRecord; 2])>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.samples_per_class * spec.points_per_channel;
    let mut out = Vec::with_capacity(spec.n_classes);
    for (c, sig) in spec.classes.iter().enumerate() {
        let clean = impulse_train(sig, spec.sampling_rate_hz, n);
        let mut noisy = |gain: f64, noise: f64| -> Vec<f64> {
            clean
                .iter()
                .map(|v| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    gain * v + noise * z
                })
                .collect()
        };
        let de = noisy(1.0, spec.noise_std);
        let fe = noisy(FE_ATTENUATION, FE_NOISE_FACTOR * spec.noise_std);
        out.push((
            c as ClassId + 1,
            [
                VibrationRecord::new("DE", spec.sampling_rate_hz, de)?,
                VibrationRecord::new("FE", spec.sampling_rate_hz, fe)?,
            ],
        ));
    }
    Ok(out)
}

/// Labeled, segmented, DE+FE-fused synthetic dataset.
pub fn synth_dataset(spec: &SynthSpec, seed: u64) -> Result<FaultDataset> {
    let records = synth_records(spec, seed)?;
    let mut de = Vec::new();
    let mut fe = Vec::new();
    let mut labels = Vec::new();
    for (class, [rde, rfe]) in &records {
        de.extend(segment_record(rde, spec.points_per_channel, spec.samples_per_class)?);
        fe.extend(segment_record(rfe, spec.points_per_channel, spec.samples_per_class)?);
        labels.extend(std::iter::repeat_n(*class, spec.samples_per_class));
    }
    let class_map = spec
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| (i as ClassId + 1, c.label.clone()))
        .collect();
    fuse_channels(
        &[("DE".to_string(), de), ("FE".to_string(), fe)],
        &labels,
        &FusionMode::Concat,
        class_map,
    )
}
