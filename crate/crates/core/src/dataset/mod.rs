//! Labeled vibration data: ingestion, segmentation, channel fusion, noise
//! injection, synthetic generation, and stratified splitting.

mod manifest;
mod noise;
mod record;
mod split;
mod synth;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use manifest::{load_manifest, DatasetManifest, ManifestClass};
pub use noise::inject_noise;
pub(crate) use record::{parse_csv, parse_raw};
pub use record::{load_record, segment_record, RecordFormat, VibrationRecord};
pub use split::{stratified_split, stratified_split_indices};
pub use synth::{synth_dataset, synth_records, ClassSignature, SynthSpec};

/// Class id of a sample; classes are numbered from 1.
pub type ClassId = u32;

/// One labeled window, possibly spanning several fused channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentedSample {
    pub class_id: ClassId,
    pub points: Vec<f64>,
}

/// How per-channel windows are combined into samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FusionMode {
    /// Join the channels of each window in their declared order.
    Concat,
    /// Keep only the named channel.
    Single(String),
}

impl std::str::FromStr for FusionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concat" | "fused" => Ok(FusionMode::Concat),
            other => Ok(FusionMode::Single(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultDataset {
    pub samples: Vec<SegmentedSample>,
    pub class_map: BTreeMap<ClassId, String>,
    pub points_per_channel: usize,
    pub channels: Vec<String>,
}

impl FaultDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_len(&self) -> usize {
        self.points_per_channel * self.channels.len()
    }

    pub fn labels(&self) -> Vec<ClassId> {
        self.samples.iter().map(|s| s.class_id).collect()
    }

    pub fn class_ids(&self) -> Vec<ClassId> {
        self.class_map.keys().copied().collect()
    }

    /// Samples per class, in class-id order.
    pub fn class_counts(&self) -> BTreeMap<ClassId, usize> {
        let mut counts: BTreeMap<ClassId, usize> =
            self.class_map.keys().map(|&c| (c, 0)).collect();
        for s in &self.samples {
            *counts.entry(s.class_id).or_default() += 1;
        }
        counts
    }

    /// The `channel`-th segment of sample `index`.
    pub fn channel_points(&self, index: usize, channel: usize) -> &[f64] {
        let l = self.points_per_channel;
        &self.samples[index].points[channel * l..(channel + 1) * l]
    }

    /// A dataset with the given samples (in the given order) and the same
    /// metadata. The class map is kept whole even if a class ends up empty.
    pub fn subset(&self, indices: &[usize]) -> FaultDataset {
        FaultDataset {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            class_map: self.class_map.clone(),
            points_per_channel: self.points_per_channel,
            channels: self.channels.clone(),
        }
    }

    /// Checks shape and labeling invariants. Empty classes are allowed only
    /// when `allow_empty_classes` is set (split halves may lack a class).
    pub fn validate(&self, allow_empty_classes: bool) -> Result<()> {
        if self.channels.is_empty() || self.points_per_channel == 0 {
            return Err(Error::Shape("dataset has no channels or zero-length windows".into()));
        }
        let expected = self.sample_len();
        for (i, s) in self.samples.iter().enumerate() {
            if s.points.len() != expected {
                return Err(Error::Shape(format!(
                    "sample {i} has {} points, expected {expected}",
                    s.points.len()
                )));
            }
            if !self.class_map.contains_key(&s.class_id) {
                return Err(Error::InvalidArgument(format!(
                    "sample {i} has class {} missing from the class map",
                    s.class_id
                )));
            }
        }
        if !allow_empty_classes {
            if let Some((c, _)) = self.class_counts().into_iter().find(|&(_, n)| n == 0) {
                return Err(Error::ClassTooSmall {
                    class: c,
                    have: 0,
                    need: 1,
                });
            }
        }
        Ok(())
    }
}

/// Builds a dataset from per-channel windows.
///
/// `per_channel` is ordered; concat mode joins window `i` of every channel in
/// that order. `labels[i]` is the class of window index `i`.
pub fn fuse_channels(
    per_channel: &[(String, Vec<Vec<f64>>)],
    labels: &[ClassId],
    mode: &FusionMode,
    class_map: BTreeMap<ClassId, String>,
) -> Result<FaultDataset> {
    let (first_name, first) = per_channel
        .first()
        .ok_or_else(|| Error::Shape("no channels given".into()))?;
    let n = first.len();
    let l = first.first().map_or(0, Vec::len);
    if l == 0 {
        return Err(Error::Shape(format!("channel {first_name} has no windows")));
    }
    for (name, windows) in per_channel {
        if windows.len() != n {
            return Err(Error::Shape(format!(
                "channel {name} has {} windows, {first_name} has {n}",
                windows.len()
            )));
        }
        if let Some(w) = windows.iter().find(|w| w.len() != l) {
            return Err(Error::Shape(format!(
                "channel {name} has a window of length {}, expected {l}",
                w.len()
            )));
        }
    }
    if labels.len() != n {
        return Err(Error::Shape(format!(
            "{} labels for {n} windows",
            labels.len()
        )));
    }

    let selected: Vec<&(String, Vec<Vec<f64>>)> = match mode {
        FusionMode::Concat => per_channel.iter().collect(),
        FusionMode::Single(name) => vec![per_channel
            .iter()
            .find(|(c, _)| c == name)
            .ok_or_else(|| Error::UnknownChannel(name.clone()))?],
    };

    let samples = (0..n)
        .map(|i| {
            let mut points = Vec::with_capacity(l * selected.len());
            for (_, windows) in &selected {
                points.extend_from_slice(&windows[i]);
            }
            SegmentedSample {
                class_id: labels[i],
                points,
            }
        })
        .collect();

    let ds = FaultDataset {
        samples,
        class_map,
        points_per_channel: l,
        channels: selected.iter().map(|(c, _)| c.clone()).collect(),
    };
    ds.validate(false)?;
    Ok(ds)
}

/// Default human labels: `class 1`, `class 2`, ...
pub fn numbered_class_map(n_classes: u32) -> BTreeMap<ClassId, String> {
    (1..=n_classes).map(|c| (c, format!("class {c}"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_channels(l: usize, n: usize) -> Vec<(String, Vec<Vec<f64>>)> {
        let de = (0..n).map(|i| vec![i as f64; l]).collect();
        let fe = (0..n).map(|i| vec![-(i as f64); l]).collect();
        vec![("DE".to_string(), de), ("FE".to_string(), fe)]
    }

    #[test]
    fn concat_doubles_sample_length() {
        let ch = two_channels(1600, 2);
        let ds = fuse_channels(&ch, &[1, 2], &FusionMode::Concat, numbered_class_map(2)).unwrap();
        assert_eq!(ds.samples[0].points.len(), 3200);
        assert_eq!(ds.channels, vec!["DE", "FE"]);
        assert_eq!(ds.channel_points(1, 0), &ch[0].1[1][..]);
        assert_eq!(ds.channel_points(1, 1), &ch[1].1[1][..]);
    }

    #[test]
    fn single_keeps_one_channel() {
        let ch = two_channels(1600, 2);
        let mode = FusionMode::Single("DE".into());
        let ds = fuse_channels(&ch, &[1, 2], &mode, numbered_class_map(2)).unwrap();
        assert_eq!(ds.samples[0].points.len(), 1600);
        assert_eq!(ds.channels, vec!["DE"]);
    }

    #[test]
    fn one_channel_concat_equals_single() {
        let ch = vec![two_channels(8, 3).remove(0)];
        let a = fuse_channels(&ch, &[1, 1, 2], &FusionMode::Concat, numbered_class_map(2)).unwrap();
        let b = fuse_channels(
            &ch,
            &[1, 1, 2],
            &FusionMode::Single("DE".into()),
            numbered_class_map(2),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fusion_errors() {
        let mut ch = two_channels(4, 2);
        let mode = FusionMode::Single("XX".into());
        assert!(matches!(
            fuse_channels(&ch, &[1, 2], &mode, numbered_class_map(2)),
            Err(Error::UnknownChannel(_))
        ));
        assert!(matches!(
            fuse_channels(&ch, &[1], &FusionMode::Concat, numbered_class_map(2)),
            Err(Error::Shape(_))
        ));
        ch[1].1.pop();
        assert!(matches!(
            fuse_channels(&ch, &[1, 2], &FusionMode::Concat, numbered_class_map(2)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn class_without_samples_is_rejected() {
        let ch = two_channels(4, 2);
        assert!(matches!(
            fuse_channels(&ch, &[1, 1], &FusionMode::Concat, numbered_class_map(2)),
            Err(Error::ClassTooSmall { class: 2, .. })
        ));
    }
}
