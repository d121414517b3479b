use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{fuse_channels, load_record, segment_record, ClassId, FaultDataset, FusionMode, RecordFormat};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestClass {
    pub id: ClassId,
    pub label: String,
    /// Channel name to signal file, relative to the manifest's directory.
    pub files: BTreeMap<String, String>,
}

/// JSON description of a labeled recording set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub classes: Vec<ManifestClass>,
    pub sampling_rate_hz: f64,
    pub points_per_sample: usize,
    pub samples_per_class: usize,
    /// Fusion order. Defaults to DE, FE, then any other channel alphabetically.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<String>>,
    /// Signal file format; guessed from each file's extension when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<RecordFormat>,
}

impl DatasetManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn channel_order(&self) -> Vec<String> {
        if let Some(c) = &self.channels {
            return c.clone();
        }
        let mut names: Vec<String> = self
            .classes
            .iter()
            .flat_map(|c| c.files.keys().cloned())
            .collect();
        names.sort_by_key(|n| {
            (
                match n.as_str() {
                    "DE" => 0,
                    "FE" => 1,
                    _ => 2,
                },
                n.clone(),
            )
        });
        names.dedup();
        names
    }
}

/// Loads, segments, and fuses every file a manifest names.
pub fn load_manifest(path: impl AsRef<Path>, mode: &FusionMode) -> Result<FaultDataset> {
    let path = path.as_ref();
    let manifest = DatasetManifest::read(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let channels = manifest.channel_order();
    if channels.is_empty() {
        return Err(Error::InvalidArgument("manifest names no channels".into()));
    }

    let mut per_channel: Vec<(String, Vec<Vec<f64>>)> =
        channels.iter().map(|c| (c.clone(), Vec::new())).collect();
    let mut labels = Vec::new();
    let mut class_map = BTreeMap::new();
    for class in &manifest.classes {
        if class_map.insert(class.id, class.label.clone()).is_some() {
            return Err(Error::InvalidArgument(format!("class id {} listed twice", class.id)));
        }
        for (name, windows) in per_channel.iter_mut() {
            let file = class.files.get(name).ok_or_else(|| {
                Error::InvalidArgument(format!("class {} has no {name} file", class.id))
            })?;
            let file: PathBuf = base.join(file);
            let format = manifest.format.unwrap_or_else(|| RecordFormat::from_path(&file));
            let record = load_record(&file, format, manifest.sampling_rate_hz, name)?;
            windows.extend(segment_record(
                &record,
                manifest.points_per_sample,
                manifest.samples_per_class,
            )?);
        }
        labels.extend(std::iter::repeat_n(class.id, manifest.samples_per_class));
    }
    fuse_channels(&per_channel, &labels, mode, class_map)
}
