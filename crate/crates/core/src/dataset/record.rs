use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One accelerometer channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VibrationRecord {
    pub channel_id: String,
    pub sampling_rate_hz: f64,
    pub samples: Vec<f64>,
}

impl VibrationRecord {
    pub fn new(channel_id: impl Into<String>, sampling_rate_hz: f64, samples: Vec<f64>) -> Result<Self> {
        if !(sampling_rate_hz > 0.0 && sampling_rate_hz.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sampling rate must be positive, got {sampling_rate_hz}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::NoSamples);
        }
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(VibrationRecord {
            channel_id: channel_id.into(),
            sampling_rate_hz,
            samples,
        })
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sampling_rate_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecordFormat {
    /// One decimal or scientific-notation value per line.
    Csv,
    /// Headerless little-endian IEEE-754 doubles.
    RawF64Le,
}

impl RecordFormat {
    /// Guess from the file extension: `.bin`, `.raw`, `.f64` are raw, anything
    /// else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin" | "raw" | "f64") => RecordFormat::RawF64Le,
            _ => RecordFormat::Csv,
        }
    }
}

impl std::str::FromStr for RecordFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(RecordFormat::Csv),
            "raw-f64-le" | "raw" => Ok(RecordFormat::RawF64Le),
            other => Err(Error::InvalidArgument(format!("unknown record format {other:?}"))),
        }
    }
}

pub fn load_record(
    path: impl AsRef<Path>,
    format: RecordFormat,
    sampling_rate_hz: f64,
    channel_id: &str,
) -> Result<VibrationRecord> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let samples = match format {
        RecordFormat::Csv => parse_csv(path, &bytes)?,
        RecordFormat::RawF64Le => parse_raw(path, &bytes)?,
    };
    VibrationRecord::new(channel_id, sampling_rate_hz, samples)
}

pub(crate) fn parse_csv(path: &Path, bytes: &[u8]) -> Result<Vec<f64>> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        Error::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    })?;
    let mut out = Vec::new();
    for token in text.lines().flat_map(|l| l.split(',')).map(str::trim) {
        if token.is_empty() {
            continue;
        }
        let index = out.len();
        let value: f64 = token.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            index,
            token: token.to_string(),
        })?;
        if !value.is_finite() {
            return Err(Error::NonFinite { index, value });
        }
        out.push(value);
    }
    Ok(out)
}

pub(crate) fn parse_raw(path: &Path, bytes: &[u8]) -> Result<Vec<f64>> {
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::Shape(format!(
            "{}: raw file length {} is not a multiple of 8",
            path.display(),
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// `n_samples` contiguous, non-overlapping windows of `points_per_sample`
/// values from the start of the record.
pub fn segment_record(
    record: &VibrationRecord,
    points_per_sample: usize,
    n_samples: usize,
) -> Result<Vec<Vec<f64>>> {
    if points_per_sample == 0 {
        return Err(Error::InvalidArgument("points per sample must be positive".into()));
    }
    let needed = points_per_sample * n_samples;
    if record.samples.len() < needed {
        return Err(Error::RecordTooShort {
            needed,
            got: record.samples.len(),
        });
    }
    Ok(record.samples[..needed]
        .chunks_exact(points_per_sample)
        .map(<[f64]>::to_vec)
        .collect())
}
