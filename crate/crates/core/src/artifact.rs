//! On-disk JSON artifacts. Every file carries a `provenance` object next to
//! its payload; readers ignore it.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::diagnoser::Diagnoser;
use crate::error::{Error, Result};
use crate::features::FeatureExtractor;
use crate::ovr::OvrEnsemble;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the effective run configuration.
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub version: String,
}

impl Provenance {
    pub fn new(config_sha256: String, seed: Option<u64>) -> Self {
        Provenance {
            config_sha256,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Serializes `payload` as a JSON object with a `provenance` member added.
/// Non-object payloads are wrapped as `{"result": …}`.
pub fn to_json_with_provenance(payload: &impl Serialize, provenance: &Provenance) -> Result<String> {
    let mut obj = match serde_json::to_value(payload)? {
        Value::Object(m) => m,
        other => serde_json::Map::from_iter([("result".to_string(), other)]),
    };
    obj.insert("provenance".into(), serde_json::to_value(provenance)?);
    let mut text = serde_json::to_string_pretty(&Value::Object(obj))?;
    text.push('\n');
    Ok(text)
}

/// Writes through a temporary sibling file and a rename, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

impl Diagnoser {
    pub fn from_json(model_json: &str, extractor_json: &str) -> Result<Self> {
        let ensemble: OvrEnsemble = serde_json::from_str(model_json)?;
        let extractor: FeatureExtractor = serde_json::from_str(extractor_json)?;
        Diagnoser::new(extractor, ensemble)
    }

    /// Reads a `model.json` / `extractor.json` pair.
    pub fn load(model_path: &Path, extractor_path: &Path) -> Result<Self> {
        Diagnoser::new(read_json(extractor_path)?, read_json(model_path)?)
    }
}
