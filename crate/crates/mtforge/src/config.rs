//! Optional JSON config supplying defaults; command-line flags win.

use std::path::Path;

use mtforge_core::filter::FilterRule;
use mtforge_core::mixture::MixtureSpec;
use serde::{Deserialize, Serialize};

use crate::io::CorpusError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub registry: Option<String>,
    pub aux: Option<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub downsample: DownsampleBlock,
    pub mixture: Option<MixtureSpec>,
    pub filter: FilterBlock,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DownsampleBlock {
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterBlock {
    pub rules: Option<Vec<FilterRule>>,
    pub tau: Option<f64>,
    pub thresholds: Option<Vec<f64>>,
}

impl PipelineConfig {
    pub fn load(path: &str) -> Result<Self, CorpusError> {
        read_json(path)
    }

    /// Files named by the config must exist.
    pub fn check_paths(&self) -> Result<(), CorpusError> {
        let named = [
            self.registry.as_deref().filter(|r| *r != "builtin"),
            self.aux.as_deref(),
        ];
        for path in named.into_iter().flatten() {
            if !Path::new(path).is_file() {
                return Err(CorpusError::File {
                    path: path.to_string(),
                    message: "referenced by config but not found".into(),
                });
            }
        }
        Ok(())
    }
}

/// Reads a single JSON document.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CorpusError::Line {
        path: path.to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}
