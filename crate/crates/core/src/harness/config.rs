use std::path::Path;

use serde::{Deserialize, Serialize};

use super::export::read_json;
use crate::error::{Error, Result};
use crate::fem::FemSettings;
use crate::model::ModelParams;
use crate::pinn::NetworkConfig;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSection {
    pub alpha: f64,
    pub ha_sq: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let p = ModelParams::default();
        Self {
            alpha: p.alpha(),
            ha_sq: p.ha_sq(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FemSection {
    pub cells: usize,
    #[serde(flatten)]
    pub settings: FemSettings,
}

impl Default for FemSection {
    fn default() -> Self {
        Self {
            cells: 1024,
            settings: FemSettings::default(),
        }
    }
}

/// Run configuration file. Every section is optional and falls back to
/// the defaults; `schema_version` is required.
///
/// ```json
/// { "schema_version": 1, "model": { "alpha": 0.5 }, "network": { "epochs": 5000 } }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub schema_version: u32,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub fem: FemSection,
    #[serde(default)]
    pub master_seed: u64,
    /// Keys present in the file's `network` section.
    #[serde(skip)]
    network_keys: Option<serde_json::Map<String, serde_json::Value>>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            model: ModelSection::default(),
            network: NetworkConfig::default(),
            fem: FemSection::default(),
            master_seed: 0,
            network_keys: None,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let raw: serde_json::Value = read_json(path)?;
        let mut cfg: Self = serde_json::from_value(raw.clone()).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.network_keys = raw.get("network").and_then(|n| n.as_object()).cloned();
        if cfg.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!(
                "{}: unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                path.display(),
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// `base` with only the keys the file actually sets in its `network`
    /// section applied on top.
    pub fn network_over(&self, base: &NetworkConfig) -> Result<NetworkConfig> {
        let Some(keys) = &self.network_keys else {
            return Ok(base.clone());
        };
        let mut merged =
            serde_json::to_value(base).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        if let Some(obj) = merged.as_object_mut() {
            for (k, v) in keys {
                obj.insert(k.clone(), v.clone());
            }
        }
        serde_json::from_value(merged)
            .map_err(|e| Error::InvalidParameter(format!("network section: {e}")))
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        ModelParams::new(self.model.alpha, self.model.ha_sq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::write_json;

    #[test]
    fn partial_file_keeps_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"schema_version": 1, "model": {"alpha": 0.25}, "network": {"epochs": 42}, "fem": {"cells": 64, "r_tol": 1e-8}}"#,
        )
        .unwrap();
        let c = Config::load(&path).unwrap();
        assert_eq!(c.model.alpha, 0.25);
        assert_eq!(c.model.ha_sq, 1.0);
        assert_eq!(c.network.epochs, 42);
        assert_eq!(c.network.neurons_per_layer, 16);
        assert_eq!(c.fem.cells, 64);
        assert_eq!(c.fem.settings.r_tol, 1e-8);
        assert_eq!(c.fem.settings.i_max, 50);
    }

    #[test]
    fn network_section_overlays_only_given_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"schema_version": 1, "network": {"epochs": 42}}"#).unwrap();
        let c = Config::load(&path).unwrap();
        let base = NetworkConfig {
            hidden_layers: 1,
            ..NetworkConfig::default()
        };
        let n = c.network_over(&base).unwrap();
        assert_eq!((n.epochs, n.hidden_layers), (42, 1));
        assert_eq!(Config::default().network_over(&base).unwrap(), base);
    }

    #[test]
    fn schema_version_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"model": {}}"#).unwrap();
        assert!(Config::load(&path).is_err());
        std::fs::write(&path, r#"{"schema_version": 9}"#).unwrap();
        assert!(Config::load(&path).is_err());
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let c = Config::default();
        write_json(&c, &path).unwrap();
        let back = Config::load(&path).unwrap();
        assert_eq!(
            (back.model, &back.fem, back.master_seed),
            (c.model, &c.fem, c.master_seed)
        );
        assert_eq!(back.network, c.network);
    }

    #[test]
    fn invalid_model_rejected() {
        let c = Config {
            model: ModelSection {
                alpha: -1.0,
                ha_sq: 1.0,
            },
            ..Config::default()
        };
        assert!(c.model_params().is_err());
    }
}
