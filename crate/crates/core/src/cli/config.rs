use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::synth::SynthProfile;
use crate::classify::{ImportanceMethod, TrainConfig};
use crate::error::{Error, Result};
use crate::features::FeatureLayout;
use crate::nbs::NbsConfig;
use crate::netsim::NetworkConfig;
use crate::proxies::FcConfig;

/// Band-pass applied to raw recordings before epoching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub order: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            lo_hz: 0.5,
            hi_hz: 45.0,
            order: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_runs: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { n_runs: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub train: TrainConfig,
    pub folds: usize,
    pub importance: ImportanceMethod,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            folds: 5,
            importance: ImportanceMethod::Permutation { repeats: 5 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    /// Simulated subjects per group.
    pub n_subjects: usize,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self { n_subjects: 30 }
    }
}

/// Every tunable of every command. Missing sections take their defaults;
/// unknown top-level keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub preprocess: PreprocessConfig,
    pub features: FeatureLayout,
    pub nbs: NbsConfig,
    pub network: NetworkConfig,
    pub fc: FcConfig,
    pub sim: SimConfig,
    pub classify: ClassifyConfig,
    pub synth: SynthProfile,
    pub stats: StatsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out_dir: PathBuf::from("out"),
            preprocess: PreprocessConfig::default(),
            features: FeatureLayout::default(),
            nbs: NbsConfig::default(),
            network: NetworkConfig::default(),
            fc: FcConfig::default(),
            sim: SimConfig::default(),
            classify: ClassifyConfig::default(),
            synth: SynthProfile::default(),
            stats: StatsConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Cheap checks run before any command computes anything.
    pub fn validate(&self) -> Result<()> {
        let p = &self.preprocess;
        if !(p.lo_hz > 0.0 && p.hi_hz > p.lo_hz) || p.order == 0 {
            return Err(Error::Config(format!(
                "preprocess band {}..{} Hz / order {} is invalid",
                p.lo_hz, p.hi_hz, p.order
            )));
        }
        if self.features.is_empty() || self.features.epoch_len == 0 {
            return Err(Error::Config("feature layout is empty".into()));
        }
        if !(self.nbs.alpha > 0.0 && self.nbs.alpha < 1.0) || self.nbs.n_perm == 0 {
            return Err(Error::Config("nbs alpha must be in (0, 1) and n_perm > 0".into()));
        }
        self.network.validate()?;
        self.fc.validate()?;
        if self.sim.n_runs == 0 {
            return Err(Error::Config("sim.n_runs must be >= 1".into()));
        }
        self.classify.train.validate()?;
        if self.classify.folds < 2 {
            return Err(Error::Config("classify.folds must be >= 2".into()));
        }
        self.synth.validate()?;
        if self.stats.n_subjects < 2 {
            return Err(Error::Config("stats.n_subjects must be >= 2".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
