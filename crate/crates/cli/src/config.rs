//! Config file and flag resolution.
//!
//! ```toml
//! seed = 7
//! backend = "householder"   # householder | givens | two_step
//! workers = 8
//! split = 0.8
//! trials = 10000
//! norm_policy = "strict"    # strict | warn
//! phenomenon = "negation"
//! model_id = "text-embedding-3-small"
//! cache_dir = ".rise-cache"
//!
//! [provider]
//! endpoint_url = "https://api.example.com/v1/embeddings"
//! model_id = "text-embedding-3-small"
//! auth_token_env_var = "EMBED_API_KEY"
//! ```
//!
//! Every key is optional. A flag on the command line wins over the file,
//! which wins over the built-in default.

use std::path::{Path, PathBuf};

use rise_core::io::ProviderConfig;
use rise_core::{NormPolicy, RotorBackend};
use serde::{Deserialize, Serialize};

use crate::cli::Common;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub backend: Option<RotorBackend>,
    pub workers: Option<usize>,
    pub split: Option<f64>,
    pub trials: Option<usize>,
    pub norm_policy: Option<NormPolicy>,
    pub phenomenon: Option<String>,
    pub model_id: Option<String>,
    pub cache_dir: Option<PathBuf>,
    pub provider: Option<ProviderConfig>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SPLIT: f64 = 0.8;
pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_PHENOMENON: &str = "shift";
pub const DEFAULT_CACHE_DIR: &str = ".rise-cache";

/// Effective settings of one run, recorded in its manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub seed: u64,
    pub backend: RotorBackend,
    pub norm_policy: NormPolicy,
    pub split: f64,
    pub trials: usize,
    pub phenomenon: Option<String>,
    pub model_id: String,
    pub workers: Option<usize>,
}

impl Settings {
    pub fn resolve(file: &ConfigFile, common: &Common, workers: Option<usize>) -> Self {
        Self {
            seed: common.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            backend: common.backend.or(file.backend).unwrap_or_default(),
            norm_policy: common.norm_policy.or(file.norm_policy).unwrap_or_default(),
            split: file.split.unwrap_or(DEFAULT_SPLIT),
            trials: file.trials.unwrap_or(DEFAULT_TRIALS),
            phenomenon: file.phenomenon.clone(),
            model_id: file.model_id.clone().unwrap_or_default(),
            workers: workers.or(file.workers),
        }
    }

    pub fn with_split(mut self, flag: Option<f64>) -> Self {
        if let Some(s) = flag {
            self.split = s;
        }
        self
    }

    pub fn with_trials(mut self, flag: Option<usize>) -> Self {
        if let Some(t) = flag {
            self.trials = t;
        }
        self
    }

    pub fn with_phenomenon(mut self, flag: Option<&String>) -> Self {
        if let Some(p) = flag {
            self.phenomenon = Some(p.clone());
        }
        self
    }

    pub fn with_model_id(mut self, flag: Option<&String>) -> Self {
        if let Some(m) = flag {
            self.model_id = m.clone();
        }
        self
    }

    pub fn phenomenon_or_default(&self) -> String {
        self.phenomenon.clone().unwrap_or_else(|| DEFAULT_PHENOMENON.into())
    }
}
