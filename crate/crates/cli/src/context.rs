//! Config resolution shared by every subcommand: file + overrides + seed.

use crate::CliError;
use sha2::{Digest, Sha256};
use std::path::PathBuf;
use tiltnet_core::{Config, NetworkParams};

pub struct Context {
    pub config: Config,
    pub params: NetworkParams,
    pub seed: u64,
    pub hash: String,
}

impl Context {
    pub fn build(
        config_path: Option<&PathBuf>,
        overrides: &[String],
        seed_flag: Option<u64>,
    ) -> Result<Self, CliError> {
        let mut config = match config_path {
            Some(p) => Config::load(p).map_err(CliError::usage)?,
            None => Config::default(),
        };
        for entry in overrides {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got {entry}")))?;
            config = config
                .with_override(key.trim(), value.trim())
                .map_err(CliError::usage)?;
        }
        let params = config.to_params().map_err(CliError::usage)?;
        // Seed precedence: flag, then TILTNET_SEED, then the config file.
        let seed = match seed_flag {
            Some(s) => s,
            None => match std::env::var("TILTNET_SEED") {
                Ok(v) => v
                    .parse::<u64>()
                    .map_err(|_| CliError::Usage(format!("TILTNET_SEED must be a u64, got {v}")))?,
                Err(_) => config.run.seed,
            },
        };
        let canonical = config.canonical_toml();
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hasher.update(seed.to_le_bytes());
        let digest = hasher.finalize();
        let hash: String = digest[..6].iter().map(|b| format!("{b:02x}")).collect();
        Ok(Self {
            config,
            params,
            seed,
            hash,
        })
    }

    /// Flattened `section.key=value` lines of the resolved config.
    pub fn config_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        for line in self.config.canonical_toml().lines() {
            lines.push(line.to_string());
        }
        lines
    }
}
