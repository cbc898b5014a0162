//! Run settings: command-line flags layered over an optional TOML file layered
//! over built-in defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use reqshape::semantics::ComfortRobustness;
use reqshape::TerminalPotential;

/// Bad invocation: unknown values, missing or unreadable inputs. Exits with 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EnvKind {
    Grid,
    Pointmass,
}

impl EnvKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvKind::Grid => "grid",
            EnvKind::Pointmass => "pointmass",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Terminal {
    Zero,
    Free,
}

impl From<Terminal> for TerminalPotential {
    fn from(t: Terminal) -> Self {
        match t {
            Terminal::Zero => TerminalPotential::Zero,
            Terminal::Free => TerminalPotential::Free,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ComfortMode {
    Min,
    Mean,
}

impl From<ComfortMode> for ComfortRobustness {
    fn from(m: ComfortMode) -> Self {
        match m {
            ComfortMode::Min => ComfortRobustness::Min,
            ComfortMode::Mean => ComfortRobustness::Mean,
        }
    }
}

/// Every tunable setting, each optional. Used both for the TOML file and for
/// the flags given on one invocation.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub spec: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub env: Option<EnvKind>,
    pub env_config: Option<PathBuf>,
    pub reward: Option<String>,
    pub seeds: Option<Vec<u64>>,
    pub horizon: Option<usize>,
    pub gamma: Option<f64>,
    pub episodes: Option<usize>,
    pub alpha: Option<f64>,
    pub eval_interval: Option<usize>,
    pub eval_episodes: Option<usize>,
    pub comfort_cutoff: Option<f64>,
    pub bhnr_window: Option<usize>,
    pub terminal: Option<Terminal>,
    pub comfort_robustness: Option<ComfortMode>,
    pub vi_epsilon: Option<f64>,
    pub grids: Option<Vec<PathBuf>>,
}

impl Settings {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
    }

    /// Field-wise `self` where set, otherwise `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        Settings {
            spec: self.spec.or(lower.spec),
            trace: self.trace.or(lower.trace),
            env: self.env.or(lower.env),
            env_config: self.env_config.or(lower.env_config),
            reward: self.reward.or(lower.reward),
            seeds: self.seeds.or(lower.seeds),
            horizon: self.horizon.or(lower.horizon),
            gamma: self.gamma.or(lower.gamma),
            episodes: self.episodes.or(lower.episodes),
            alpha: self.alpha.or(lower.alpha),
            eval_interval: self.eval_interval.or(lower.eval_interval),
            eval_episodes: self.eval_episodes.or(lower.eval_episodes),
            comfort_cutoff: self.comfort_cutoff.or(lower.comfort_cutoff),
            bhnr_window: self.bhnr_window.or(lower.bhnr_window),
            terminal: self.terminal.or(lower.terminal),
            comfort_robustness: self.comfort_robustness.or(lower.comfort_robustness),
            vi_epsilon: self.vi_epsilon.or(lower.vi_epsilon),
            grids: self.grids.or(lower.grids),
        }
    }
}

pub const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

/// Effective settings after defaults, echoed to `run.json` and hashed into
/// every CSV header.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub spec: Option<String>,
    pub trace: Option<String>,
    pub env: EnvKind,
    pub env_config: Option<String>,
    pub grids: Vec<String>,
    pub reward: String,
    pub seeds: Vec<u64>,
    pub horizon: Option<usize>,
    pub gamma: f64,
    pub episodes: usize,
    pub alpha: f64,
    pub eval_interval: usize,
    pub eval_episodes: usize,
    pub comfort_cutoff: f64,
    pub bhnr_window: usize,
    pub terminal: Terminal,
    pub comfort_robustness: ComfortMode,
    pub vi_epsilon: f64,
    /// SHA-256 of every input file read by the run.
    pub inputs: BTreeMap<String, String>,
}

impl RunConfig {
    /// `seed_fallback` comes from the environment and is used only when
    /// neither flags nor the file list seeds.
    pub fn resolve(command: &str, s: Settings, seed_fallback: Option<u64>) -> anyhow::Result<Self> {
        let path = |p: Option<PathBuf>| p.map(|p| p.display().to_string());
        let seeds = s
            .seeds
            .or(seed_fallback.map(|x| vec![x]))
            .unwrap_or_else(|| DEFAULT_SEEDS.to_vec());
        if seeds.is_empty() {
            return Err(usage("seed list is empty"));
        }
        let cfg = RunConfig {
            command: command.to_string(),
            spec: path(s.spec),
            trace: path(s.trace),
            env: s.env.unwrap_or(EnvKind::Grid),
            env_config: path(s.env_config),
            grids: s
                .grids
                .unwrap_or_default()
                .into_iter()
                .map(|p| p.display().to_string())
                .collect(),
            reward: s.reward.unwrap_or_else(|| "hprs".to_string()),
            seeds,
            horizon: s.horizon,
            gamma: s.gamma.unwrap_or(0.99),
            episodes: s.episodes.unwrap_or(2000),
            alpha: s.alpha.unwrap_or(0.1),
            eval_interval: s.eval_interval.unwrap_or(25),
            eval_episodes: s.eval_episodes.unwrap_or(5),
            comfort_cutoff: s
                .comfort_cutoff
                .unwrap_or(reqshape::assessment::DEFAULT_COMFORT_CUTOFF),
            bhnr_window: s.bhnr_window.unwrap_or(10),
            terminal: s.terminal.unwrap_or(Terminal::Zero),
            comfort_robustness: s.comfort_robustness.unwrap_or(ComfortMode::Min),
            vi_epsilon: s.vi_epsilon.unwrap_or(1e-10),
            inputs: BTreeMap::new(),
        };
        if !(cfg.gamma > 0.0 && cfg.gamma <= 1.0) {
            return Err(usage(format!("gamma {} outside (0, 1]", cfg.gamma)));
        }
        if cfg.bhnr_window == 0 {
            return Err(usage("bhnr window must be positive"));
        }
        if cfg.horizon == Some(0) {
            return Err(usage("horizon must be positive"));
        }
        Ok(cfg)
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &str) -> anyhow::Result<String> {
        let bytes = std::fs::read(path).map_err(|e| usage(format!("cannot read {path}: {e}")))?;
        self.inputs
            .insert(path.to_string(), hex::encode(Sha256::digest(&bytes)));
        String::from_utf8(bytes).with_context(|| format!("{path} is not UTF-8"))
    }

    pub fn record_bundled(&mut self, name: &str, text: &str) {
        self.inputs.insert(
            format!("bundled:{name}"),
            hex::encode(Sha256::digest(text.as_bytes())),
        );
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

pub fn seed_from_env() -> anyhow::Result<Option<u64>> {
    match std::env::var("HPRS_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("HPRS_SEED must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}
