//! The experiment configuration: one TOML document with a table per concern.
//! Every field has a default, so an empty file is a valid configuration, and
//! any field can be overridden with a dotted `section.key=value` assignment.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use harvest_core::embeddings::{Algorithm, EmbedConfig};
use harvest_core::generators::presets;
use harvest_core::{Error, Result};
use harvest_nac::{OnlineConfig, TrainConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Directory every verb writes into.
    pub output: PathBuf,
    pub experiment: ExperimentConfig,
    pub embed: EmbedConfig,
    pub train: TrainConfig,
    pub online: OnlineConfig,
    pub embedbench: EmbedBenchConfig,
    pub generate: GenerateConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            output: PathBuf::from("runs"),
            experiment: ExperimentConfig::default(),
            embed: EmbedConfig::default(),
            train: TrainConfig::default(),
            online: OnlineConfig::default(),
            embedbench: EmbedBenchConfig::default(),
            generate: GenerateConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Nac,
    Mod,
    Ppr,
    Nol,
    Random,
}

impl AgentKind {
    pub const ALL: [AgentKind; 5] = [
        AgentKind::Nac,
        AgentKind::Mod,
        AgentKind::Ppr,
        AgentKind::Nol,
        AgentKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Nac => "nac",
            AgentKind::Mod => "mod",
            AgentKind::Ppr => "ppr",
            AgentKind::Nol => "nol",
            AgentKind::Random => "random",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Instance family used when no dataset is given.
    pub preset: String,
    /// Edge list to harvest instead of a preset.
    pub dataset: Option<PathBuf>,
    /// Target list for `dataset`. Without it the preset's anomalies are
    /// implanted into the loaded network.
    pub labels: Option<PathBuf>,
    pub agent: AgentKind,
    /// Checkpoint directory, required for the `nac` agent.
    pub checkpoint: Option<PathBuf>,
    pub budget: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// Evaluate the embedding before every probe (accuracy and entropy columns).
    pub metrics: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            preset: "nac-small".into(),
            dataset: None,
            labels: None,
            agent: AgentKind::Mod,
            checkpoint: None,
            budget: 120,
            repetitions: 10,
            seed: 1,
            metrics: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedBenchConfig {
    pub algorithms: Vec<Algorithm>,
    pub r: Vec<f64>,
    pub p_t: Vec<f64>,
    pub instances: usize,
    pub seed: u64,
    /// Per-algorithm cap on traversal steps, keyed by algorithm name.
    pub step_caps: BTreeMap<String, usize>,
}

impl Default for EmbedBenchConfig {
    fn default() -> Self {
        EmbedBenchConfig {
            algorithms: Algorithm::ALL.to_vec(),
            r: presets::EMBED_GRID_R.to_vec(),
            p_t: presets::EMBED_GRID_PT.to_vec(),
            instances: presets::EMBED_GRID_INSTANCES,
            seed: 2,
            step_caps: BTreeMap::new(),
        }
    }
}

impl EmbedBenchConfig {
    pub fn step_cap(&self, algorithm: Algorithm) -> Option<usize> {
        self.step_caps.get(algorithm.name()).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateConfig {
    /// A preset name, or `embed-grid` for the embedding benchmark grid as
    /// configured in `[embedbench]`.
    pub preset: String,
    /// Instances to draw from a preset (the grid sets its own count).
    pub count: usize,
    pub seed: u64,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            preset: "nac-small".into(),
            count: 10,
            seed: 3,
        }
    }
}

pub const EMBED_GRID: &str = "embed-grid";

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let value: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_table(value)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        let mut cfg: Config = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.train.embed = cfg.embed.clone();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` (if any), applies the `key=value` overrides in order and
    /// validates the result.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                toml::from_str::<toml::Table>(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for assignment in overrides {
            apply_override(&mut table, assignment)?;
        }
        Self::from_table(table)
    }

    pub fn validate(&self) -> Result<()> {
        self.embed.validate()?;
        self.train.validate()?;
        let e = &self.experiment;
        if e.budget == 0 || e.repetitions == 0 {
            return Err(Error::Config("experiment budget and repetitions must be positive".into()));
        }
        if e.dataset.is_none() {
            presets::by_name(&e.preset)?;
        }
        if e.labels.is_some() && e.dataset.is_none() {
            return Err(Error::Config("experiment.labels needs experiment.dataset".into()));
        }
        let o = &self.online;
        if o.window == 0 || o.horizon == 0 || o.rerank_stride == 0 {
            return Err(Error::Config("online window, horizon and rerank_stride must be positive".into()));
        }
        if !(o.clip > 0.0) || !(o.learning_rate > 0.0) || !(o.entropy_coef >= 0.0) {
            return Err(Error::Config("online clip and learning rate must be positive".into()));
        }
        let b = &self.embedbench;
        if b.instances == 0 || b.algorithms.is_empty() || b.r.is_empty() || b.p_t.is_empty() {
            return Err(Error::Config("embedbench needs algorithms, r, p_t and instances".into()));
        }
        for name in b.step_caps.keys() {
            Algorithm::from_str(name)?;
        }
        if self.generate.preset != EMBED_GRID {
            presets::by_name(&self.generate.preset)?;
        }
        Ok(())
    }

    /// The resolved configuration as TOML; the basis of the config hash.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

/// Sets `a.b.c = value`, creating tables on the way. The value is parsed as
/// TOML and falls back to a bare string, so `experiment.agent=nac` works.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override key {key:?} is malformed")));
    }
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for p in parents {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override {key:?}: {p} is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
