//! Declarative experiment configuration.
//!
//! A TOML file deserializes into [`ExperimentConfig`]; every key is optional
//! and falls back to the defaults below. `--set section.key=value` overrides
//! are applied to the parsed TOML before deserialization, so they accept the
//! same value syntax as the file (`train.dim=16`, `estimators=["AIPTW"]`).

use std::path::{Path, PathBuf};

use netcause_core::embed::{LossWeights, TrainConfig};
use netcause_core::estimators::{Estimator, DEFAULT_CLIP_EPSILON, DEFAULT_LEVEL};
use netcause_core::graph::{NegativeSampling, SamplerConfig, SbmSpec};
use netcause_core::simulate::SimulationConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::io::{EdgeFormat, Provenance};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Global seed; every stage derives its own seed from it.
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Number of cross-fitting folds.
    pub folds: usize,
    /// Balance treated and control units across folds.
    pub stratify_folds: bool,
    pub clip_epsilon: f64,
    pub level: f64,
    /// Adjusted estimators to report: any of Q, IPTW, AIPTW, TMLE.
    pub estimators: Vec<String>,
    /// Baselines to report: `unadjusted`, `two_stage`.
    pub baselines: Vec<String>,
    /// Use the simulation's true nuisances instead of training.
    pub oracle: bool,
    /// Worker threads for fold training; 1 runs sequentially.
    pub threads: usize,
    pub graph: GraphConfig,
    pub data: DataConfig,
    pub simulation: SimulationSection,
    pub train: TrainSection,
    pub sweep: SweepSection,
    pub diagnose: DiagnoseSection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    /// Edge list; when absent the stochastic block model below is generated.
    pub edges: Option<PathBuf>,
    /// Edge separator; inferred from the extension when absent.
    pub format: Option<EdgeFormat>,
    /// `external_id,internal_id` sidecar fixing the node set.
    pub id_map: Option<PathBuf>,
    pub attributes: Option<PathBuf>,
    pub sbm: SbmSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SbmSection {
    pub block_sizes: Vec<usize>,
    pub within_prob: f64,
    pub between_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Observed `node_id,t,y[,true_g]` table; when absent outcomes are simulated.
    pub dataset: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub confounder_column: String,
    pub propensity_levels: Vec<f64>,
    pub beta: f64,
    pub exogeneity_p: f64,
    pub quantile_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub dim: usize,
    pub learning_rate: f64,
    pub head_learning_rate: f64,
    pub step_count: usize,
    pub pretrain_steps: usize,
    pub walk_edges: usize,
    pub negatives_per_positive: usize,
    /// `uniform` or `degree`.
    pub negative_sampling: String,
    pub restart_prob: f64,
    pub w_edge: f64,
    pub w_outcome: f64,
    pub w_treatment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Nuisance table whose propensities form the network-borne confounder.
    pub base_nuisances: Option<PathBuf>,
    pub grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseSection {
    /// Model to inspect; defaults to the `embed` output.
    pub checkpoint: Option<PathBuf>,
    pub pair_count: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            output_dir: PathBuf::from("out"),
            folds: 10,
            stratify_folds: false,
            clip_epsilon: DEFAULT_CLIP_EPSILON,
            level: DEFAULT_LEVEL,
            estimators: Estimator::ADJUSTED.iter().map(|e| e.name().to_owned()).collect(),
            baselines: vec!["unadjusted".into()],
            oracle: false,
            threads: 1,
            graph: GraphConfig::default(),
            data: DataConfig::default(),
            simulation: SimulationSection::default(),
            train: TrainSection::default(),
            sweep: SweepSection::default(),
            diagnose: DiagnoseSection::default(),
        }
    }
}

impl Default for SbmSection {
    fn default() -> Self {
        SbmSection { block_sizes: vec![1000, 1000, 1000], within_prob: 0.02, between_prob: 0.002 }
    }
}

impl Default for SimulationSection {
    fn default() -> Self {
        let d = SimulationConfig::default();
        SimulationSection {
            confounder_column: d.confounder_column,
            propensity_levels: d.propensity_levels,
            beta: d.beta,
            exogeneity_p: d.exogeneity_p,
            quantile_bins: d.quantile_bins,
        }
    }
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        TrainSection {
            dim: d.dim,
            learning_rate: d.learning_rate,
            head_learning_rate: d.head_learning_rate,
            step_count: d.step_count,
            pretrain_steps: d.pretrain_steps,
            walk_edges: d.sampler.walk_edges,
            negatives_per_positive: d.sampler.negatives_per_positive,
            negative_sampling: "uniform".into(),
            restart_prob: d.sampler.restart_prob,
            w_edge: d.weights.edge,
            w_outcome: d.weights.outcome,
            w_treatment: d.weights.treatment,
        }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { base_nuisances: None, grid: vec![0.0, 0.25, 0.5, 0.75, 1.0] }
    }
}

impl Default for DiagnoseSection {
    fn default() -> Self {
        DiagnoseSection { checkpoint: None, pair_count: 10_000 }
    }
}

/// Which baselines to run next to the adjusted estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Baselines {
    pub unadjusted: bool,
    pub two_stage: bool,
}

/// Parses an override value as a TOML literal, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_owned()),
    }
}

fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, sections) = parts.split_last().expect("split yields one part");
    let mut table = root;
    for section in sections {
        table = table
            .entry(section.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("`{section}` in `{key}` is not a table")))?;
    }
    table.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

impl ExperimentConfig {
    /// Parses TOML text and applies `key=value` overrides.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut root: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut root, o)?;
        }
        let cfg: ExperimentConfig = root.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file, or the defaults when `path` is `None`.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        if self.estimators.is_empty() {
            return Err(Error::Config("the estimator list is empty".into()));
        }
        let adjusted = self.estimators()?;
        if let Some(e) = adjusted.iter().find(|e| !Estimator::ADJUSTED.contains(e)) {
            return Err(Error::Config(format!("`{e}` is a baseline; list it under `baselines`")));
        }
        self.baselines()?;
        if self.folds < 2 {
            return Err(Error::Config("at least two folds are needed".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be positive".into()));
        }
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 0.5) {
            return Err(Error::Config("clip_epsilon must lie in (0, 0.5)".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config("level must lie in (0, 1)".into()));
        }
        if self.sweep.grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Config("sweep grid values must lie in [0, 1]".into()));
        }
        if self.diagnose.pair_count == 0 {
            return Err(Error::Config("diagnose.pair_count must be positive".into()));
        }
        self.train_config()?.validate()?;
        self.simulation_config().validate()?;
        if self.graph.edges.is_none() {
            self.sbm_spec().validate()?;
        }
        for path in self.input_paths() {
            if !path.exists() {
                return Err(Error::Config(format!("input file {} does not exist", path.display())));
            }
        }
        Ok(())
    }

    fn input_paths(&self) -> impl Iterator<Item = &PathBuf> {
        [&self.graph.edges, &self.graph.id_map, &self.graph.attributes, &self.data.dataset]
            .into_iter()
            .flatten()
    }

    pub fn estimators(&self) -> Result<Vec<Estimator>> {
        self.estimators.iter().map(|s| s.parse().map_err(Error::Core)).collect()
    }

    pub fn baselines(&self) -> Result<Baselines> {
        let mut b = Baselines::default();
        for name in &self.baselines {
            match name.to_ascii_lowercase().replace('-', "_").as_str() {
                "unadjusted" => b.unadjusted = true,
                "two_stage" => b.two_stage = true,
                _ => return Err(Error::Config(format!("unknown baseline `{name}`"))),
            }
        }
        Ok(b)
    }

    pub fn sbm_spec(&self) -> SbmSpec {
        SbmSpec {
            block_sizes: self.graph.sbm.block_sizes.clone(),
            within_prob: self.graph.sbm.within_prob,
            between_prob: self.graph.sbm.between_prob,
        }
    }

    pub fn simulation_config(&self) -> SimulationConfig {
        let s = &self.simulation;
        SimulationConfig {
            confounder_column: s.confounder_column.clone(),
            propensity_levels: s.propensity_levels.clone(),
            beta: s.beta,
            exogeneity_p: s.exogeneity_p,
            rng_seed: self.seed,
            quantile_bins: s.quantile_bins,
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let t = &self.train;
        let negative_sampling = match t.negative_sampling.to_ascii_lowercase().as_str() {
            "uniform" => NegativeSampling::Uniform,
            "degree" | "degree_biased" => NegativeSampling::DegreeBiased,
            other => return Err(Error::Config(format!("unknown negative_sampling `{other}`"))),
        };
        Ok(TrainConfig {
            dim: t.dim,
            learning_rate: t.learning_rate,
            head_learning_rate: t.head_learning_rate,
            step_count: t.step_count,
            pretrain_steps: t.pretrain_steps,
            sampler: SamplerConfig {
                walk_edges: t.walk_edges,
                negatives_per_positive: t.negatives_per_positive,
                negative_sampling,
                restart_prob: t.restart_prob,
            },
            weights: LossWeights { edge: t.w_edge, outcome: t.w_outcome, treatment: t.w_treatment },
            rng_seed: self.seed,
            masked_fold: None,
            freeze_embeddings: false,
        })
    }

    /// Hex SHA-256 (first 16 digits) of the fully resolved configuration.
    /// Short digest of every setting that can change results. Thread count
    /// and output location are excluded: they never alter the numbers.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.threads = 1;
        canonical.output_dir = PathBuf::new();
        let json = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn provenance(&self) -> Provenance {
        Provenance { config_hash: self.hash(), seed: self.seed }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
