//! The CLI subcommands as library functions: each runs its stages and writes
//! its files under `output_dir`.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::StageContext;
use crate::io::{self, Dataset, EdgeFormat, Manifest, ReportFile, SummaryRow, SweepRow};
use crate::pipeline::{self, Network};
use crate::{Error, Result};

/// What a command produced: files written, lines for stdout, lines for stderr.
#[derive(Debug, Default, Clone)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub messages: Vec<String>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn new(net: &Network) -> Self {
        Outcome { warnings: net.warnings.clone(), ..Outcome::default() }
    }

    fn wrote(&mut self, path: PathBuf) -> &Path {
        self.files.push(path);
        self.files.last().unwrap()
    }
}

fn out(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

pub const DATASET_FILE: &str = "dataset.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CHECKPOINT_FILE: &str = "embedding.ckpt";
pub const NUISANCE_FILE: &str = "nuisances.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const DIAGNOSTIC_FILE: &str = "diagnostic.json";

/// File name of an estimator's JSON report.
pub fn report_file(estimator: &str) -> String {
    format!("report_{}.json", estimator.to_ascii_lowercase())
}

fn load(cfg: &ExperimentConfig) -> Result<Network> {
    pipeline::load_network(cfg).stage("load graph")
}

/// Writes the simulated dataset and its manifest; a generated graph is also
/// written out so later runs can read it as an ordinary edge list.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let net = load(cfg)?;
    let mut outcome = Outcome::new(&net);
    let sim = pipeline::simulate(cfg, &net).stage("simulate")?;
    let prov = cfg.provenance();
    let data = Dataset { treatment: sim.treatment.clone(), outcome: sim.outcome.clone(), true_g: Some(sim.true_propensity.clone()) };
    io::write_dataset(outcome.wrote(out(cfg, DATASET_FILE)), &data, &net.ids, Some(&prov))?;
    let manifest = Manifest { config_hash: prov.config_hash.clone(), seed: cfg.seed, true_ate: sim.true_ate, n: sim.len(), config: cfg.to_json() };
    io::write_manifest(outcome.wrote(out(cfg, MANIFEST_FILE)), &manifest)?;
    if net.generated {
        io::write_edge_list(outcome.wrote(out(cfg, "graph.tsv")), &net.graph, &net.ids, EdgeFormat::Tsv, Some(&prov))?;
        if let Some(attrs) = &net.attributes {
            io::write_attributes(outcome.wrote(out(cfg, "attributes.csv")), attrs, &net.ids, Some(&prov))?;
        }
    }
    outcome.messages.push(format!("true_ate = {}", sim.true_ate));
    Ok(outcome)
}

/// Label-free embedding; the frozen model of the two-stage baseline.
pub fn embed(cfg: &ExperimentConfig) -> Result<Outcome> {
    let net = load(cfg)?;
    let mut outcome = Outcome::new(&net);
    let model = pipeline::pretrain(cfg, &net).stage("pretrain")?;
    io::write_checkpoint(outcome.wrote(out(cfg, CHECKPOINT_FILE)), &model, Some(&cfg.provenance()))?;
    outcome.messages.push(format!("trained {} x {} embedding", model.node_count(), model.dim()));
    Ok(outcome)
}

/// Writes the out-of-fold nuisance table.
pub fn crossfit(cfg: &ExperimentConfig) -> Result<Outcome> {
    let net = load(cfg)?;
    let mut outcome = Outcome::new(&net);
    let observed = pipeline::observe(cfg, &net)?;
    let units = observed.units()?;
    let folds = pipeline::fold_assignment(cfg, &units)?;
    let table = if cfg.oracle {
        let truth = observed.truth.as_ref().ok_or_else(|| Error::Config("oracle nuisances need true propensities".into()))?;
        netcause_core::crossfit::oracle_nuisances(truth, &folds)?
    } else {
        let start = pipeline::pretrain(cfg, &net).stage("pretrain")?;
        pipeline::crossfit_joint(cfg, &net, &units, &folds, &start).stage("crossfit")?
    };
    io::write_nuisances(outcome.wrote(out(cfg, NUISANCE_FILE)), &table, &net.ids, Some(&cfg.provenance()))?;
    outcome.messages.push(format!("{} rows over {} folds", table.len(), folds.k()));
    Ok(outcome)
}

/// Cross-fits, estimates, and writes one report per estimator plus the summary.
///
/// A checkpoint at `diagnose.checkpoint` is used as the pre-trained model.
pub fn estimate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let net = load(cfg)?;
    let mut outcome = Outcome::new(&net);
    let observed = pipeline::observe(cfg, &net)?;
    let frozen = cfg.diagnose.checkpoint.as_deref().map(io::read_checkpoint).transpose()?;
    let run = pipeline::estimate(cfg, &net, &observed, frozen)?;
    let prov = cfg.provenance();
    io::write_nuisances(outcome.wrote(out(cfg, NUISANCE_FILE)), &run.table, &net.ids, Some(&prov))?;
    let beta = observed.truth.as_ref().map(|t| t.beta);
    let mut rows = Vec::new();
    for report in &run.reports {
        let name = report.estimator.name();
        io::write_report(outcome.wrote(out(cfg, &report_file(name))), &ReportFile::new(report, &prov))?;
        rows.push(SummaryRow::new(report, beta));
        outcome.messages.push(format!(
            "{name:<11} psi = {:.4}  ci = [{:.4}, {:.4}]  fold std = {:.4}",
            report.psi_hat, report.ci_low, report.ci_high, report.fold_std
        ));
        if report.is_degenerate() {
            outcome.warnings.push(format!("{name}: zero influence-function variance, the interval is a point"));
        }
    }
    if let Some(c) = run.reports.first().filter(|r| r.clipped_count > 0) {
        outcome.warnings.push(format!("{} propensities clipped to [{}, {}]", c.clipped_count, c.clip_epsilon, 1.0 - c.clip_epsilon));
    }
    io::write_summary(outcome.wrote(out(cfg, SUMMARY_FILE)), &rows, &prov)?;
    Ok(outcome)
}

/// Exogeneity sweep over `sweep.grid` from the base table at `sweep.base_nuisances`.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let base_path = cfg
        .sweep
        .base_nuisances
        .as_deref()
        .ok_or_else(|| Error::Config("the sweep needs a base nuisance table (sweep.base_nuisances)".into()))?;
    let net = load(cfg)?;
    let mut outcome = Outcome::new(&net);
    let base = io::read_nuisances(base_path, &net.ids)?;
    let points = pipeline::sweep(cfg, &net, &base)?;
    let rows: Vec<SweepRow> = points
        .iter()
        .flat_map(|pt| {
            pt.reports.iter().map(move |r| SweepRow {
                p: pt.p,
                estimator: r.estimator.name().to_owned(),
                psi_hat: r.psi_hat,
                ci_lo: r.ci_low,
                ci_hi: r.ci_high,
            })
        })
        .collect();
    io::write_sweep(outcome.wrote(out(cfg, SWEEP_FILE)), &rows, &cfg.provenance())?;
    outcome.messages.push(format!("{} rows over {} exogeneity levels", rows.len(), points.len()));
    Ok(outcome)
}

#[derive(Debug, Serialize)]
struct Diagnostic {
    statistic: f64,
    pair_count: usize,
    node_count: usize,
    dim: usize,
    isolated_nodes: usize,
    config_hash: String,
    seed: u64,
}

/// Embedding dependence statistic of a checkpoint (for inspection only).
pub fn diagnose(cfg: &ExperimentConfig) -> Result<Outcome> {
    let net = load(cfg)?;
    let mut outcome = Outcome::new(&net);
    let path = cfg.diagnose.checkpoint.clone().unwrap_or_else(|| out(cfg, CHECKPOINT_FILE));
    let model = io::read_checkpoint(&path)?;
    if model.node_count() != net.graph.node_count() {
        return Err(Error::format(&path, format!("checkpoint covers {} nodes, graph has {}", model.node_count(), net.graph.node_count())));
    }
    let statistic = pipeline::diagnose(cfg, &model).stage("diagnose")?;
    let prov = cfg.provenance();
    let report = Diagnostic {
        statistic,
        pair_count: cfg.diagnose.pair_count,
        node_count: model.node_count(),
        dim: model.dim(),
        isolated_nodes: net.graph.isolated_count(),
        config_hash: prov.config_hash,
        seed: prov.seed,
    };
    let json_path = out(cfg, DIAGNOSTIC_FILE);
    io::write_file(&json_path, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        std::io::Write::write_all(w, b"\n")
    })?;
    outcome.files.push(json_path);
    outcome.messages.push(format!("embedding dependence statistic = {statistic:.6}"));
    Ok(outcome)
}
