//! In-memory experiment stages. Each stage is a deterministic function of the
//! configuration; stage seeds come from [`netcause_core::seed::derive`].

use netcause_core::crossfit::{self, FoldAssignment, NuisanceTable};
use netcause_core::embed::{self, EmbeddingModel, LinearHead, TrainConfig};
use netcause_core::estimators::{self, estimate_unadjusted, EstimateReport, Estimator};
use netcause_core::graph::{AttributeTable, Graph};
use netcause_core::seed::{derive, Stage};
use netcause_core::simulate::{self, SimulatedDataset, TRUE_ATE};
use netcause_core::units::UnitTable;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::StageContext;
use crate::io::{self, Dataset, EdgeFormat, IdMap};
use crate::{Error, Result};

/// The proxy network with its node ids and attributes.
#[derive(Debug, Clone)]
pub struct Network {
    pub graph: Graph,
    pub ids: IdMap,
    pub attributes: Option<AttributeTable>,
    /// Dropped duplicates, self-loops and isolated nodes, for the user.
    pub warnings: Vec<String>,
    /// Whether the graph was generated rather than read.
    pub generated: bool,
}

pub fn load_network(cfg: &ExperimentConfig) -> Result<Network> {
    let mut net = match &cfg.graph.edges {
        Some(path) => {
            let ids = cfg.graph.id_map.as_deref().map(io::read_id_map).transpose()?;
            let format = cfg.graph.format.unwrap_or_else(|| EdgeFormat::from_path(path));
            let loaded = io::load_edge_list(path, format, ids.as_ref())?;
            let attributes = cfg
                .graph
                .attributes
                .as_deref()
                .map(|p| io::read_attributes(p, &loaded.ids))
                .transpose()?;
            Network {
                warnings: loaded.warnings(),
                graph: loaded.graph,
                ids: loaded.ids,
                attributes,
                generated: false,
            }
        }
        None => {
            let (graph, attrs) = cfg.sbm_spec().generate(derive(cfg.seed, Stage::Graph, 0))?;
            let ids = IdMap::identity(graph.node_count());
            Network { graph, ids, attributes: Some(attrs), warnings: Vec::new(), generated: true }
        }
    };
    let isolated = net.graph.isolated_count();
    if isolated > 0 {
        net.warnings.push(format!("{isolated} isolated node(s) are kept; their embeddings see only negative pairs"));
    }
    Ok(net)
}

/// Observed data plus, when simulated, the ground truth behind it.
#[derive(Debug, Clone)]
pub struct Observed {
    pub dataset: Dataset,
    pub truth: Option<SimulatedDataset>,
}

impl Observed {
    pub fn units(&self) -> Result<UnitTable> {
        self.dataset.units()
    }

    fn from_simulation(sim: SimulatedDataset) -> Self {
        let dataset = Dataset {
            treatment: sim.treatment.clone(),
            outcome: sim.outcome.clone(),
            true_g: Some(sim.true_propensity.clone()),
        };
        Observed { dataset, truth: Some(sim) }
    }
}

pub fn simulate(cfg: &ExperimentConfig, net: &Network) -> Result<SimulatedDataset> {
    let attrs = net
        .attributes
        .as_ref()
        .ok_or_else(|| Error::Config("simulation needs node attributes (graph.attributes)".into()))?;
    Ok(simulate::simulate_treatment_outcome(attrs, &cfg.simulation_config())?)
}

/// Reads `data.dataset` when configured, otherwise simulates.
///
/// A dataset file with a `true_g` column is taken to follow the configured
/// outcome model, which is what oracle nuisances need.
pub fn observe(cfg: &ExperimentConfig, net: &Network) -> Result<Observed> {
    match &cfg.data.dataset {
        Some(path) => {
            let dataset = io::read_dataset(path, &net.ids)?;
            let truth = dataset.true_g.as_ref().map(|g| SimulatedDataset {
                treatment: dataset.treatment.clone(),
                outcome: dataset.outcome.clone(),
                true_propensity: g.clone(),
                beta: cfg.simulation.beta,
                true_ate: TRUE_ATE,
            });
            Ok(Observed { dataset, truth })
        }
        None => Ok(Observed::from_simulation(simulate(cfg, net).stage("simulate")?)),
    }
}

pub fn fold_assignment(cfg: &ExperimentConfig, units: &UnitTable) -> Result<FoldAssignment> {
    let seed = derive(cfg.seed, Stage::Folds, 0);
    Ok(if cfg.stratify_folds {
        crossfit::make_stratified_folds(units.treatment(), cfg.folds, seed)?
    } else {
        crossfit::make_folds(units.len(), cfg.folds, seed)?
    })
}

/// Label-free pre-training shared by every fold and by the two-stage baseline.
pub fn pretrain(cfg: &ExperimentConfig, net: &Network) -> Result<EmbeddingModel> {
    Ok(embed::pretrain(&net.graph, &cfg.train_config()?)?)
}

/// Runs `fit` for each fold, on `threads` workers when more than one.
///
/// Every fold owns its random stream, so the result does not depend on the
/// thread count.
fn per_fold<F>(threads: usize, k: usize, fit: F) -> Result<Vec<EmbeddingModel>>
where
    F: Fn(usize) -> netcause_core::Result<EmbeddingModel> + Sync,
{
    if threads <= 1 {
        return Ok((0..k).map(&fit).collect::<netcause_core::Result<_>>()?);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..k).into_par_iter().map(&fit).collect::<netcause_core::Result<_>>())?)
}

fn check_units(net: &Network, units: &UnitTable) -> Result<()> {
    if units.len() != net.graph.node_count() {
        return Err(Error::Core(netcause_core::Error::Data(format!(
            "{} units for a graph of {} nodes",
            units.len(),
            net.graph.node_count()
        ))));
    }
    Ok(())
}

/// Out-of-fold nuisances from per-fold joint training started at `start`.
pub fn crossfit_joint(
    cfg: &ExperimentConfig,
    net: &Network,
    units: &UnitTable,
    folds: &FoldAssignment,
    start: &EmbeddingModel,
) -> Result<NuisanceTable> {
    check_units(net, units)?;
    let train = cfg.train_config()?;
    let units = crossfit::units_in_folds(units, folds)?;
    let models = per_fold(cfg.threads, folds.k(), |k| crossfit::train_fold(start, &net.graph, &units, &train, k))?;
    Ok(NuisanceTable::assemble(folds, &models)?)
}

/// Two-stage baseline: `frozen` embeddings, per-fold heads only.
pub fn crossfit_two_stage(
    cfg: &ExperimentConfig,
    net: &Network,
    units: &UnitTable,
    folds: &FoldAssignment,
    frozen: &EmbeddingModel,
) -> Result<NuisanceTable> {
    check_units(net, units)?;
    let train: TrainConfig = crossfit::two_stage_config(&cfg.train_config()?, frozen);
    let p = frozen.dim();
    let start = EmbeddingModel::from_parts(
        p,
        frozen.embeddings().to_vec(),
        [LinearHead::zeros(p), LinearHead::zeros(p)],
        LinearHead::zeros(p),
    )?;
    let units = crossfit::units_in_folds(units, folds)?;
    let models = per_fold(cfg.threads, folds.k(), |k| crossfit::train_fold(&start, &net.graph, &units, &train, k))?;
    Ok(NuisanceTable::assemble(folds, &models)?)
}

/// Everything one estimation run produces.
#[derive(Debug, Clone)]
pub struct EstimateRun {
    /// Out-of-fold nuisances before clipping.
    pub table: NuisanceTable,
    pub reports: Vec<EstimateReport>,
    /// The label-free model, when one was trained or supplied.
    pub pretrained: Option<EmbeddingModel>,
}

impl EstimateRun {
    pub fn report(&self, estimator: Estimator) -> Option<&EstimateReport> {
        self.reports.iter().find(|r| r.estimator == estimator)
    }
}

/// Cross-fits, then evaluates every configured estimator and baseline.
///
/// `pretrained` replaces label-free pre-training (and is the frozen model of
/// the two-stage baseline) when given.
pub fn estimate(cfg: &ExperimentConfig, net: &Network, observed: &Observed, pretrained: Option<EmbeddingModel>) -> Result<EstimateRun> {
    let units = observed.units()?;
    let folds = fold_assignment(cfg, &units)?;
    let baselines = cfg.baselines()?;
    let needs_model = !cfg.oracle || baselines.two_stage;
    let pretrained = match pretrained {
        Some(m) => Some(m),
        None if needs_model => Some(pretrain(cfg, net).stage("pretrain")?),
        None => None,
    };
    let table = if cfg.oracle {
        let truth = observed
            .truth
            .as_ref()
            .ok_or_else(|| Error::Config("oracle nuisances need simulated data with true propensities".into()))?;
        crossfit::oracle_nuisances(truth, &folds)?
    } else {
        crossfit_joint(cfg, net, &units, &folds, pretrained.as_ref().unwrap()).stage("crossfit")?
    };
    let units = crossfit::units_in_folds(&units, &folds)?;
    let mut reports = evaluate(cfg, &table, &units).stage("estimate")?;
    reports.extend(baseline_reports(cfg, net, &units, &folds, pretrained.as_ref())?);
    Ok(EstimateRun { table, reports, pretrained })
}

/// The configured baselines; `frozen` is required for the two-stage one.
fn baseline_reports(
    cfg: &ExperimentConfig,
    net: &Network,
    units: &UnitTable,
    folds: &FoldAssignment,
    frozen: Option<&EmbeddingModel>,
) -> Result<Vec<EstimateReport>> {
    let baselines = cfg.baselines()?;
    let mut reports = Vec::new();
    if baselines.unadjusted {
        reports.push(estimate_unadjusted(units).stage("estimate")?);
    }
    if baselines.two_stage {
        let frozen = frozen.expect("two-stage baseline needs a pre-trained model");
        let two = crossfit_two_stage(cfg, net, units, folds, frozen).stage("two-stage")?;
        let clipped = estimators::clip_propensities(&two, cfg.clip_epsilon)?;
        let report = estimators::estimate(Estimator::Aiptw, &clipped, units).stage("two-stage")?;
        reports.push(report.relabel(Estimator::TwoStage));
    }
    Ok(reports)
}

/// Clips propensities and evaluates the configured adjusted estimators.
pub fn evaluate(cfg: &ExperimentConfig, table: &NuisanceTable, units: &UnitTable) -> Result<Vec<EstimateReport>> {
    let clipped = estimators::clip_propensities(table, cfg.clip_epsilon)?;
    cfg.estimators()?
        .into_iter()
        .map(|e| Ok(estimators::estimate(e, &clipped, units)?))
        .collect()
}

/// Estimates at one exogeneity level.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub p: f64,
    pub reports: Vec<EstimateReport>,
}

/// Re-simulates with `logit g = (1 - p) logit g_base + p xi` for every `p` in
/// the grid and re-estimates.
///
/// The exogenous draws `xi` and the simulation noise are shared across grid
/// points, and so is label-free pre-training (it never sees outcomes).
pub fn sweep(cfg: &ExperimentConfig, net: &Network, base: &NuisanceTable) -> Result<Vec<SweepPoint>> {
    if base.len() != net.graph.node_count() {
        return Err(Error::Core(netcause_core::Error::Data(format!(
            "base nuisance table has {} rows for {} nodes",
            base.len(),
            net.graph.node_count()
        ))));
    }
    let base_g = estimators::clip_propensities(base, cfg.clip_epsilon)?.g;
    let needs_model = !cfg.oracle || cfg.baselines()?.two_stage;
    let start = if needs_model { Some(pretrain(cfg, net).stage("pretrain")?) } else { None };
    let mut points = Vec::with_capacity(cfg.sweep.grid.len());
    for &p in &cfg.sweep.grid {
        let g = simulate::mix_exogenous(&base_g, p, derive(cfg.seed, Stage::Exogeneity, 0))?;
        let sim = simulate::simulate_from_propensity(&g, cfg.simulation.beta, derive(cfg.seed, Stage::Simulate, 1))?;
        let units = UnitTable::new(sim.treatment.clone(), sim.outcome.clone())?;
        let folds = fold_assignment(cfg, &units)?;
        let table = if cfg.oracle {
            crossfit::oracle_nuisances(&sim, &folds)?
        } else {
            crossfit_joint(cfg, net, &units, &folds, start.as_ref().unwrap()).stage("crossfit")?
        };
        let units = crossfit::units_in_folds(&units, &folds)?;
        let mut reports = evaluate(cfg, &table, &units).stage("estimate")?;
        reports.extend(baseline_reports(cfg, net, &units, &folds, start.as_ref())?);
        points.push(SweepPoint { p, reports });
    }
    Ok(points)
}

/// Embedding dependence statistic of a trained model.
pub fn diagnose(cfg: &ExperimentConfig, model: &EmbeddingModel) -> Result<f64> {
    Ok(estimators::embedding_dependence_diagnostic(model, cfg.diagnose.pair_count, derive(cfg.seed, Stage::Diagnose, 0))?)
}
