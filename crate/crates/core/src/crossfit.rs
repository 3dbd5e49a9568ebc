//! Fold assignment and out-of-fold nuisance estimation.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::embed::{self, EmbeddingModel, TrainConfig};
use crate::graph::Graph;
use crate::seed;
use crate::simulate::SimulatedDataset;
use crate::units::UnitTable;
use crate::{Error, Result};

/// A balanced partition of units into `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    fold_of: Vec<usize>,
    k: usize,
    rng_seed: u64,
}

impl FoldAssignment {
    pub fn from_vec(fold_of: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 || fold_of.iter().any(|&f| f >= k) {
            return Err(Error::Data("fold ids must lie in 0..k".into()));
        }
        Ok(FoldAssignment {
            fold_of,
            k,
            rng_seed: 0,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self) -> &[usize] {
        &self.fold_of
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn len(&self) -> usize {
        self.fold_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_of.is_empty()
    }

    pub fn members(&self, fold: usize) -> impl Iterator<Item = usize> + '_ {
        self.fold_of
            .iter()
            .enumerate()
            .filter(move |(_, &f)| f == fold)
            .map(|(i, _)| i)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("fold count must be positive".into()));
    }
    if k > n {
        return Err(Error::Config(alloc::format!("{k} folds for only {n} units")));
    }
    Ok(())
}

/// Uniformly random balanced partition of `0..n`.
pub fn make_folds(n: usize, k: usize, rng_seed: u64) -> Result<FoldAssignment> {
    check_k(n, k)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(rng_seed));
    let mut fold_of = alloc::vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % k;
    }
    Ok(FoldAssignment { fold_of, k, rng_seed })
}

/// Balanced partition that also balances each treatment arm across folds.
pub fn make_stratified_folds(treatment: &[bool], k: usize, rng_seed: u64) -> Result<FoldAssignment> {
    check_k(treatment.len(), k)?;
    let mut rng = seed::rng(rng_seed);
    let mut treated: Vec<usize> = (0..treatment.len()).filter(|&i| treatment[i]).collect();
    let mut control: Vec<usize> = (0..treatment.len()).filter(|&i| !treatment[i]).collect();
    treated.shuffle(&mut rng);
    control.shuffle(&mut rng);
    let mut fold_of = alloc::vec![0; treatment.len()];
    for (pos, &i) in treated.iter().chain(&control).enumerate() {
        fold_of[i] = pos % k;
    }
    Ok(FoldAssignment { fold_of, k, rng_seed })
}

/// Which estimate produced a nuisance row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuisanceSource {
    /// A model trained with this fold's labels hidden.
    Model { masked_fold: usize },
    /// Simulation ground truth.
    Oracle,
    /// Read from a file without provenance.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clipping {
    pub epsilon: f64,
    pub clipped: usize,
}

/// Per-unit nuisance estimates `(Q(0), Q(1), g)` with their fold.
#[derive(Debug, Clone, PartialEq)]
pub struct NuisanceTable {
    pub q0: Vec<f64>,
    pub q1: Vec<f64>,
    pub g: Vec<f64>,
    pub fold: Vec<usize>,
    pub source: Vec<NuisanceSource>,
    /// Set once propensities have been clipped.
    pub clipping: Option<Clipping>,
}

impl NuisanceTable {
    pub fn new(q0: Vec<f64>, q1: Vec<f64>, g: Vec<f64>, fold: Vec<usize>, source: Vec<NuisanceSource>) -> Result<Self> {
        let n = q0.len();
        if [q1.len(), g.len(), fold.len(), source.len()].iter().any(|&l| l != n) {
            return Err(Error::Data("nuisance columns differ in length".into()));
        }
        if q0.iter().chain(&q1).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("outcome nuisance"));
        }
        if let Some((index, &value)) = g.iter().enumerate().find(|(_, &p)| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Domain { index, value });
        }
        Ok(NuisanceTable {
            q0,
            q1,
            g,
            fold,
            source,
            clipping: None,
        })
    }

    pub fn len(&self) -> usize {
        self.q0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q0.is_empty()
    }

    pub fn q(&self, i: usize, treated: bool) -> f64 {
        if treated {
            self.q1[i]
        } else {
            self.q0[i]
        }
    }

    /// Number of folds, taken as one past the largest fold id.
    pub fn fold_count(&self) -> usize {
        self.fold.iter().max().map_or(0, |&m| m + 1)
    }

    /// True when every model-produced row came from the model that hid its fold.
    pub fn is_out_of_fold(&self) -> bool {
        self.source.iter().zip(&self.fold).all(|(s, &f)| match *s {
            NuisanceSource::Model { masked_fold } => masked_fold == f,
            _ => true,
        })
    }

    /// Fills each fold's rows from the model trained with that fold masked.
    pub fn assemble(folds: &FoldAssignment, models: &[EmbeddingModel]) -> Result<Self> {
        if models.len() != folds.k() {
            return Err(Error::Data(alloc::format!("{} models for {} folds", models.len(), folds.k())));
        }
        let n = folds.len();
        let (mut q0, mut q1, mut g) = (alloc::vec![0.0; n], alloc::vec![0.0; n], alloc::vec![0.0; n]);
        let mut source = alloc::vec![NuisanceSource::External; n];
        for (k, model) in models.iter().enumerate() {
            let ids: Vec<usize> = folds.members(k).collect();
            let preds = model.predict_nuisances(&ids).map_err(|e| e.in_fold(k))?;
            for (&i, p) in ids.iter().zip(preds) {
                q0[i] = p.q0;
                q1[i] = p.q1;
                g[i] = p.g;
                source[i] = NuisanceSource::Model { masked_fold: k };
            }
        }
        NuisanceTable::new(q0, q1, g, folds.fold_of().to_vec(), source)
    }
}

/// The training configuration for fold `k`.
pub fn fold_config(cfg: &TrainConfig, k: usize) -> TrainConfig {
    TrainConfig {
        masked_fold: Some(k),
        ..cfg.clone()
    }
}

fn check_crossfit(g: &Graph, units: &UnitTable, folds: &FoldAssignment) -> Result<()> {
    if folds.k() < 2 {
        return Err(Error::Config("cross-fitting needs at least two folds".into()));
    }
    if folds.len() != units.len() || units.len() != g.node_count() {
        return Err(Error::Data("graph, units and folds disagree on unit count".into()));
    }
    Ok(())
}

/// Units relabelled with the fold assignment.
pub fn units_in_folds(units: &UnitTable, folds: &FoldAssignment) -> Result<UnitTable> {
    units.clone().with_folds(folds.fold_of())
}

/// Trains the fold-`k` model starting from a shared (label-free) pre-trained model.
pub fn train_fold(
    start: &EmbeddingModel,
    g: &Graph,
    units: &UnitTable,
    cfg: &TrainConfig,
    k: usize,
) -> Result<EmbeddingModel> {
    embed::train_joint(start.clone(), g, units, &fold_config(cfg, k)).map_err(|e| e.in_fold(k))
}

/// Runs `fit` for every fold and assembles the out-of-fold table.
pub fn crossfit_with<F>(folds: &FoldAssignment, mut fit: F) -> Result<NuisanceTable>
where
    F: FnMut(usize) -> Result<EmbeddingModel>,
{
    let models = (0..folds.k()).map(&mut fit).collect::<Result<Vec<_>>>()?;
    NuisanceTable::assemble(folds, &models)
}

/// Joint per-fold training: model `k` never sees fold `k`'s labels.
///
/// Pre-training uses no labels and is run once and shared by all folds; the
/// result is identical to calling [`embed::train`] per fold.
pub fn crossfit_nuisances(
    g: &Graph,
    units: &UnitTable,
    folds: &FoldAssignment,
    cfg: &TrainConfig,
) -> Result<NuisanceTable> {
    let start = embed::pretrain(g, cfg)?;
    crossfit_pretrained(g, units, folds, cfg, &start)
}

/// Joint per-fold training from an already pre-trained model, so several
/// label sets on one graph can share a single pre-training run.
pub fn crossfit_pretrained(
    g: &Graph,
    units: &UnitTable,
    folds: &FoldAssignment,
    cfg: &TrainConfig,
    start: &EmbeddingModel,
) -> Result<NuisanceTable> {
    check_crossfit(g, units, folds)?;
    let units = units_in_folds(units, folds)?;
    crossfit_with(folds, |k| train_fold(start, g, &units, cfg, k))
}

/// Two-stage baseline: frozen embeddings, per-fold heads.
pub fn crossfit_two_stage(
    g: &Graph,
    units: &UnitTable,
    folds: &FoldAssignment,
    cfg: &TrainConfig,
    frozen: &EmbeddingModel,
) -> Result<NuisanceTable> {
    check_crossfit(g, units, folds)?;
    let units = units_in_folds(units, folds)?;
    let cfg = two_stage_config(cfg, frozen);
    let start = EmbeddingModel::from_parts(
        frozen.dim(),
        frozen.embeddings().to_vec(),
        [
            embed::LinearHead::zeros(frozen.dim()),
            embed::LinearHead::zeros(frozen.dim()),
        ],
        embed::LinearHead::zeros(frozen.dim()),
    )?;
    crossfit_with(folds, |k| train_fold(&start, g, &units, &cfg, k))
}

pub fn two_stage_config(cfg: &TrainConfig, frozen: &EmbeddingModel) -> TrainConfig {
    TrainConfig {
        dim: frozen.dim(),
        freeze_embeddings: true,
        pretrain_steps: 0,
        ..cfg.clone()
    }
}

/// Ground-truth nuisances of a simulation, tagged with the given folds.
pub fn oracle_nuisances(data: &SimulatedDataset, folds: &FoldAssignment) -> Result<NuisanceTable> {
    if folds.len() != data.len() {
        return Err(Error::Data("fold assignment length mismatch".into()));
    }
    let n = data.len();
    let q0 = (0..n).map(|i| data.true_outcome_mean(i, false)).collect();
    let q1 = (0..n).map(|i| data.true_outcome_mean(i, true)).collect();
    NuisanceTable::new(
        q0,
        q1,
        data.true_propensity.clone(),
        folds.fold_of().to_vec(),
        alloc::vec![NuisanceSource::Oracle; n],
    )
}
