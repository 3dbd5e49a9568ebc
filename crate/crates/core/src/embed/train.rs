use super::loss::{evaluate, gradient_buffer, Gradient};
use super::EmbeddingModel;
use crate::graph::{Graph, SamplerConfig, WalkSampler};
use crate::seed::{self, Stage};
use crate::units::UnitTable;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub edge: f64,
    pub outcome: f64,
    pub treatment: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            edge: 1.0,
            outcome: 1.0,
            treatment: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Embedding dimension.
    pub dim: usize,
    /// Step size for embedding rows.
    pub learning_rate: f64,
    /// Step size for the heads. Each head moves along the mean gradient of
    /// its own unweighted label term over the sample's labeled units, so the
    /// loss weights only control how strongly labels pull on embeddings.
    pub head_learning_rate: f64,
    /// Joint steps after pre-training.
    pub step_count: usize,
    /// Edge-only steps run first.
    pub pretrain_steps: usize,
    pub sampler: SamplerConfig,
    pub weights: LossWeights,
    pub rng_seed: u64,
    /// Fold whose labels are hidden from every label term.
    pub masked_fold: Option<usize>,
    /// Keep embeddings fixed during the joint phase (two-stage fitting).
    pub freeze_embeddings: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 128,
            learning_rate: 0.025,
            head_learning_rate: 0.025,
            step_count: 20_000,
            pretrain_steps: 20_000,
            sampler: SamplerConfig::default(),
            weights: LossWeights::default(),
            rng_seed: 0,
            masked_fold: None,
            freeze_embeddings: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        let rates = [self.learning_rate, self.head_learning_rate];
        if rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        let w = self.weights;
        if [w.edge, w.outcome, w.treatment]
            .iter()
            .any(|x| !(x.is_finite() && *x >= 0.0))
        {
            return Err(Error::Config("loss weights must be nonnegative".into()));
        }
        self.sampler.validate()
    }
}

/// Random initial model for `node_count` nodes; depends only on the seed and dimension.
pub fn initialize(node_count: usize, cfg: &TrainConfig) -> EmbeddingModel {
    EmbeddingModel::random(node_count, cfg.dim, &mut seed::stage_rng(cfg.rng_seed, Stage::Init, 0))
}

fn apply(model: &mut EmbeddingModel, grad: &Gradient, cfg: &TrainConfig, weights: LossWeights, update_embeddings: bool) {
    if update_embeddings {
        for (slot, &node) in grad.touched().iter().enumerate() {
            let g = grad.embedding_slot(slot);
            for (x, dx) in model.embedding_mut(node).iter_mut().zip(g) {
                *x -= cfg.learning_rate * dx;
            }
        }
    }
    if grad.label_terms == 0 {
        return;
    }
    // Each head sees exactly one weighted term, so dividing by that weight
    // recovers the per-unit mean gradient of the unweighted term.
    let base = cfg.head_learning_rate / grad.label_terms as f64;
    let heads = model.outcome_heads.iter_mut().chain([&mut model.treatment_head]);
    let grads = grad.outcome_heads.iter().chain([&grad.treatment_head]);
    let term_weights = [weights.outcome, weights.outcome, weights.treatment];
    for ((head, gh), w) in heads.zip(grads).zip(term_weights) {
        if w == 0.0 {
            continue;
        }
        let step = base / w;
        for (p, dp) in head.weights.iter_mut().zip(&gh.weights) {
            *p -= step * dp;
        }
        head.bias -= step * gh.bias;
    }
}

/// Edge-only SGD from the seeded initialization.
///
/// Uses no labels, so every fold of a cross-fit can share the result.
pub fn pretrain(g: &Graph, cfg: &TrainConfig) -> Result<EmbeddingModel> {
    cfg.validate()?;
    let mut model = initialize(g.node_count(), cfg);
    if cfg.pretrain_steps == 0 {
        return Ok(model);
    }
    let sampler = WalkSampler::new(g, cfg.sampler)?;
    let units = UnitTable::new(alloc::vec![false; g.node_count()], alloc::vec![0.0; g.node_count()])?;
    let weights = super::LossWeights {
        outcome: 0.0,
        treatment: 0.0,
        ..cfg.weights
    };
    let mut rng = seed::stage_rng(cfg.rng_seed, Stage::Pretrain, 0);
    let mut grad = gradient_buffer(cfg.dim);
    for step in 0..cfg.pretrain_steps {
        let sample = sampler.sample(&mut rng)?;
        match evaluate(&model, &sample, &units, weights, None, Some(&mut grad)) {
            Ok(_) => {}
            Err(Error::NonFinite(_)) => return Err(Error::Diverged { phase: "pretrain", step }),
            Err(e) => return Err(e),
        }
        apply(&mut model, &grad, cfg, weights, true);
    }
    if !model.is_finite() {
        return Err(Error::Diverged {
            phase: "pretrain",
            step: cfg.pretrain_steps,
        });
    }
    Ok(model)
}

/// Joint SGD over the full loss, continuing from `model`.
///
/// The sample stream depends on the seed and masked fold only, never on labels.
pub fn train_joint(mut model: EmbeddingModel, g: &Graph, units: &UnitTable, cfg: &TrainConfig) -> Result<EmbeddingModel> {
    cfg.validate()?;
    if units.len() != g.node_count() || model.node_count() != g.node_count() {
        return Err(Error::Data("graph, units and model disagree on node count".into()));
    }
    if model.dim() != cfg.dim {
        return Err(Error::Config("model dimension differs from configuration".into()));
    }
    if cfg.step_count == 0 {
        return Ok(model);
    }
    let sampler = WalkSampler::new(g, cfg.sampler)?;
    let stream = cfg.masked_fold.map_or(0, |k| k as u64 + 1);
    let mut rng = seed::stage_rng(cfg.rng_seed, Stage::Train, stream);
    let mut weights = cfg.weights;
    if cfg.freeze_embeddings {
        weights.edge = 0.0;
    }
    let mut grad = gradient_buffer(cfg.dim);
    for step in 0..cfg.step_count {
        let sample = sampler.sample(&mut rng)?;
        match evaluate(&model, &sample, units, weights, cfg.masked_fold, Some(&mut grad)) {
            Ok(_) => {}
            Err(Error::NonFinite(_)) => return Err(Error::Diverged { phase: "joint", step }),
            Err(e) => return Err(e),
        }
        apply(&mut model, &grad, cfg, weights, !cfg.freeze_embeddings);
    }
    if !model.is_finite() {
        return Err(Error::Diverged {
            phase: "joint",
            step: cfg.step_count,
        });
    }
    Ok(model)
}

/// Pre-training followed by joint training.
pub fn train(g: &Graph, units: &UnitTable, cfg: &TrainConfig) -> Result<EmbeddingModel> {
    if units.len() != g.node_count() {
        return Err(Error::Data("unit count differs from node count".into()));
    }
    let model = pretrain(g, cfg)?;
    train_joint(model, g, units, cfg)
}
