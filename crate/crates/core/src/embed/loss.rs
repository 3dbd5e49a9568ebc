use alloc::vec::Vec;

use super::{EmbeddingModel, LinearHead, LossWeights, TrainConfig};
use crate::graph::SubgraphSample;
use crate::math::{bce_with_logit, dot, sigmoid};
use crate::units::UnitTable;
use crate::{Error, Result};

/// Gradient of the sampled loss.
///
/// Only embeddings of the sample's touched nodes can be non-zero, so they are
/// stored densely in `touched` order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    dim: usize,
    touched: Vec<usize>,
    embeddings: Vec<f64>,
    pub outcome_heads: [LinearHead; 2],
    pub treatment_head: LinearHead,
    /// Units whose labels contributed.
    pub label_terms: usize,
}

impl Gradient {
    fn zeros(dim: usize) -> Self {
        Gradient {
            dim,
            touched: Vec::new(),
            embeddings: Vec::new(),
            outcome_heads: [LinearHead::zeros(dim), LinearHead::zeros(dim)],
            treatment_head: LinearHead::zeros(dim),
            label_terms: 0,
        }
    }

    fn reset(&mut self, touched: &[usize]) {
        self.touched.clear();
        self.touched.extend_from_slice(touched);
        self.embeddings.clear();
        self.embeddings.resize(touched.len() * self.dim, 0.0);
        for head in self.outcome_heads.iter_mut().chain([&mut self.treatment_head]) {
            head.weights.iter_mut().for_each(|w| *w = 0.0);
            head.bias = 0.0;
        }
        self.label_terms = 0;
    }

    pub fn touched(&self) -> &[usize] {
        &self.touched
    }

    /// Gradient of `node`'s embedding; `None` means identically zero.
    pub fn embedding(&self, node: usize) -> Option<&[f64]> {
        let slot = self.touched.binary_search(&node).ok()?;
        Some(&self.embeddings[slot * self.dim..(slot + 1) * self.dim])
    }

    pub(crate) fn embedding_slot(&self, slot: usize) -> &[f64] {
        &self.embeddings[slot * self.dim..(slot + 1) * self.dim]
    }

    pub fn is_zero(&self) -> bool {
        let heads = self.outcome_heads.iter().chain([&self.treatment_head]);
        self.embeddings.iter().all(|&x| x == 0.0)
            && heads
                .flat_map(|h| h.weights.iter().chain([&h.bias]))
                .all(|&x| x == 0.0)
    }
}

fn check_inputs(model: &EmbeddingModel, sample: &SubgraphSample, units: &UnitTable) -> Result<()> {
    let count = model.node_count();
    if units.len() != count {
        return Err(Error::Data(alloc::format!(
            "{} units for a model over {} nodes",
            units.len(),
            count
        )));
    }
    if let Some(&node) = sample.touched_nodes.iter().find(|&&v| v >= count) {
        return Err(Error::NodeOutOfRange { node, count });
    }
    if !model.heads_finite()
        || sample
            .touched_nodes
            .iter()
            .any(|&v| model.embedding(v).iter().any(|x| !x.is_finite()))
    {
        return Err(Error::NonFinite("model parameters"));
    }
    Ok(())
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Shared evaluation; accumulates into `grad` when given.
pub(crate) fn evaluate(
    model: &EmbeddingModel,
    sample: &SubgraphSample,
    units: &UnitTable,
    weights: LossWeights,
    masked_fold: Option<usize>,
    mut grad: Option<&mut Gradient>,
) -> Result<f64> {
    check_inputs(model, sample, units)?;
    if let Some(g) = grad.as_deref_mut() {
        g.reset(&sample.touched_nodes);
    }
    let dim = model.dim();
    let mut total = 0.0;

    let label_weighted = weights.outcome != 0.0 || weights.treatment != 0.0;
    if label_weighted {
        for (slot, &i) in sample.touched_nodes.iter().enumerate() {
            if !units.label_visible(i, masked_fold) {
                continue;
            }
            let lambda = model.embedding(i);
            let t = units.treatment()[i];
            let head = &model.outcome_heads[t as usize];
            let resid = units.outcome()[i] - head.apply(lambda);
            total += weights.outcome * resid * resid;
            let logit = model.treatment_head.apply(lambda);
            total += weights.treatment * bce_with_logit(t, logit);

            if let Some(g) = grad.as_deref_mut() {
                g.label_terms += 1;
                let dq = -2.0 * weights.outcome * resid;
                let ds = weights.treatment * (sigmoid(logit) - if t { 1.0 } else { 0.0 });
                let gh = &mut g.outcome_heads[t as usize];
                axpy(dq, lambda, &mut gh.weights);
                gh.bias += dq;
                axpy(ds, lambda, &mut g.treatment_head.weights);
                g.treatment_head.bias += ds;
                let ge = &mut g.embeddings[slot * dim..(slot + 1) * dim];
                axpy(dq, &head.weights, ge);
                axpy(ds, &model.treatment_head.weights, ge);
            }
        }
    }

    if weights.edge != 0.0 {
        for (a, b, label) in sample.pairs() {
            let (la, lb) = (model.embedding(a), model.embedding(b));
            let s = dot(la, lb);
            total += weights.edge * bce_with_logit(label, s);
            if let Some(g) = grad.as_deref_mut() {
                let ds = weights.edge * (sigmoid(s) - if label { 1.0 } else { 0.0 });
                // touched_nodes holds every endpoint, so both lookups succeed
                let sa = sample.slot(a).unwrap();
                let sb = sample.slot(b).unwrap();
                axpy(ds, lb, &mut g.embeddings[sa * dim..(sa + 1) * dim]);
                axpy(ds, la, &mut g.embeddings[sb * dim..(sb + 1) * dim]);
            }
        }
    }

    if !total.is_finite() {
        return Err(Error::NonFinite("loss"));
    }
    Ok(total)
}

/// Sampled relational-ERM loss:
/// `w_o sum (y - Q(t, lambda))^2 + w_t sum CE(t, g(lambda)) + w_e sum CE(edge, sigmoid(lambda_i . lambda_j))`,
/// label sums running over touched nodes whose labels are visible.
pub fn loss(model: &EmbeddingModel, sample: &SubgraphSample, units: &UnitTable, cfg: &TrainConfig) -> Result<f64> {
    evaluate(model, sample, units, cfg.weights, cfg.masked_fold, None)
}

pub fn loss_gradient(
    model: &EmbeddingModel,
    sample: &SubgraphSample,
    units: &UnitTable,
    cfg: &TrainConfig,
) -> Result<Gradient> {
    Ok(loss_and_gradient(model, sample, units, cfg)?.1)
}

pub fn loss_and_gradient(
    model: &EmbeddingModel,
    sample: &SubgraphSample,
    units: &UnitTable,
    cfg: &TrainConfig,
) -> Result<(f64, Gradient)> {
    let mut grad = Gradient::zeros(model.dim());
    let value = evaluate(model, sample, units, cfg.weights, cfg.masked_fold, Some(&mut grad))?;
    Ok((value, grad))
}

/// Reusable gradient buffer for the training loop.
pub(crate) fn gradient_buffer(dim: usize) -> Gradient {
    Gradient::zeros(dim)
}
