use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::math::{dot, sigmoid};
use crate::{Error, Result};

/// Affine map `lambda -> lambda . weights + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearHead {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearHead {
    pub fn zeros(dim: usize) -> Self {
        LinearHead {
            weights: alloc::vec![0.0; dim],
            bias: 0.0,
        }
    }

    pub fn apply(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

/// Out-of-sample predictions for one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nuisance {
    pub q0: f64,
    pub q1: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    dim: usize,
    embeddings: Vec<f64>,
    /// Arms `t = 0` and `t = 1`.
    pub outcome_heads: [LinearHead; 2],
    pub treatment_head: LinearHead,
}

impl EmbeddingModel {
    /// Model with all-zero parameters.
    pub fn zeros(node_count: usize, dim: usize) -> Self {
        EmbeddingModel {
            dim,
            embeddings: alloc::vec![0.0; node_count * dim],
            outcome_heads: [LinearHead::zeros(dim), LinearHead::zeros(dim)],
            treatment_head: LinearHead::zeros(dim),
        }
    }

    /// Embeddings i.i.d. normal with standard deviation `1 / sqrt(dim)`, heads zero.
    pub fn random<R: Rng + ?Sized>(node_count: usize, dim: usize, rng: &mut R) -> Self {
        let scale = 1.0 / libm::sqrt(dim as f64);
        let mut model = Self::zeros(node_count, dim);
        for x in &mut model.embeddings {
            *x = scale * rng.sample::<f64, _>(StandardNormal);
        }
        model
    }

    /// Builds a model from a row-major embedding table and head parameters.
    pub fn from_parts(
        dim: usize,
        embeddings: Vec<f64>,
        outcome_heads: [LinearHead; 2],
        treatment_head: LinearHead,
    ) -> Result<Self> {
        if dim == 0 || !embeddings.len().is_multiple_of(dim) {
            return Err(Error::Data("embedding table is not a multiple of the dimension".into()));
        }
        let heads = [&outcome_heads[0], &outcome_heads[1], &treatment_head];
        if heads.iter().any(|h| h.weights.len() != dim) {
            return Err(Error::Data("head width does not match embedding dimension".into()));
        }
        Ok(EmbeddingModel {
            dim,
            embeddings,
            outcome_heads,
            treatment_head,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_count(&self) -> usize {
        self.embeddings.len() / self.dim.max(1)
    }

    pub fn embedding(&self, node: usize) -> &[f64] {
        &self.embeddings[node * self.dim..(node + 1) * self.dim]
    }

    pub fn embedding_mut(&mut self, node: usize) -> &mut [f64] {
        &mut self.embeddings[node * self.dim..(node + 1) * self.dim]
    }

    /// Row-major `node_count x dim` table.
    pub fn embeddings(&self) -> &[f64] {
        &self.embeddings
    }

    pub fn predict_q(&self, node: usize, treated: bool) -> f64 {
        self.outcome_heads[treated as usize].apply(self.embedding(node))
    }

    pub fn predict_g(&self, node: usize) -> f64 {
        sigmoid(self.treatment_head.apply(self.embedding(node)))
    }

    pub fn predict(&self, node: usize) -> Nuisance {
        Nuisance {
            q0: self.predict_q(node, false),
            q1: self.predict_q(node, true),
            g: self.predict_g(node),
        }
    }

    /// Unclipped nuisance predictions for each listed node.
    pub fn predict_nuisances(&self, node_ids: &[usize]) -> Result<Vec<Nuisance>> {
        let count = self.node_count();
        node_ids
            .iter()
            .map(|&node| {
                if node >= count {
                    Err(Error::NodeOutOfRange { node, count })
                } else {
                    Ok(self.predict(node))
                }
            })
            .collect()
    }

    pub fn heads_finite(&self) -> bool {
        self.outcome_heads.iter().all(LinearHead::is_finite) && self.treatment_head.is_finite()
    }

    pub fn is_finite(&self) -> bool {
        self.heads_finite() && self.embeddings.iter().all(|x| x.is_finite())
    }
}
