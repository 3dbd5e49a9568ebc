use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::Graph;
use crate::{Error, Result};

/// How the far endpoint of a negative pair is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativeSampling {
    /// Uniform over non-neighbors of the anchor.
    #[default]
    Uniform,
    /// Proportional to `degree^0.75` (the word2vec unigram heuristic),
    /// restricted to non-neighbors of the anchor.
    DegreeBiased,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub walk_edges: usize,
    pub negatives_per_positive: usize,
    pub negative_sampling: NegativeSampling,
    /// Probability of jumping back to the walk's start before each step.
    pub restart_prob: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            walk_edges: 50,
            negatives_per_positive: 5,
            negative_sampling: NegativeSampling::Uniform,
            restart_prob: 0.0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walk_edges == 0 || self.negatives_per_positive == 0 {
            return Err(Error::Config(
                "walk_edges and negatives_per_positive must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.restart_prob) {
            return Err(Error::Config("restart_prob must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// A random subgraph: labelled node pairs plus the nodes they touch.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubgraphSample {
    /// Consecutive walk edges, label 1.
    pub positive_pairs: Vec<(usize, usize)>,
    /// Non-edges anchored at walk vertices, label 0.
    pub negative_pairs: Vec<(usize, usize)>,
    /// Sorted, deduplicated endpoints of both pair lists.
    pub touched_nodes: Vec<usize>,
}

impl SubgraphSample {
    /// Position of `node` in `touched_nodes`.
    pub fn slot(&self, node: usize) -> Option<usize> {
        self.touched_nodes.binary_search(&node).ok()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, bool)> + '_ {
        self.positive_pairs
            .iter()
            .map(|&(a, b)| (a, b, true))
            .chain(self.negative_pairs.iter().map(|&(a, b)| (a, b, false)))
    }

    fn finish(mut self) -> Self {
        let mut touched: Vec<usize> = self.pairs().flat_map(|(a, b, _)| [a, b]).collect();
        touched.sort_unstable();
        touched.dedup();
        self.touched_nodes = touched;
        self
    }
}

/// Random-walk sampler with negative sampling over a fixed graph.
#[derive(Debug, Clone)]
pub struct WalkSampler<'g> {
    graph: &'g Graph,
    cfg: SamplerConfig,
    starts: Vec<usize>,
    biased: Option<WeightedIndex<f64>>,
}

impl<'g> WalkSampler<'g> {
    pub fn new(graph: &'g Graph, cfg: SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        let starts: Vec<usize> = (0..graph.node_count())
            .filter(|&v| graph.degree(v) > 0)
            .collect();
        if starts.is_empty() {
            return Err(Error::EdgelessGraph);
        }
        let biased = match cfg.negative_sampling {
            NegativeSampling::Uniform => None,
            NegativeSampling::DegreeBiased => {
                let weights = (0..graph.node_count()).map(|v| libm::pow(graph.degree(v) as f64, 0.75));
                Some(WeightedIndex::new(weights).map_err(|_| Error::EdgelessGraph)?)
            }
        };
        Ok(WalkSampler {
            graph,
            cfg,
            starts,
            biased,
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    /// The edges of one walk of `walk_edges` steps, in order.
    pub fn walk<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<(usize, usize)> {
        let k = self.cfg.walk_edges;
        let start = self.starts[rng.random_range(0..self.starts.len())];
        let mut edges = Vec::with_capacity(k);
        let mut current = start;
        for _ in 0..k {
            if self.cfg.restart_prob > 0.0 && rng.random::<f64>() < self.cfg.restart_prob {
                current = start;
            }
            let nbrs = self.graph.neighbors(current);
            let next = nbrs[rng.random_range(0..nbrs.len())];
            edges.push((current, next));
            current = next;
        }
        edges
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SubgraphSample> {
        let k = self.cfg.walk_edges;
        let mut out = SubgraphSample {
            positive_pairs: self.walk(rng),
            negative_pairs: Vec::with_capacity(k * self.cfg.negatives_per_positive),
            touched_nodes: Vec::new(),
        };
        for i in 0..k {
            let (a, b) = out.positive_pairs[i];
            let anchor = if self.saturated(a) { b } else { a };
            if self.saturated(anchor) {
                return Err(Error::NoNonNeighbor { node: a });
            }
            for _ in 0..self.cfg.negatives_per_positive {
                let other = self.draw_non_neighbor(anchor, rng);
                out.negative_pairs.push((anchor, other));
            }
        }
        Ok(out.finish())
    }

    fn saturated(&self, node: usize) -> bool {
        match &self.biased {
            None => self.graph.degree(node) + 1 >= self.graph.node_count(),
            // Only nodes with positive degree carry weight under the biased scheme.
            Some(_) => self
                .starts
                .iter()
                .all(|&v| v == node || self.graph.has_edge(node, v)),
        }
    }

    fn draw_non_neighbor<R: Rng + ?Sized>(&self, anchor: usize, rng: &mut R) -> usize {
        let n = self.graph.node_count();
        loop {
            let candidate = match &self.biased {
                None => rng.random_range(0..n),
                Some(w) => w.sample(rng),
            };
            if candidate != anchor && !self.graph.has_edge(anchor, candidate) {
                return candidate;
            }
        }
    }
}

/// One random-walk sample with uniform negatives, seeded directly.
pub fn random_walk_sample(
    g: &Graph,
    walk_edges: usize,
    negatives_per_positive: usize,
    rng_seed: u64,
) -> Result<SubgraphSample> {
    let cfg = SamplerConfig {
        walk_edges,
        negatives_per_positive,
        ..SamplerConfig::default()
    };
    let sampler = WalkSampler::new(g, cfg)?;
    sampler.sample(&mut crate::seed::rng(rng_seed))
}
