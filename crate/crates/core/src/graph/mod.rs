//! Undirected simple graphs and the randomized subgraph samplers used for
//! relational ERM training.

mod attributes;
mod sample;
mod sbm;

pub use attributes::{discretize_quantiles, AttributeTable, Column};
pub use sample::{random_walk_sample, NegativeSampling, SamplerConfig, SubgraphSample, WalkSampler};
pub use sbm::{generate_sbm_graph, SbmSpec};

use alloc::vec::Vec;

use crate::{Error, Result};

/// Immutable undirected simple graph in compressed adjacency form.
///
/// Neighbor lists are sorted, symmetric, free of self-loops and duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

/// What [`Graph::from_edges`] discarded while building.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub duplicates: usize,
    pub self_loops: usize,
}

impl Graph {
    /// Builds a graph over `node_count` nodes from an edge iterator.
    ///
    /// Edges are symmetrized; repeated edges (in either orientation) and
    /// self-loops are dropped and counted.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<(Graph, BuildStats)>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut stats = BuildStats::default();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for (a, b) in edges {
            for node in [a, b] {
                if node >= node_count {
                    return Err(Error::NodeOutOfRange {
                        node,
                        count: node_count,
                    });
                }
            }
            if a == b {
                stats.self_loops += 1;
                continue;
            }
            pairs.push((a.min(b), a.max(b)));
        }
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        stats.duplicates = before - pairs.len();

        let mut degree = alloc::vec![0usize; node_count];
        for &(a, b) in &pairs {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..node_count].to_vec();
        let mut neighbors = alloc::vec![0usize; 2 * pairs.len()];
        for &(a, b) in &pairs {
            neighbors[cursor[a]] = b;
            cursor[a] += 1;
            neighbors[cursor[b]] = a;
            cursor[b] += 1;
        }
        for v in 0..node_count {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Ok((Graph { offsets, neighbors }, stats))
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count()).map(|v| self.degree(v)).collect()
    }

    /// Sorted neighbor list of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (small, other) = if self.degree(a) <= self.degree(b) {
            (a, b)
        } else {
            (b, a)
        };
        self.neighbors(small).binary_search(&other).is_ok()
    }

    /// Each undirected edge once, as `(low, high)`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |a| {
            self.neighbors(a)
                .iter()
                .copied()
                .filter(move |&b| b > a)
                .map(move |b| (a, b))
        })
    }

    pub fn isolated_count(&self) -> usize {
        (0..self.node_count()).filter(|&v| self.degree(v) == 0).count()
    }
}
