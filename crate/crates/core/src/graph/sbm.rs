use alloc::string::ToString;
use alloc::vec::Vec;

use libm::{floor, log};
use rand::Rng;

use super::{AttributeTable, Column, Graph};
use crate::{Error, Result};

/// Planted-partition block model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmSpec {
    pub block_sizes: Vec<usize>,
    pub within_prob: f64,
    pub between_prob: f64,
}

impl SbmSpec {
    pub fn validate(&self) -> Result<()> {
        if self.block_sizes.is_empty() {
            return Err(Error::Config("block list is empty".into()));
        }
        if self.block_sizes.contains(&0) {
            return Err(Error::Config("block sizes must be positive".into()));
        }
        let ok = 0.0 <= self.between_prob
            && self.between_prob <= self.within_prob
            && self.within_prob <= 1.0;
        if !ok {
            return Err(Error::Config(
                "need 0 <= between_prob <= within_prob <= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn generate(&self, rng_seed: u64) -> Result<(Graph, AttributeTable)> {
        generate_sbm_graph(&self.block_sizes, self.within_prob, self.between_prob, rng_seed)
    }
}

/// Geometric skip length: number of failures before the next success.
fn skip<R: Rng + ?Sized>(rng: &mut R, log_q: f64) -> u64 {
    let u: f64 = rng.random();
    // 1 - u lies in (0, 1]
    let s = floor(log(1.0 - u) / log_q);
    if s >= u64::MAX as f64 {
        u64::MAX
    } else {
        s as u64
    }
}

/// Visits the indices `0..total` selected independently with probability `p`.
fn bernoulli_indices<R: Rng + ?Sized>(rng: &mut R, total: u64, p: f64, mut f: impl FnMut(u64)) {
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(f);
        return;
    }
    let log_q = log(1.0 - p);
    let mut idx = skip(rng, log_q);
    while idx < total {
        f(idx);
        idx = idx.saturating_add(1).saturating_add(skip(rng, log_q));
    }
}

/// Samples a stochastic block model graph.
///
/// Nodes are numbered block by block. Each within-block pair is an edge with
/// probability `within_prob` and each between-block pair with `between_prob`,
/// sampled by geometric skipping so sparse graphs cost O(n + edges). The
/// returned table carries a categorical `block` column.
pub fn generate_sbm_graph(
    block_sizes: &[usize],
    within_prob: f64,
    between_prob: f64,
    rng_seed: u64,
) -> Result<(Graph, AttributeTable)> {
    let spec = SbmSpec {
        block_sizes: block_sizes.to_vec(),
        within_prob,
        between_prob,
    };
    spec.validate()?;
    let mut rng = crate::seed::rng(rng_seed);
    let mut starts = Vec::with_capacity(block_sizes.len());
    let mut n = 0usize;
    for &s in block_sizes {
        starts.push(n);
        n += s;
    }

    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (a, (&sa, &oa)) in block_sizes.iter().zip(&starts).enumerate() {
        // within block: pairs (i, j) with j < i, enumerated row by row
        let total = (sa as u64) * (sa as u64 - 1) / 2;
        let mut row = 1u64;
        let mut row_start = 0u64;
        bernoulli_indices(&mut rng, total, within_prob, |idx| {
            while idx >= row_start + row {
                row_start += row;
                row += 1;
            }
            let j = idx - row_start;
            edges.push((oa + row as usize, oa + j as usize));
        });
        for (&sb, &ob) in block_sizes.iter().zip(&starts).skip(a + 1) {
            let total = (sa as u64) * (sb as u64);
            bernoulli_indices(&mut rng, total, between_prob, |idx| {
                let i = (idx / sb as u64) as usize;
                let j = (idx % sb as u64) as usize;
                edges.push((oa + i, ob + j));
            });
        }
    }

    let (graph, _) = Graph::from_edges(n, edges)?;
    let mut attrs = AttributeTable::new(n);
    let codes = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| core::iter::repeat_n(Some(b as u32), s))
        .collect();
    let levels = (0..block_sizes.len()).map(|b| b.to_string()).collect();
    attrs.insert("block", Column::Categorical { levels, codes })?;
    Ok((graph, attrs))
}
