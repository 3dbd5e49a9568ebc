use alloc::vec::Vec;

use libm::{fabs, sqrt};
use rand::Rng;

use crate::embed::EmbeddingModel;
use crate::seed;
use crate::{Error, Result};

/// Clamp half-width in coordinate standard deviations.
const CLAMP_SDS: f64 = 3.0;

/// Empirical cross-node dependence of trained embeddings.
///
/// Each coordinate is centered at its mean over nodes and clamped to three
/// standard deviations, giving bounded mean-zero test functions `f_d`. For
/// `pair_count` random pairs of distinct nodes the statistic is
/// `mean_d |mean_pairs f_d(lambda_i) f_d(lambda_j)|`. Independent embeddings
/// give `O(1 / sqrt(pair_count))`; perfectly dependent pairs give the
/// coordinate variance. Reported for inspection only.
pub fn embedding_dependence_diagnostic(model: &EmbeddingModel, pair_count: usize, rng_seed: u64) -> Result<f64> {
    let n = model.node_count();
    if n < 2 {
        return Err(Error::Data("dependence diagnostic needs at least two nodes".into()));
    }
    if pair_count == 0 {
        return Err(Error::Config("pair_count must be positive".into()));
    }
    let dim = model.dim();
    let mut mu = alloc::vec![0.0; dim];
    for v in 0..n {
        for (m, x) in mu.iter_mut().zip(model.embedding(v)) {
            *m += x;
        }
    }
    mu.iter_mut().for_each(|m| *m /= n as f64);
    let mut bound = alloc::vec![0.0; dim];
    for v in 0..n {
        for (d, x) in model.embedding(v).iter().enumerate() {
            bound[d] += (x - mu[d]) * (x - mu[d]);
        }
    }
    bound.iter_mut().for_each(|b| *b = CLAMP_SDS * sqrt(*b / n as f64));
    let f = |v: usize, d: usize| (model.embedding(v)[d] - mu[d]).clamp(-bound[d], bound[d]);

    let mut rng = seed::rng(rng_seed);
    let pairs: Vec<(usize, usize)> = (0..pair_count)
        .map(|_| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            (a, b)
        })
        .collect();
    let total: f64 = (0..dim)
        .map(|d| fabs(pairs.iter().map(|&(a, b)| f(a, d) * f(b, d)).sum::<f64>() / pair_count as f64))
        .sum();
    Ok(total / dim as f64)
}
