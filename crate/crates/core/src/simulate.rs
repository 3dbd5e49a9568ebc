//! Semi-synthetic treatment and outcome simulation.
//!
//! Treatments are Bernoulli in a confounder-determined propensity `g` and
//! outcomes follow `y = t + beta (g - 0.5) + eps` with standard normal noise,
//! so the true average treatment effect is exactly one.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::graph::{discretize_quantiles, AttributeTable, Column};
use crate::math::{logit, open_unit, sigmoid};
use crate::seed::{self, Stage};
use crate::{Error, Result};

/// The effect built into the outcome model.
pub const TRUE_ATE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub confounder_column: String,
    /// Propensity of each confounder level, in level order.
    pub propensity_levels: Vec<f64>,
    pub beta: f64,
    /// Weight of exogenous logit noise mixed into the level propensities.
    pub exogeneity_p: f64,
    pub rng_seed: u64,
    /// Bins used when the confounder column is real-valued.
    pub quantile_bins: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            confounder_column: "block".into(),
            propensity_levels: alloc::vec![0.15, 0.5, 0.85],
            beta: 1.0,
            exogeneity_p: 0.0,
            rng_seed: 0,
            quantile_bins: 3,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(bad) = self
            .propensity_levels
            .iter()
            .find(|&&g| !(g > 0.0 && g < 1.0))
        {
            return Err(Error::Config(alloc::format!(
                "propensity level {bad} is not strictly inside (0, 1)"
            )));
        }
        if !self.beta.is_finite() {
            return Err(Error::Config("beta must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.exogeneity_p) {
            return Err(Error::Config("exogeneity_p must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDataset {
    pub treatment: Vec<bool>,
    pub outcome: Vec<f64>,
    pub true_propensity: Vec<f64>,
    pub beta: f64,
    pub true_ate: f64,
}

impl SimulatedDataset {
    pub fn len(&self) -> usize {
        self.treatment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.treatment.is_empty()
    }

    /// True conditional mean outcome of unit `i` under treatment arm `t`.
    pub fn true_outcome_mean(&self, i: usize, t: bool) -> f64 {
        outcome_mean(t, self.true_propensity[i], self.beta)
    }

    pub fn units(&self) -> Result<crate::units::UnitTable> {
        crate::units::UnitTable::new(self.treatment.clone(), self.outcome.clone())
    }
}

fn outcome_mean(t: bool, g: f64, beta: f64) -> f64 {
    let t = if t { 1.0 } else { 0.0 };
    t + beta * (g - 0.5)
}

/// Draws treatments and outcomes from known per-unit propensities.
pub fn simulate_from_propensity(propensity: &[f64], beta: f64, rng_seed: u64) -> Result<SimulatedDataset> {
    if let Some((index, &value)) = propensity
        .iter()
        .enumerate()
        .find(|(_, &g)| !(g > 0.0 && g < 1.0))
    {
        return Err(Error::Domain { index, value });
    }
    let mut rng = seed::stage_rng(rng_seed, Stage::Simulate, 0);
    let mut treatment = Vec::with_capacity(propensity.len());
    let mut outcome = Vec::with_capacity(propensity.len());
    for &g in propensity {
        let t = rng.random::<f64>() < g;
        let eps: f64 = rng.sample(StandardNormal);
        treatment.push(t);
        outcome.push(outcome_mean(t, g, beta) + eps);
    }
    Ok(SimulatedDataset {
        treatment,
        outcome,
        true_propensity: propensity.to_vec(),
        beta,
        true_ate: TRUE_ATE,
    })
}

/// Level codes of the confounder column, discretizing real columns.
fn confounder_levels(attrs: &AttributeTable, cfg: &SimulationConfig) -> Result<(usize, Vec<u32>)> {
    let column = attrs.column(&cfg.confounder_column)?;
    let discretized;
    let column = match column {
        Column::Real(values) => {
            discretized = discretize_quantiles(values, cfg.quantile_bins)?;
            &discretized
        }
        c => c,
    };
    let Column::Categorical { levels, codes } = column else {
        unreachable!()
    };
    let missing = column.missing_count();
    if missing > 0 {
        return Err(Error::MissingValues {
            column: cfg.confounder_column.clone(),
            count: missing,
        });
    }
    Ok((levels.len(), codes.iter().map(|c| c.unwrap()).collect()))
}

/// Simulates treatment and outcome with the named attribute as confounder.
pub fn simulate_treatment_outcome(attrs: &AttributeTable, cfg: &SimulationConfig) -> Result<SimulatedDataset> {
    cfg.validate()?;
    let (level_count, codes) = confounder_levels(attrs, cfg)?;
    if level_count != cfg.propensity_levels.len() {
        return Err(Error::LevelMismatch {
            column: cfg.confounder_column.clone(),
            expected: cfg.propensity_levels.len(),
            found: level_count,
        });
    }
    let base: Vec<f64> = codes
        .iter()
        .map(|&c| cfg.propensity_levels[c as usize])
        .collect();
    let propensity = mix_exogenous(&base, cfg.exogeneity_p, seed::derive(cfg.rng_seed, Stage::Exogeneity, 0))?;
    simulate_from_propensity(&propensity, cfg.beta, cfg.rng_seed)
}

/// `sigmoid((1 - p) logit(base_i) + p xi_i)` with `xi_i` i.i.d. standard normal.
///
/// `p = 0` returns the input unchanged.
pub fn mix_exogenous(base_propensity: &[f64], p: f64, rng_seed: u64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config("exogeneity weight must lie in [0, 1]".into()));
    }
    if let Some((index, &value)) = base_propensity
        .iter()
        .enumerate()
        .find(|(_, &g)| !(g > 0.0 && g < 1.0))
    {
        return Err(Error::Domain { index, value });
    }
    if p == 0.0 {
        return Ok(base_propensity.to_vec());
    }
    let mut rng = seed::rng(rng_seed);
    Ok(base_propensity
        .iter()
        .map(|&g| {
            let xi: f64 = rng.sample(StandardNormal);
            open_unit(sigmoid((1.0 - p) * logit(g) + p * xi))
        })
        .collect())
}
