//! Plug-in ATE estimators over an out-of-fold nuisance table.
//!
//! All fold-wise estimators compute one value per fold and average the fold
//! values with equal weight. Standard errors come from the pooled empirical
//! second moment of the unit-level influence values, not from fold spread;
//! `fold_std` (sample standard deviation of fold values) is reported alongside.

mod diagnostic;

pub use diagnostic::embedding_dependence_diagnostic;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use libm::sqrt;

use crate::crossfit::{Clipping, NuisanceTable};
use crate::math::{mean, normal_quantile, sample_std};
use crate::units::UnitTable;
use crate::{Error, Result};

pub const DEFAULT_CLIP_EPSILON: f64 = 0.03;
pub const DEFAULT_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    /// Outcome-model plug-in.
    Q,
    /// Inverse probability of treatment weighting.
    Iptw,
    /// Augmented IPTW.
    Aiptw,
    /// Targeted minimum loss, one least-squares fluctuation step.
    Tmle,
    /// Difference in means.
    Unadjusted,
    /// A-IPTW on frozen unsupervised embeddings.
    TwoStage,
}

impl Estimator {
    pub const ADJUSTED: [Estimator; 4] = [Estimator::Q, Estimator::Iptw, Estimator::Aiptw, Estimator::Tmle];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Q => "Q",
            Estimator::Iptw => "IPTW",
            Estimator::Aiptw => "AIPTW",
            Estimator::Tmle => "TMLE",
            Estimator::Unadjusted => "UNADJUSTED",
            Estimator::TwoStage => "two-stage",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let e = match s.to_ascii_lowercase().as_str() {
            "q" => Estimator::Q,
            "iptw" | "g" => Estimator::Iptw,
            "aiptw" | "a" => Estimator::Aiptw,
            "tmle" => Estimator::Tmle,
            "unadjusted" => Estimator::Unadjusted,
            "two-stage" | "two_stage" | "twostage" => Estimator::TwoStage,
            _ => return Err(Error::Config(alloc::format!("unknown estimator `{s}`"))),
        };
        Ok(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub estimator: Estimator,
    pub psi_hat: f64,
    pub per_fold: Vec<f64>,
    pub fold_std: f64,
    pub if_sigma: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    /// Zero when the table was never clipped.
    pub clip_epsilon: f64,
    pub clipped_count: usize,
    pub n: usize,
}

impl EstimateReport {
    /// Standard error of `psi_hat`: `if_sigma / sqrt(n)`.
    pub fn std_error(&self) -> f64 {
        self.if_sigma / sqrt(self.n as f64)
    }

    /// Zero standard error: the interval collapses to a point.
    pub fn is_degenerate(&self) -> bool {
        self.if_sigma == 0.0
    }

    pub fn covers(&self, psi: f64) -> bool {
        self.ci_low <= psi && psi <= self.ci_high
    }

    pub fn relabel(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }
}

/// Influence-function standard deviation with its normal interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfluenceSummary {
    pub sigma: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    pub degenerate: bool,
}

fn interval(psi: f64, sigma: f64, n: usize, level: f64) -> InfluenceSummary {
    let z = normal_quantile(0.5 + level / 2.0);
    let half = z * sigma / sqrt(n as f64);
    InfluenceSummary {
        sigma,
        ci_low: psi - half,
        ci_high: psi + half,
        level,
        degenerate: sigma == 0.0,
    }
}

/// Replaces each `g` by `min(max(g, eps), 1 - eps)` and records how many moved.
pub fn clip_propensities(table: &NuisanceTable, epsilon: f64) -> Result<NuisanceTable> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::Config("clip epsilon must lie in (0, 0.5)".into()));
    }
    let mut out = table.clone();
    let mut clipped = 0;
    for g in &mut out.g {
        let c = g.clamp(epsilon, 1.0 - epsilon);
        if c != *g {
            clipped += 1;
            *g = c;
        }
    }
    out.clipping = Some(Clipping { epsilon, clipped });
    Ok(out)
}

fn check(table: &NuisanceTable, units: &UnitTable) -> Result<()> {
    if table.is_empty() {
        return Err(Error::Empty("nuisance table"));
    }
    if table.len() != units.len() {
        return Err(Error::Data(alloc::format!(
            "{} nuisance rows for {} units",
            table.len(),
            units.len()
        )));
    }
    Ok(())
}

fn check_propensities(table: &NuisanceTable) -> Result<()> {
    match table.g.iter().enumerate().find(|(_, &g)| !(g > 0.0 && g < 1.0)) {
        Some((node, &value)) => Err(Error::UnclippedPropensity { node, value }),
        None => Ok(()),
    }
}

/// Row indices per fold id present in the table, in fold order.
fn fold_groups(fold: &[usize]) -> Vec<Vec<usize>> {
    let k = fold.iter().max().map_or(0, |&m| m + 1);
    let mut groups = alloc::vec![Vec::new(); k];
    for (i, &f) in fold.iter().enumerate() {
        groups[f].push(i);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

/// Clever covariate `1[t=1]/g - 1[t=0]/(1-g)`.
fn clever(t: bool, g: f64) -> f64 {
    if t {
        1.0 / g
    } else {
        -1.0 / (1.0 - g)
    }
}

/// Plug-in efficient score of every unit.
fn efficient_scores(table: &NuisanceTable, units: &UnitTable, psi: f64) -> Vec<f64> {
    let (t, y) = (units.treatment(), units.outcome());
    (0..table.len())
        .map(|i| clever(t[i], table.g[i]) * (y[i] - table.q(i, t[i])) + table.q1[i] - table.q0[i] - psi)
        .collect()
}

fn rms(values: &[f64]) -> f64 {
    sqrt(values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64)
}

/// `sigma^2 = mean(phi_i^2)` with `phi_i = H_i (y_i - Q(t_i)) + Q(1) - Q(0) - psi`,
/// and the interval `psi +- z sigma / sqrt(n)`.
pub fn influence_variance(
    table: &NuisanceTable,
    units: &UnitTable,
    psi_hat: f64,
    level: f64,
) -> Result<InfluenceSummary> {
    check(table, units)?;
    check_propensities(table)?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config("confidence level must lie in (0, 1)".into()));
    }
    let sigma = rms(&efficient_scores(table, units, psi_hat));
    Ok(interval(psi_hat, sigma, table.len(), level))
}

fn report(
    estimator: Estimator,
    table: &NuisanceTable,
    per_fold: Vec<f64>,
    psi_hat: f64,
    summary: InfluenceSummary,
) -> EstimateReport {
    let clip = table.clipping.unwrap_or(Clipping {
        epsilon: 0.0,
        clipped: 0,
    });
    EstimateReport {
        estimator,
        psi_hat,
        fold_std: sample_std(&per_fold),
        per_fold,
        if_sigma: summary.sigma,
        ci_low: summary.ci_low,
        ci_high: summary.ci_high,
        level: summary.level,
        clip_epsilon: clip.epsilon,
        clipped_count: clip.clipped,
        n: table.len(),
    }
}

fn fold_average(table: &NuisanceTable, mut per_unit: impl FnMut(usize) -> f64) -> (Vec<f64>, f64) {
    let per_fold: Vec<f64> = fold_groups(&table.fold)
        .iter()
        .map(|rows| rows.iter().map(|&i| per_unit(i)).sum::<f64>() / rows.len() as f64)
        .collect();
    let psi = mean(&per_fold);
    (per_fold, psi)
}

/// `mean(Q(1) - Q(0))`, per fold then averaged.
///
/// The interval uses the efficient score when the table's propensities are
/// interior and otherwise the spread of `Q(1) - Q(0)`.
pub fn estimate_q(table: &NuisanceTable, units: &UnitTable) -> Result<EstimateReport> {
    check(table, units)?;
    let (per_fold, psi) = fold_average(table, |i| table.q1[i] - table.q0[i]);
    let summary = match check_propensities(table) {
        Ok(()) => influence_variance(table, units, psi, DEFAULT_LEVEL)?,
        Err(_) => {
            let d: Vec<f64> = (0..table.len()).map(|i| table.q1[i] - table.q0[i] - psi).collect();
            interval(psi, rms(&d), table.len(), DEFAULT_LEVEL)
        }
    };
    Ok(report(Estimator::Q, table, per_fold, psi, summary))
}

/// `mean(H_i y_i)` with `H` the clever covariate.
pub fn estimate_iptw(table: &NuisanceTable, units: &UnitTable) -> Result<EstimateReport> {
    check(table, units)?;
    check_propensities(table)?;
    let (t, y) = (units.treatment(), units.outcome());
    let (per_fold, psi) = fold_average(table, |i| clever(t[i], table.g[i]) * y[i]);
    let phi: Vec<f64> = (0..table.len())
        .map(|i| clever(t[i], table.g[i]) * y[i] - psi)
        .collect();
    let summary = interval(psi, rms(&phi), table.len(), DEFAULT_LEVEL);
    Ok(report(Estimator::Iptw, table, per_fold, psi, summary))
}

/// Per-fold `mean(Q(1) - Q(0) + H (y - Q(t)))`, averaged over folds.
pub fn estimate_aiptw(table: &NuisanceTable, units: &UnitTable) -> Result<EstimateReport> {
    check(table, units)?;
    check_propensities(table)?;
    let (t, y) = (units.treatment(), units.outcome());
    let (per_fold, psi) = fold_average(table, |i| {
        table.q1[i] - table.q0[i] + clever(t[i], table.g[i]) * (y[i] - table.q(i, t[i]))
    });
    let summary = influence_variance(table, units, psi, DEFAULT_LEVEL)?;
    Ok(report(Estimator::Aiptw, table, per_fold, psi, summary))
}

/// Fluctuates `Q` per fold along the clever covariate and returns the updated
/// table together with the fitted fluctuation of each fold.
pub fn tmle_update(table: &NuisanceTable, units: &UnitTable) -> Result<(NuisanceTable, Vec<f64>)> {
    check(table, units)?;
    check_propensities(table)?;
    let (t, y) = (units.treatment(), units.outcome());
    let mut updated = table.clone();
    let mut epsilons = Vec::new();
    for rows in fold_groups(&table.fold) {
        let (mut num, mut den) = (0.0, 0.0);
        for &i in &rows {
            let h = clever(t[i], table.g[i]);
            num += h * (y[i] - table.q(i, t[i]));
            den += h * h;
        }
        if den == 0.0 {
            return Err(Error::Empty("fold in TMLE fluctuation"));
        }
        let eps = num / den;
        for &i in &rows {
            updated.q1[i] = table.q1[i] + eps / table.g[i];
            updated.q0[i] = table.q0[i] - eps / (1.0 - table.g[i]);
        }
        epsilons.push(eps);
    }
    Ok((updated, epsilons))
}

/// Plug-in of the fluctuated outcome model.
pub fn estimate_tmle(table: &NuisanceTable, units: &UnitTable) -> Result<EstimateReport> {
    let (updated, _) = tmle_update(table, units)?;
    let (per_fold, psi) = fold_average(&updated, |i| updated.q1[i] - updated.q0[i]);
    let summary = influence_variance(&updated, units, psi, DEFAULT_LEVEL)?;
    Ok(report(Estimator::Tmle, table, per_fold, psi, summary))
}

fn difference_in_means(rows: impl Iterator<Item = usize> + Clone, units: &UnitTable) -> Option<(f64, f64, f64, usize)> {
    let (t, y) = (units.treatment(), units.outcome());
    let (mut s1, mut n1, mut s0, mut n0) = (0.0, 0usize, 0.0, 0usize);
    for i in rows {
        if t[i] {
            s1 += y[i];
            n1 += 1;
        } else {
            s0 += y[i];
            n0 += 1;
        }
    }
    if n1 == 0 || n0 == 0 {
        return None;
    }
    let (m1, m0) = (s1 / n1 as f64, s0 / n0 as f64);
    Some((m1 - m0, m1, m0, n1))
}

/// `mean(y | t = 1) - mean(y | t = 0)` over all units.
///
/// Fold values use the units' fold ids; folds missing an arm are skipped.
pub fn estimate_unadjusted(units: &UnitTable) -> Result<EstimateReport> {
    if units.is_empty() {
        return Err(Error::Empty("unit table"));
    }
    let n = units.len();
    let (psi, m1, m0, n1) = difference_in_means(0..n, units).ok_or(Error::Empty("treatment arm"))?;
    let pi = n1 as f64 / n as f64;
    let (t, y) = (units.treatment(), units.outcome());
    let phi: Vec<f64> = (0..n)
        .map(|i| if t[i] { (y[i] - m1) / pi } else { -(y[i] - m0) / (1.0 - pi) })
        .collect();
    let per_fold: Vec<f64> = fold_groups(units.fold())
        .iter()
        .filter_map(|rows| difference_in_means(rows.iter().copied(), units).map(|d| d.0))
        .collect();
    let summary = interval(psi, rms(&phi), n, DEFAULT_LEVEL);
    Ok(EstimateReport {
        estimator: Estimator::Unadjusted,
        psi_hat: psi,
        fold_std: sample_std(&per_fold),
        per_fold,
        if_sigma: summary.sigma,
        ci_low: summary.ci_low,
        ci_high: summary.ci_high,
        level: summary.level,
        clip_epsilon: 0.0,
        clipped_count: 0,
        n,
    })
}

/// Dispatches on the estimator. `TwoStage` is A-IPTW over whatever table it is
/// handed, relabelled.
pub fn estimate(estimator: Estimator, table: &NuisanceTable, units: &UnitTable) -> Result<EstimateReport> {
    match estimator {
        Estimator::Q => estimate_q(table, units),
        Estimator::Iptw => estimate_iptw(table, units),
        Estimator::Aiptw => estimate_aiptw(table, units),
        Estimator::Tmle => estimate_tmle(table, units),
        Estimator::Unadjusted => estimate_unadjusted(units),
        Estimator::TwoStage => Ok(estimate_aiptw(table, units)?.relabel(Estimator::TwoStage)),
    }
}

#[cfg(test)]
mod tests;
