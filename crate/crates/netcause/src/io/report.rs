use std::io::Write;
use std::path::Path;

use netcause_core::estimators::EstimateReport;
use serde::{Deserialize, Serialize};

use super::{write_file, write_header, Provenance};
use crate::Result;

/// JSON form of an [`EstimateReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub estimator: String,
    pub psi_hat: f64,
    pub fold_values: Vec<f64>,
    /// Sample standard deviation (n - 1) of the per-fold estimates.
    pub fold_std: f64,
    /// Influence-function standard deviation.
    pub if_sigma: f64,
    pub ci: [f64; 2],
    pub level: f64,
    pub clip_epsilon: f64,
    pub n: usize,
    pub clipped_count: usize,
    pub config_hash: String,
    pub seed: u64,
}

impl ReportFile {
    pub fn new(report: &EstimateReport, provenance: &Provenance) -> Self {
        ReportFile {
            estimator: report.estimator.name().to_owned(),
            psi_hat: report.psi_hat,
            fold_values: report.per_fold.clone(),
            fold_std: report.fold_std,
            if_sigma: report.if_sigma,
            ci: [report.ci_low, report.ci_high],
            level: report.level,
            clip_epsilon: report.clip_epsilon,
            n: report.n,
            clipped_count: report.clipped_count,
            config_hash: provenance.config_hash.clone(),
            seed: provenance.seed,
        }
    }
}

pub fn write_report(path: &Path, report: &ReportFile) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, report)?;
        writeln!(w)
    })
}

/// One line of the summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub estimator: String,
    /// Confounding strength of the simulation; `None` for observed data.
    pub beta: Option<f64>,
    pub psi_hat: f64,
    pub fold_std: f64,
    pub if_sigma: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl SummaryRow {
    pub fn new(report: &EstimateReport, beta: Option<f64>) -> Self {
        SummaryRow {
            estimator: report.estimator.name().to_owned(),
            beta,
            psi_hat: report.psi_hat,
            fold_std: report.fold_std,
            if_sigma: report.if_sigma,
            ci_lo: report.ci_low,
            ci_hi: report.ci_high,
        }
    }
}

/// Columns: `estimator,beta,psi_hat,fold_std,if_sigma,ci_lo,ci_hi`.
pub fn write_summary(path: &Path, rows: &[SummaryRow], provenance: &Provenance) -> Result<()> {
    write_file(path, |w| {
        write_header(w, Some(provenance))?;
        writeln!(w, "estimator,beta,psi_hat,fold_std,if_sigma,ci_lo,ci_hi")?;
        for r in rows {
            let beta = r.beta.map_or(String::new(), |b| b.to_string());
            writeln!(w, "{},{},{},{},{},{},{}", r.estimator, beta, r.psi_hat, r.fold_std, r.if_sigma, r.ci_lo, r.ci_hi)?;
        }
        Ok(())
    })
}

/// One estimate at one exogeneity level.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub estimator: String,
    pub psi_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Long format: `p,estimator,psi_hat,ci_lo,ci_hi`.
pub fn write_sweep(path: &Path, rows: &[SweepRow], provenance: &Provenance) -> Result<()> {
    write_file(path, |w| {
        write_header(w, Some(provenance))?;
        writeln!(w, "p,estimator,psi_hat,ci_lo,ci_hi")?;
        for r in rows {
            writeln!(w, "{},{},{},{},{}", r.p, r.estimator, r.psi_hat, r.ci_lo, r.ci_hi)?;
        }
        Ok(())
    })
}
