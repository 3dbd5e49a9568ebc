//! Per-unit observations: treatment, outcome, fold and label availability.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct UnitTable {
    treatment: Vec<bool>,
    outcome: Vec<f64>,
    fold: Vec<usize>,
    labeled: Vec<bool>,
}

impl UnitTable {
    /// All units labeled and assigned to fold 0.
    pub fn new(treatment: Vec<bool>, outcome: Vec<f64>) -> Result<Self> {
        if treatment.len() != outcome.len() {
            return Err(Error::Data(alloc::format!(
                "{} treatments but {} outcomes",
                treatment.len(),
                outcome.len()
            )));
        }
        if outcome.iter().any(|y| !y.is_finite()) {
            return Err(Error::NonFinite("outcome"));
        }
        let n = treatment.len();
        Ok(UnitTable {
            treatment,
            outcome,
            fold: alloc::vec![0; n],
            labeled: alloc::vec![true; n],
        })
    }

    pub fn with_folds(mut self, fold_of: &[usize]) -> Result<Self> {
        if fold_of.len() != self.len() {
            return Err(Error::Data("fold assignment length mismatch".into()));
        }
        self.fold = fold_of.to_vec();
        Ok(self)
    }

    /// Marks units whose labels may never be used for training.
    pub fn with_label_mask(mut self, labeled: Vec<bool>) -> Result<Self> {
        if labeled.len() != self.len() {
            return Err(Error::Data("label mask length mismatch".into()));
        }
        self.labeled = labeled;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.treatment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.treatment.is_empty()
    }

    pub fn treatment(&self) -> &[bool] {
        &self.treatment
    }

    pub fn outcome(&self) -> &[f64] {
        &self.outcome
    }

    pub fn fold(&self) -> &[usize] {
        &self.fold
    }

    pub fn labeled(&self) -> &[bool] {
        &self.labeled
    }

    /// Whether unit `i`'s labels enter the loss when `masked_fold` is held out.
    pub fn label_visible(&self, i: usize, masked_fold: Option<usize>) -> bool {
        self.labeled[i] && masked_fold != Some(self.fold[i])
    }

    /// Replaces labels of the units in `fold`; used to check masking.
    pub fn relabel_fold(&mut self, fold: usize, mut f: impl FnMut(usize) -> (bool, f64)) {
        for i in 0..self.len() {
            if self.fold[i] == fold {
                let (t, y) = f(i);
                self.treatment[i] = t;
                self.outcome[i] = y;
            }
        }
    }
}
