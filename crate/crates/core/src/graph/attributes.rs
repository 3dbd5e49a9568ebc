use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::{Error, Result};

/// A per-node attribute column. `None` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    /// Codes index into `levels`.
    Categorical {
        levels: Vec<String>,
        codes: Vec<Option<u32>>,
    },
    Real(Vec<Option<f64>>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Categorical { codes, .. } => codes.len(),
            Column::Real(values) => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn missing_count(&self) -> usize {
        match self {
            Column::Categorical { codes, .. } => codes.iter().filter(|c| c.is_none()).count(),
            Column::Real(values) => values.iter().filter(|v| v.is_none()).count(),
        }
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            Column::Categorical { codes, .. } => codes[row].is_none(),
            Column::Real(values) => values[row].is_none(),
        }
    }
}

/// Named per-node columns, all of length `node_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeTable {
    node_count: usize,
    columns: Vec<(String, Column)>,
}

impl AttributeTable {
    pub fn new(node_count: usize) -> Self {
        AttributeTable {
            node_count,
            columns: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Adds or replaces a column.
    pub fn insert(&mut self, name: &str, column: Column) -> Result<()> {
        if column.len() != self.node_count {
            return Err(Error::ColumnLength {
                column: name.to_string(),
                expected: self.node_count,
                found: column.len(),
            });
        }
        if let Column::Categorical { levels, codes } = &column {
            if let Some(bad) = codes.iter().flatten().find(|&&c| c as usize >= levels.len()) {
                return Err(Error::Data(alloc::format!(
                    "column `{name}` has code {bad} but only {} levels",
                    levels.len()
                )));
            }
        }
        match self.columns.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = column,
            None => self.columns.push((name.to_string(), column)),
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    /// Level codes of a categorical column that has no missing values.
    pub fn categorical_codes(&self, name: &str) -> Result<Vec<u32>> {
        let column = self.column(name)?;
        let Column::Categorical { codes, .. } = column else {
            return Err(Error::Data(alloc::format!("column `{name}` is not categorical")));
        };
        codes
            .iter()
            .map(|c| {
                c.ok_or_else(|| Error::MissingValues {
                    column: name.to_string(),
                    count: column.missing_count(),
                })
            })
            .collect()
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &Column)> {
        self.columns.iter().map(|(n, c)| (n.as_str(), c))
    }
}

/// Discretizes a real column into `bins` quantile bins, labelled `q0..`.
///
/// Bin `k` holds values whose rank among non-missing values falls in
/// `[k n / bins, (k + 1) n / bins)`; ties share the bin of their first rank.
pub fn discretize_quantiles(values: &[Option<f64>], bins: usize) -> Result<Column> {
    if bins == 0 {
        return Err(Error::Config("quantile bin count must be positive".into()));
    }
    let mut present: Vec<(f64, usize)> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|x| (x, i)))
        .collect();
    if present.iter().any(|(x, _)| !x.is_finite()) {
        return Err(Error::NonFinite("real attribute column"));
    }
    present.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = present.len();
    let mut codes = alloc::vec![None; values.len()];
    let mut rank = 0;
    while rank < n {
        let value = present[rank].0;
        let bin = ((rank * bins) / n).min(bins - 1) as u32;
        while rank < n && present[rank].0 == value {
            codes[present[rank].1] = Some(bin);
            rank += 1;
        }
    }
    let levels = (0..bins).map(|k| alloc::format!("q{k}")).collect();
    Ok(Column::Categorical { levels, codes })
}
