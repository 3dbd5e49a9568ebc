use std::path::Path;

use netcause_core::graph::{AttributeTable, Column};

use super::{csv_error, csv_reader, write_header, IdMap, Provenance};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Categorical,
    Real,
}

fn split_header(name: &str) -> (&str, Option<Kind>) {
    match name.rsplit_once(':') {
        Some((base, "cat")) => (base, Some(Kind::Categorical)),
        Some((base, "real")) => (base, Some(Kind::Real)),
        _ => (name, None),
    }
}

/// Columns whose cells all parse as numbers, at least one non-integer, are
/// real; everything else (including integer codes) is categorical.
fn infer(cells: &[Option<String>]) -> Kind {
    let present: Vec<&str> = cells.iter().flatten().map(String::as_str).collect();
    let numeric = !present.is_empty() && present.iter().all(|s| s.parse::<f64>().is_ok());
    let integral = present.iter().all(|s| s.parse::<i64>().is_ok());
    if numeric && !integral {
        Kind::Real
    } else {
        Kind::Categorical
    }
}

/// Levels sort numerically when every level is an integer, otherwise lexically.
fn categorical(cells: &[Option<String>]) -> Column {
    let mut levels: Vec<String> = cells.iter().flatten().cloned().collect();
    levels.sort_unstable();
    levels.dedup();
    if levels.iter().all(|l| l.parse::<i64>().is_ok()) {
        levels.sort_by_key(|l| l.parse::<i64>().unwrap());
    }
    let codes = cells
        .iter()
        .map(|c| c.as_ref().map(|v| levels.iter().position(|l| l == v).unwrap() as u32))
        .collect();
    Column::Categorical { levels, codes }
}

fn real(path: &Path, name: &str, cells: &[Option<String>], lines: &[u64]) -> Result<Column> {
    cells
        .iter()
        .zip(lines)
        .map(|(c, &line)| match c {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| Error::parse(path, line, format!("column `{name}`: `{v}` is not a finite number"))),
        })
        .collect::<Result<Vec<_>>>()
        .map(Column::Real)
}

/// Reads a node attribute CSV whose first column is `node_id`.
///
/// Empty cells are missing; nodes without a row are missing in every column.
/// A header suffix `:cat` or `:real` fixes a column's type.
pub fn read_attributes(path: &Path, ids: &IdMap) -> Result<AttributeTable> {
    let mut reader = csv_reader(path)?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.get(0) != Some("node_id") {
        return Err(Error::format(path, "first column must be `node_id`"));
    }
    let n = ids.len();
    let width = header.len() - 1;
    let mut cells: Vec<Vec<Option<String>>> = vec![vec![None; n]; width];
    let mut lines = vec![0u64; n];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let raw = &record[0];
        let external: u64 = raw
            .parse()
            .map_err(|_| Error::parse(path, line, format!("bad node_id `{raw}`")))?;
        let node = ids.resolve(path, line, external)?;
        if lines[node] != 0 {
            return Err(Error::parse(path, line, format!("node {external} already appeared on line {}", lines[node])));
        }
        lines[node] = line;
        for (c, column) in cells.iter_mut().enumerate() {
            column[node] = record.get(c + 1).filter(|v| !v.is_empty()).map(str::to_owned);
        }
    }
    let mut table = AttributeTable::new(n);
    for (c, column) in cells.iter().enumerate() {
        let (name, declared) = split_header(&header[c + 1]);
        let parsed = match declared.unwrap_or_else(|| infer(column)) {
            Kind::Categorical => categorical(column),
            Kind::Real => real(path, name, column, &lines)?,
        };
        table.insert(name, parsed)?;
    }
    Ok(table)
}

/// Writes every column with an explicit type suffix so a re-read is exact.
pub fn write_attributes(path: &Path, table: &AttributeTable, ids: &IdMap, provenance: Option<&Provenance>) -> Result<()> {
    super::write_file(path, |w| {
        write_header(w, provenance)?;
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["node_id".to_owned()];
        for (name, column) in table.columns() {
            let suffix = match column {
                Column::Categorical { .. } => "cat",
                Column::Real(_) => "real",
            };
            header.push(format!("{name}:{suffix}"));
        }
        out.write_record(&header)?;
        for node in 0..table.node_count() {
            let mut row = vec![ids.external(node).to_string()];
            for (_, column) in table.columns() {
                row.push(match column {
                    Column::Categorical { levels, codes } => codes[node].map_or(String::new(), |c| levels[c as usize].clone()),
                    Column::Real(values) => values[node].map_or(String::new(), |v| v.to_string()),
                });
            }
            out.write_record(&row)?;
        }
        out.flush()
    })
}
