use std::io::Write;
use std::path::Path;

use netcause_core::crossfit::{NuisanceSource, NuisanceTable};

use super::{csv_error, csv_reader, expect_columns, field, write_file, write_header, IdMap, Provenance};
use crate::{Error, Result};

/// Writes `node_id,fold,q0,q1,g` in internal node order.
pub fn write_nuisances(path: &Path, table: &NuisanceTable, ids: &IdMap, provenance: Option<&Provenance>) -> Result<()> {
    write_file(path, |w| {
        write_header(w, provenance)?;
        writeln!(w, "node_id,fold,q0,q1,g")?;
        for i in 0..table.len() {
            writeln!(w, "{},{},{},{},{}", ids.external(i), table.fold[i], table.q0[i], table.q1[i], table.g[i])?;
        }
        Ok(())
    })
}

/// Reads a nuisance table; rows are tagged as externally produced.
pub fn read_nuisances(path: &Path, ids: &IdMap) -> Result<NuisanceTable> {
    let mut reader = csv_reader(path)?;
    expect_columns(path, &mut reader, &["node_id", "fold", "q0", "q1", "g"])?;
    let n = ids.len();
    let mut rows: Vec<Option<(usize, f64, f64, f64)>> = vec![None; n];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let node = ids.resolve(path, line, field(path, &record, 0, "node_id")?)?;
        if rows[node].is_some() {
            return Err(Error::parse(path, line, "node appears twice"));
        }
        rows[node] = Some((
            field(path, &record, 1, "fold")?,
            field(path, &record, 2, "q0")?,
            field(path, &record, 3, "q1")?,
            field(path, &record, 4, "g")?,
        ));
    }
    let rows = rows
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::format(path, "some nodes have no row"))?;
    Ok(NuisanceTable::new(
        rows.iter().map(|r| r.1).collect(),
        rows.iter().map(|r| r.2).collect(),
        rows.iter().map(|r| r.3).collect(),
        rows.iter().map(|r| r.0).collect(),
        vec![NuisanceSource::External; n],
    )?)
}
