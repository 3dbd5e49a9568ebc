use std::io::Write;
use std::path::Path;

use netcause_core::units::UnitTable;
use serde::{Deserialize, Serialize};

use super::{csv_error, csv_reader, expect_columns, field, write_file, write_header, IdMap, Provenance};
use crate::{Error, Result};

/// Observed treatment and outcome per node, plus the true propensity when known.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub treatment: Vec<bool>,
    pub outcome: Vec<f64>,
    pub true_g: Option<Vec<f64>>,
}

impl Dataset {
    pub fn units(&self) -> Result<UnitTable> {
        Ok(UnitTable::new(self.treatment.clone(), self.outcome.clone())?)
    }
}

/// Sidecar describing how a dataset was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub true_ate: f64,
    pub n: usize,
    pub config: serde_json::Value,
}

/// Writes `node_id,t,y,true_g`; `true_g` is left empty when unknown.
pub fn write_dataset(path: &Path, data: &Dataset, ids: &IdMap, provenance: Option<&Provenance>) -> Result<()> {
    write_file(path, |w| {
        write_header(w, provenance)?;
        writeln!(w, "node_id,t,y,true_g")?;
        for i in 0..data.treatment.len() {
            let g = data.true_g.as_ref().map_or(String::new(), |g| g[i].to_string());
            writeln!(w, "{},{},{},{}", ids.external(i), data.treatment[i] as u8, data.outcome[i], g)?;
        }
        Ok(())
    })
}

/// Reads a dataset; every node of `ids` needs exactly one row. `true_g` is
/// returned only when present for every node.
pub fn read_dataset(path: &Path, ids: &IdMap) -> Result<Dataset> {
    let mut reader = csv_reader(path)?;
    let header = expect_columns(path, &mut reader, &["node_id", "t", "y"])?;
    let has_g = header.get(3) == Some("true_g");
    let n = ids.len();
    let mut treatment = vec![None; n];
    let mut outcome = vec![0.0; n];
    let mut true_g: Vec<Option<f64>> = vec![None; n];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let node = ids.resolve(path, line, field(path, &record, 0, "node_id")?)?;
        if treatment[node].is_some() {
            return Err(Error::parse(path, line, "node appears twice"));
        }
        treatment[node] = Some(match &record[1] {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(path, line, format!("treatment must be 0 or 1, found `{other}`"))),
        });
        outcome[node] = field(path, &record, 2, "y")?;
        if has_g && record.get(3).is_some_and(|s| !s.is_empty()) {
            true_g[node] = Some(field(path, &record, 3, "true_g")?);
        }
    }
    let missing = treatment.iter().filter(|t| t.is_none()).count();
    if missing > 0 {
        return Err(Error::format(path, format!("{missing} node(s) have no row")));
    }
    let true_g = true_g.iter().copied().collect::<Option<Vec<f64>>>();
    Ok(Dataset { treatment: treatment.into_iter().map(Option::unwrap).collect(), outcome, true_g })
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, manifest)?;
        writeln!(w)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_and_without_propensity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let ids = IdMap::new(vec![10, 20, 30]).unwrap();
        let mut data = Dataset { treatment: vec![true, false, true], outcome: vec![0.1, -2.5, 1e-17], true_g: Some(vec![0.15, 0.5, 0.85]) };
        write_dataset(&path, &data, &ids, Some(&Provenance { config_hash: "h".into(), seed: 3 })).unwrap();
        assert!(std::fs::read_to_string(&path).unwrap().starts_with("# config_hash=h seed=3\nnode_id,t,y,true_g\n10,1,"));
        assert_eq!(read_dataset(&path, &ids).unwrap(), data);
        data.true_g = None;
        write_dataset(&path, &data, &ids, None).unwrap();
        assert_eq!(read_dataset(&path, &ids).unwrap(), data);
    }

    #[test]
    fn incomplete_or_bad_rows_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let ids = IdMap::identity(2);
        std::fs::write(&path, "node_id,t,y\n0,1,2.0\n").unwrap();
        assert!(matches!(read_dataset(&path, &ids).unwrap_err(), Error::Format { .. }));
        std::fs::write(&path, "node_id,t,y\n0,1,2.0\n1,2,0\n").unwrap();
        assert!(matches!(read_dataset(&path, &ids).unwrap_err(), Error::Parse { line: 3, .. }));
    }
}
