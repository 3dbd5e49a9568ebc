//! On-disk formats. Every file written here starts with `#` comment lines
//! carrying the configuration hash and global seed; every reader skips them.

mod attributes;
mod checkpoint;
mod dataset;
mod edges;
mod nuisance;
mod report;

pub use attributes::{read_attributes, write_attributes};
pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use dataset::{read_dataset, write_dataset, write_manifest, Dataset, Manifest};
pub use edges::{load_edge_list, parse_edge_list, read_id_map, write_edge_list, write_id_map, EdgeFormat, IdMap, LoadedGraph};
pub use nuisance::{read_nuisances, write_nuisances};
pub use report::{write_report, write_summary, write_sweep, ReportFile, SummaryRow, SweepRow};

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Identifies the run that produced a file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn comment(&self) -> String {
        format!("# config_hash={} seed={}", self.config_hash, self.seed)
    }
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes through `body` and flushes, attributing IO failures to `path`.
pub(crate) fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_header(w: &mut impl Write, provenance: Option<&Provenance>) -> std::io::Result<()> {
    match provenance {
        Some(p) => writeln!(w, "{}", p.comment()),
        None => Ok(()),
    }
}

/// Non-blank, non-comment lines with their 1-based line numbers.
pub(crate) fn data_lines<'a>(path: &'a Path, reader: impl BufRead + 'a) -> impl Iterator<Item = Result<(u64, String)>> + 'a {
    reader
        .lines()
        .enumerate()
        .map(move |(i, line)| line.map(|l| (i as u64 + 1, l)).map_err(|e| Error::io(path, e)))
        .filter(|r| {
            r.as_ref()
                .map(|(_, l)| {
                    let t = l.trim();
                    !t.is_empty() && !t.starts_with('#')
                })
                .unwrap_or(true)
        })
}

/// CSV reader over a file, skipping `#` comment lines.
pub(crate) fn csv_reader(path: &Path) -> Result<csv::Reader<BufReader<File>>> {
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(open(path)?))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.position() {
        Some(pos) => Error::parse(path, pos.line(), e.to_string()),
        None => Error::format(path, e.to_string()),
    }
}

/// Checks that a CSV header starts with the expected column names.
pub(crate) fn expect_columns(path: &Path, reader: &mut csv::Reader<BufReader<File>>, expected: &[&str]) -> Result<csv::StringRecord> {
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let found: Vec<&str> = header.iter().collect();
    if found.len() < expected.len() || found[..expected.len()] != *expected {
        return Err(Error::format(path, format!("expected columns {}, found {}", expected.join(","), found.join(","))));
    }
    Ok(header)
}

pub(crate) fn field<T: std::str::FromStr>(path: &Path, record: &csv::StringRecord, index: usize, name: &str) -> Result<T> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record.get(index).ok_or_else(|| Error::parse(path, line, format!("missing `{name}`")))?;
    raw.parse().map_err(|_| Error::parse(path, line, format!("bad `{name}` value `{raw}`")))
}
