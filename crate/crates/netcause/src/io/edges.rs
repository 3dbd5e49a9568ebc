use std::io::{BufRead, Write};
use std::path::Path;

use netcause_core::graph::Graph;

use super::{csv_error, csv_reader, data_lines, expect_columns, field, open, write_file, write_header, Provenance};
use crate::{Error, Result};

/// Field separator of an edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeFormat {
    /// Tabs or spaces.
    #[default]
    Tsv,
    Csv,
}

impl EdgeFormat {
    /// `.csv` files are comma-separated, everything else whitespace-separated.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => EdgeFormat::Csv,
            _ => EdgeFormat::Tsv,
        }
    }

    fn separator(self) -> &'static str {
        match self {
            EdgeFormat::Tsv => "\t",
            EdgeFormat::Csv => ",",
        }
    }
}

/// Map between external node ids and dense internal indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    /// External id of each internal index.
    external: Vec<u64>,
    /// `(external, internal)` sorted by external id.
    lookup: Vec<(u64, usize)>,
}

impl IdMap {
    /// `external[i]` is the external id of internal node `i`; ids must be distinct.
    pub fn new(external: Vec<u64>) -> Result<Self> {
        let mut lookup: Vec<(u64, usize)> = external.iter().copied().zip(0..).collect();
        lookup.sort_unstable();
        if let Some(w) = lookup.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Config(format!("external id {} is mapped twice", w[0].0)));
        }
        Ok(IdMap { external, lookup })
    }

    /// Ids `0..n` mapped to themselves.
    pub fn identity(n: usize) -> Self {
        IdMap::new((0..n as u64).collect()).expect("distinct ids")
    }

    pub fn len(&self) -> usize {
        self.external.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external.is_empty()
    }

    pub fn external(&self, internal: usize) -> u64 {
        self.external[internal]
    }

    pub fn internal(&self, external: u64) -> Option<usize> {
        self.lookup
            .binary_search_by_key(&external, |&(e, _)| e)
            .ok()
            .map(|k| self.lookup[k].1)
    }

    /// Internal index of an external id read from `path` at `line`.
    pub(crate) fn resolve(&self, path: &Path, line: u64, external: u64) -> Result<usize> {
        self.internal(external)
            .ok_or_else(|| Error::parse(path, line, format!("unknown node id {external}")))
    }
}

/// A parsed edge list together with what was dropped while building it.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub ids: IdMap,
    pub duplicates: usize,
    pub self_loops: usize,
}

impl LoadedGraph {
    /// Human-readable warnings about dropped lines and isolated nodes.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.duplicates > 0 {
            out.push(format!("dropped {} duplicate edge(s)", self.duplicates));
        }
        if self.self_loops > 0 {
            out.push(format!("dropped {} self-loop(s)", self.self_loops));
        }
        out
    }
}

/// Parses an edge list. Without `ids`, node ids are densified in increasing
/// external-id order; with `ids`, every id must appear in the map.
pub fn parse_edge_list(path: &Path, reader: impl BufRead, format: EdgeFormat, ids: Option<&IdMap>) -> Result<LoadedGraph> {
    let mut raw: Vec<(u64, u64, u64)> = Vec::new();
    for item in data_lines(path, reader) {
        let (line, text) = item?;
        let fields: Vec<&str> = match format {
            EdgeFormat::Tsv => text.split_whitespace().collect(),
            EdgeFormat::Csv => text.split(',').map(str::trim).collect(),
        };
        if fields.len() != 2 {
            return Err(Error::parse(path, line, format!("expected two node ids, found {} field(s)", fields.len())));
        }
        let id = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| Error::parse(path, line, format!("`{s}` is not a nonnegative integer node id")))
        };
        raw.push((line, id(fields[0])?, id(fields[1])?));
    }
    if raw.is_empty() {
        return Err(netcause_core::Error::EmptyGraph.into());
    }
    let ids = match ids {
        Some(map) => map.clone(),
        None => {
            let mut seen: Vec<u64> = raw.iter().flat_map(|&(_, a, b)| [a, b]).collect();
            seen.sort_unstable();
            seen.dedup();
            IdMap::new(seen)?
        }
    };
    let edges = raw
        .iter()
        .map(|&(line, a, b)| Ok((ids.resolve(path, line, a)?, ids.resolve(path, line, b)?)))
        .collect::<Result<Vec<_>>>()?;
    let (graph, stats) = Graph::from_edges(ids.len(), edges)?;
    Ok(LoadedGraph { graph, ids, duplicates: stats.duplicates, self_loops: stats.self_loops })
}

pub fn load_edge_list(path: &Path, format: EdgeFormat, ids: Option<&IdMap>) -> Result<LoadedGraph> {
    parse_edge_list(path, open(path)?, format, ids)
}

/// Writes each edge once, lower internal index first, using external ids.
pub fn write_edge_list(path: &Path, graph: &Graph, ids: &IdMap, format: EdgeFormat, provenance: Option<&Provenance>) -> Result<()> {
    write_file(path, |w| {
        write_header(w, provenance)?;
        for (a, b) in graph.edges() {
            writeln!(w, "{}{}{}", ids.external(a), format.separator(), ids.external(b))?;
        }
        Ok(())
    })
}

pub fn write_id_map(path: &Path, ids: &IdMap, provenance: Option<&Provenance>) -> Result<()> {
    write_file(path, |w| {
        write_header(w, provenance)?;
        writeln!(w, "external_id,internal_id")?;
        for i in 0..ids.len() {
            writeln!(w, "{},{}", ids.external(i), i)?;
        }
        Ok(())
    })
}

/// Reads an `external_id,internal_id` sidecar; internal ids must cover `0..n`.
pub fn read_id_map(path: &Path) -> Result<IdMap> {
    let mut reader = csv_reader(path)?;
    expect_columns(path, &mut reader, &["external_id", "internal_id"])?;
    let mut pairs: Vec<(usize, u64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        pairs.push((field(path, &record, 1, "internal_id")?, field(path, &record, 0, "external_id")?));
    }
    pairs.sort_unstable();
    if pairs.iter().enumerate().any(|(i, &(internal, _))| internal != i) {
        return Err(Error::format(path, "internal ids must be exactly 0..n-1"));
    }
    IdMap::new(pairs.into_iter().map(|(_, e)| e).collect())
}
