//! Text checkpoint of an [`EmbeddingModel`]:
//!
//! ```text
//! # config_hash=... seed=...
//! node_count,dim
//! <n>,<p>
//! q0,<bias>,<w_1>,...,<w_p>
//! q1,<bias>,<w_1>,...,<w_p>
//! g,<bias>,<w_1>,...,<w_p>
//! <lambda_0,1>,...,<lambda_0,p>
//! ...                              (n embedding rows, internal node order)
//! ```
//!
//! Floats use the shortest representation that parses back exactly.

use std::io::Write;
use std::path::Path;

use netcause_core::embed::{EmbeddingModel, LinearHead};

use super::{data_lines, open, write_file, write_header, Provenance};
use crate::{Error, Result};

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

pub fn write_checkpoint(path: &Path, model: &EmbeddingModel, provenance: Option<&Provenance>) -> Result<()> {
    write_file(path, |w| {
        write_header(w, provenance)?;
        writeln!(w, "node_count,dim")?;
        writeln!(w, "{},{}", model.node_count(), model.dim())?;
        let heads = [("q0", &model.outcome_heads[0]), ("q1", &model.outcome_heads[1]), ("g", &model.treatment_head)];
        for (name, head) in heads {
            writeln!(w, "{name},{}", join(std::iter::once(head.bias).chain(head.weights.iter().copied())))?;
        }
        for node in 0..model.node_count() {
            writeln!(w, "{}", join(model.embedding(node).iter().copied()))?;
        }
        Ok(())
    })
}

pub fn read_checkpoint(path: &Path) -> Result<EmbeddingModel> {
    let mut lines = data_lines(path, open(path)?);
    let mut next = |what: &str| -> Result<(u64, String)> {
        lines.next().unwrap_or_else(|| Err(Error::format(path, format!("truncated before {what}"))))
    };
    let numbers = |line: u64, text: &str| -> Result<Vec<f64>> {
        text.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::parse(path, line, format!("bad number `{s}`"))))
            .collect()
    };
    let (line, header) = next("header")?;
    if header.trim() != "node_count,dim" {
        return Err(Error::parse(path, line, "expected `node_count,dim`"));
    }
    let (line, sizes) = next("sizes")?;
    let sizes: Vec<usize> = sizes
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::parse(path, line, format!("bad size `{s}`"))))
        .collect::<Result<_>>()?;
    let &[n, dim] = sizes.as_slice() else {
        return Err(Error::parse(path, line, "expected `<node_count>,<dim>`"));
    };
    let mut heads = Vec::with_capacity(3);
    for name in ["q0", "q1", "g"] {
        let (line, text) = next(name)?;
        let (tag, rest) = text.split_once(',').unwrap_or((text.as_str(), ""));
        let values = numbers(line, rest)?;
        if tag.trim() != name || values.len() != dim + 1 {
            return Err(Error::parse(path, line, format!("expected `{name}` head with {} values", dim + 1)));
        }
        heads.push(LinearHead { bias: values[0], weights: values[1..].to_vec() });
    }
    let mut embeddings = Vec::with_capacity(n * dim);
    for node in 0..n {
        let (line, text) = next("embedding rows")?;
        let row = numbers(line, &text)?;
        if row.len() != dim {
            return Err(Error::parse(path, line, format!("embedding row {node} has {} values, expected {dim}", row.len())));
        }
        embeddings.extend(row);
    }
    if let Some(extra) = lines.next() {
        let (line, _) = extra?;
        return Err(Error::parse(path, line, "unexpected data after the last embedding row"));
    }
    let thead = heads.pop().unwrap();
    let q1 = heads.pop().unwrap();
    let q0 = heads.pop().unwrap();
    Ok(EmbeddingModel::from_parts(dim, embeddings, [q0, q1], thead)?)
}
