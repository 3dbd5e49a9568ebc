//! Causal effect estimation with a network as proxy for unobserved confounding.
//!
//! The crate is `no_std` (it needs `alloc`). It contains the pure algorithmic
//! pieces of the pipeline:
//!
//! - [`graph`]: an immutable undirected simple graph, node attributes, a
//!   stochastic block model generator and the random-walk subgraph sampler.
//! - [`simulate`]: semi-synthetic treatments and outcomes driven by a
//!   confounder column, plus exogenous propensity mixing.
//! - [`embed`]: node embeddings with linear outcome and treatment heads trained
//!   jointly by SGD over sampled subgraphs.
//! - [`crossfit`]: fold assignment and out-of-fold nuisance estimation.
//! - [`estimators`]: plug-in ATE estimators, influence-function variance and
//!   an embedding dependence diagnostic.
//!
//! File formats, configuration and the command-line front end live in the
//! `netcause` crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod crossfit;
pub mod embed;
mod error;
pub mod estimators;
pub mod graph;
pub mod math;
pub mod seed;
pub mod simulate;
pub mod units;

pub use crate::error::{Error, ErrorKind, Result};
