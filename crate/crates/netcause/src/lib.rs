//! File formats, experiment configuration and the command-line pipeline
//! around [`netcause_core`].
//!
//! The stages in [`pipeline`] are pure in-memory functions of an
//! [`ExperimentConfig`]; [`commands`] wraps them with the on-disk formats
//! of [`io`].

pub mod commands;
pub mod config;
mod error;
pub mod io;
pub mod pipeline;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use netcause_core as core;
