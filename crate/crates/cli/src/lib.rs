//! Front end for the `ndc-ofdm` toolkit: config files, bundled recipes and
//! result files. The `ndcofdm` binary is a thin wrapper over [`commands`].

pub mod commands;
pub mod config;
pub mod error;
pub mod geometry;
pub mod manifest;
pub mod output;
pub mod recipes;

pub use error::{CliError, Result};
