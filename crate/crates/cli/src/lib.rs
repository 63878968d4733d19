//! Batch front end: config files, CSV data, and the `test`, `confset` and
//! `simulate` commands with reproducible manifests.

// `!(a <= b)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod ingest;
pub mod run;

pub use config::{parse_config, Command, DesignChoice, RunConfig};
pub use error::{CliError, CliResult};
pub use ingest::{ingest_csv, read_dataset, write_csv, write_dataset, Schema};
pub use run::{replay, run, sha256_hex, Invocation, Manifest};
