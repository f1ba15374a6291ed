//! Riemannian statistics for numeric data tables.
//!
//! A table is given a local metric structure by the UMAP construction
//! (k-nearest neighbors, per-point bandwidths, fuzzy memberships). Distances
//! along that structure drive a Fréchet mean, a rescaled subtraction, a
//! covariance matrix and a correlation index whose correlation circle stays
//! inside the unit disk.
//!
//! The crate is organized bottom-up:
//!
//! - [`data`]: data table, CSV I/O, standardization, pipeline configuration
//! - [`neighbors`]: exact k-nearest neighbors
//! - [`local_metric`]: local scales, fuzzy graph, all-pairs UMAP distances
//! - [`embedding`]: kernel fit, spectral initialization, cross-entropy layout
//! - [`stats`]: Fréchet mean, covariance, correlation, correlation circle
//! - [`topology`]: Čech complexes, single linkage, Betti numbers
//! - [`pipeline`]: end-to-end run over a table
//! - [`report`], [`svg`], [`cli`]: serialization and the command-line surface
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod embedding;
mod error;
pub mod local_metric;
pub mod neighbors;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod svg;
pub mod topology;

pub use data::{DataTable, DisconnectPolicy, MetricMode, PipelineConfig, Standardize};
pub use error::{Error, Result};
pub use pipeline::{run_pipeline, PipelineOutput};

/// The students grade table (ten students, five subjects).
pub const STUDENTS_CSV: &str = include_str!("../data/students.csv");

/// Parses [`STUDENTS_CSV`].
pub fn students() -> DataTable {
    DataTable::from_csv(STUDENTS_CSV.as_bytes()).expect("bundled fixture is valid")
}
