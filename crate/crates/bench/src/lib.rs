//! Experiment runner for the `ssd-core` solvers: parameter sweeps over
//! sampling rules and momentum, seeded repetitions averaged pointwise, and
//! CSV, metadata and plot-series output.

// `!(x > 0)` forms also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod output;
pub mod plan;
pub mod runner;

use std::path::PathBuf;

pub use output::{emit_csv, emit_plot_data, theory_dump, CSV_COLUMNS};
pub use plan::{DatasetSource, ExperimentPlan, Method, MetricChoice, Preset, RuleSpec, TauSpec};
pub use runner::{derived_seed, run_experiment, ResultRow, TracePoint};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dataset {dataset}: {source}")]
    Dataset {
        dataset: String,
        #[source]
        source: Box<BenchError>,
    },
    #[error(transparent)]
    Core(#[from] ssd_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl BenchError {
    pub fn config(msg: impl Into<String>) -> Self {
        BenchError::Config(msg.into())
    }
}
