//! Experiment driver: configuration, the experiments themselves, and the
//! JSON/CSV/SVG outputs they produce.

// `!(x > 0.0)` style comparisons are there to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod plot;
pub mod report;

pub use config::{ConfigError, ExperimentConfig, ExperimentId, Selection};
pub use experiments::run_experiment;
pub use plot::{emit_plot, Axis, PlotError, PlotStyle, Series};
pub use report::{CheckRecord, ExperimentReport, RunOutput, Status};
