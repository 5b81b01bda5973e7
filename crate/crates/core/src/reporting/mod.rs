//! Experiment configuration, dispatch to the numerical pipelines, and the
//! files a run leaves behind (CSV tables, a JSON run record, plot data).

mod config;
mod output;
mod run;

pub use config::{BodySpec, ExperimentConfig, ExperimentKind, RawConfig, KEYS};
pub use output::{emit_plot_data, fmt_float, fmt_short, write_outputs, PlotFiles, RESIDUAL_HEADER};
pub use run::{exit_code, run, theory_for, RunRecord, Tables, Tolerances, TOOL_VERSION};
