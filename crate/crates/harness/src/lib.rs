//! Experiment harness: configuration, Monte Carlo runs, aggregate reports,
//! summary tables and figure data.

pub mod config;
pub mod error;
pub mod figures;
pub mod io;
pub mod report;
pub mod run;
pub mod tables;

pub use config::{preset, ExperimentConfig, ExperimentSection, ProcessSpec, PRESETS};
pub use error::{HarnessError, Result};
pub use figures::{emit_figure1, emit_figure_data};
pub use report::{build_report, ExperimentReport, GridSummary, SimulationRecord};
pub use run::{load_run, run_experiment};
pub use tables::emit_tables;
