//! Configuration-driven sweeps reproducing the experiment panels.
//!
//! A sweep expands its config into points, runs every point
//! `runs_per_point` times on independent seeded streams, and writes one CSV
//! row per run. Runs are spread over the worker pool; results are ordered by
//! `(point, run)` before writing, so output is identical for any thread
//! count.

pub mod config;
pub mod figures;
pub mod record;
pub mod run;
pub mod stats;

pub use config::{ExperimentConfig, ExperimentKind, PRule, RegretSettings};
pub use figures::{figures_data, Scale};
pub use record::{read_records, write_records, RunRecord, CSV_HEADER};
pub use run::{persist, run_config_file, run_experiment, sweep, sweep_points, HeadToHead, RegretSummary, RunOutcome, SweepPoint};
