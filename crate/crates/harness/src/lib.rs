//! Files, configuration, reports and the end-to-end experiment runner
//! around `delta-core`.

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod report;

pub use config::{DataSource, ExperimentSpec, Strategy, SynthConfig};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, run_variants, Variant};
pub use report::{Checkpoint, EvalReport, SelectionReport};
