//! Configuration files, experiment orchestration and file output.

mod config;
mod output;
mod run;

pub use config::{load_config, parse_config, preset, DiracSettings, KuboSettings, Mode, ModelSpec, RunConfig, Threads};
pub use output::{svg_plot, write_table, Series};
pub use run::{build_model, run, RunSummary};
