//! Batch driver: configuration parsing, subcommand pipelines, run manifests
//! and plot-data emission.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod plot;

use std::path::Path;

pub use config::{parse_config, LambdaMode, RunConfig, StartMode};
pub use error::CliError;
pub use pipeline::{load_fields, run, Command, RunManifest, MANIFEST_FILE, SCHEMA_VERSION};
pub use plot::emit_plot_data;

/// Reads the run in `dir` and emits plot data for `which` (a field name or `all`).
pub fn report_run(dir: &Path, which: &str) -> Result<Vec<std::path::PathBuf>, CliError> {
    let manifest = RunManifest::load(dir)?;
    let fields = load_fields(dir, &manifest)?;
    emit_plot_data(&fields, dir, which)
}
