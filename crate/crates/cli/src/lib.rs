//! Experiment runner for the contact-process laboratory: TOML configs,
//! presets, replica farming and report files.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod presets;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{ExperimentConfig, Experiment};
pub use error::{LabError, LabResult};
pub use experiments::{export_timeline, run_experiment};
pub use output::{Report, RunManifest, RunOutput, Status};
pub use presets::{preset, PRESETS};

/// Default output directory when neither the config nor a flag names one.
pub const OUT_ENV: &str = "CONTACT_LAB_OUT";

/// `config.out`, else `$CONTACT_LAB_OUT/<name>`, else `out/<name>`.
pub fn output_dir(config: &ExperimentConfig) -> PathBuf {
    if let Some(dir) = &config.out {
        return dir.clone();
    }
    let base = std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("out"), PathBuf::from);
    let name = if config.name.is_empty() {
        config.experiment.kind()
    } else {
        config.name.as_str()
    };
    base.join(name)
}

/// Runs `config` and persists everything under `dir`.
pub fn execute(config: &ExperimentConfig, dir: &Path) -> LabResult<(RunOutput, RunManifest)> {
    let start = Instant::now();
    let output = run_experiment(config)?;
    let manifest = output::persist(dir, &output, start.elapsed().as_secs_f64())?;
    Ok((output, manifest))
}
