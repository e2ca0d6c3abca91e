//! `report`: render an ablation report as an aligned table plus CSV.

use std::path::PathBuf;

use quantcheck_core::config::PipelineConfig;
use quantcheck_core::eval::AblationReport;
use quantcheck_core::{Error, Result};

use crate::commands::{ablation_path, open_artifact};
use crate::manifest::ManifestBuilder;

pub fn run(config: &PipelineConfig, input: Option<PathBuf>) -> Result<()> {
    let mut manifest = ManifestBuilder::start("report", config);
    let input_path = input.unwrap_or_else(|| ablation_path(config));
    // Surface the "run ablate first" hint before reading.
    drop(open_artifact(&input_path, "ablate")?);
    manifest.input(&input_path)?;

    let json = std::fs::read_to_string(&input_path)?;
    let report = AblationReport::from_machine_json(&json)
        .map_err(|e| Error::data(format!("{}: {e}", input_path.display())))?;

    let csv_path = input_path.with_extension("csv");
    std::fs::write(&csv_path, report.to_csv())?;

    print!("{}", report.to_human_table());
    println!("-> {}", csv_path.display());
    manifest.finish(&csv_path)
}
