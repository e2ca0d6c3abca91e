//! `evaluate`: score predictions against gold labels.

use std::path::PathBuf;

use quantcheck_core::config::PipelineConfig;
use quantcheck_core::corpus::VeracityLabel;
use quantcheck_core::eval::MetricsReport;
use quantcheck_core::{Error, Result};

use crate::commands::{
    load_claims, metrics_path, open_artifact, predictions_path, read_jsonl, Prediction,
};
use crate::manifest::ManifestBuilder;

pub fn run(config: &PipelineConfig, predictions: Option<PathBuf>) -> Result<()> {
    let mut manifest = ManifestBuilder::start("evaluate", config);
    manifest.input(&config.claims)?;

    let predictions_file = predictions.unwrap_or_else(|| predictions_path(config));
    let records: Vec<Prediction> = read_jsonl(
        open_artifact(&predictions_file, "predict")?,
        &predictions_file,
    )?;
    manifest.input(&predictions_file)?;

    let claims = load_claims(config)?;
    let gold_by_id: std::collections::HashMap<&str, VeracityLabel> = claims
        .iter()
        .filter_map(|c| c.label.map(|l| (c.claim_id.as_str(), l)))
        .collect();

    let mut golds = Vec::new();
    let mut preds = Vec::new();
    let mut skipped = 0usize;
    for record in &records {
        match gold_by_id.get(record.claim_id.as_str()) {
            Some(&gold) => {
                golds.push(gold);
                preds.push(VeracityLabel::parse(&record.label)?);
            }
            None => skipped += 1,
        }
    }
    if golds.is_empty() {
        return Err(Error::data("no predictions matched a labeled claim"));
    }

    let report = MetricsReport::from_labels(&golds, &preds)?;
    let path = metrics_path(config);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::data(e.to_string()))?;
    std::fs::write(&path, json + "\n")?;

    println!(
        "evaluated {} claims ({} skipped, no gold label)",
        golds.len(),
        skipped
    );
    println!(
        "macro-F1 {:.2}  acc {:.2}  F1 true {:.2}  false {:.2}  conflicting {:.2}",
        report.macro_f1, report.accuracy, report.f1[0], report.f1[1], report.f1[2]
    );
    println!("-> {}", path.display());
    manifest.finish(&path)
}
