//! `ingest`: adapt raw upstream JSONL to the canonical schemas.

use std::io::BufReader;
use std::path::{Path, PathBuf};

use quantcheck_core::config::PipelineConfig;
use quantcheck_core::corpus::{ingest_claims, ingest_evidence, write_claims, Split};
use quantcheck_core::{Error, Result};

use crate::manifest::ManifestBuilder;

pub fn run(
    config: &PipelineConfig,
    raw_claims: Option<PathBuf>,
    raw_evidence: Option<PathBuf>,
    split: &str,
    out: &Path,
) -> Result<()> {
    let mut manifest = ManifestBuilder::start("ingest", config);
    match (raw_claims, raw_evidence) {
        (Some(raw), None) => {
            manifest.input(&raw)?;
            let default_split: Split = split.parse()?;
            let file = std::fs::File::open(&raw)
                .map_err(|e| Error::data(format!("cannot open {}: {e}", raw.display())))?;
            let ingested = ingest_claims(BufReader::new(file), &raw, default_split)?;
            for warning in &ingested.warnings {
                eprintln!("warning: {warning}");
            }
            if let Some(parent) = out.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            let mut buffer = Vec::new();
            write_claims(&ingested.records, &mut buffer)?;
            std::fs::write(out, buffer)?;
            println!(
                "ingested {} claims -> {}",
                ingested.records.len(),
                out.display()
            );
        }
        (None, Some(raw)) => {
            manifest.input(&raw)?;
            let file = std::fs::File::open(&raw)
                .map_err(|e| Error::data(format!("cannot open {}: {e}", raw.display())))?;
            let ingested = ingest_evidence(BufReader::new(file), &raw)?;
            for warning in &ingested.warnings {
                eprintln!("warning: {warning}");
            }
            let mut lines = Vec::new();
            for doc in &ingested.records {
                lines.push(serde_json::to_string(doc).map_err(|e| Error::data(e.to_string()))?);
            }
            if let Some(parent) = out.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(out, lines.join("\n") + "\n")?;
            println!(
                "ingested {} evidence docs -> {}",
                ingested.records.len(),
                out.display()
            );
        }
        _ => {
            return Err(Error::config(
                "pass exactly one of --raw-claims or --raw-evidence",
            ));
        }
    }
    manifest.finish(out)
}
