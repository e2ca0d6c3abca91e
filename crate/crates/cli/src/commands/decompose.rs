//! `decompose`: produce three sub-questions per claim, extending the cache.

use quantcheck_core::config::PipelineConfig;
use quantcheck_core::Result;

use crate::commands::{decompose_claims, load_claims};
use crate::manifest::ManifestBuilder;

pub fn run(config: &PipelineConfig) -> Result<()> {
    let mut manifest = ManifestBuilder::start("decompose", config);
    manifest.input(&config.claims)?;

    let claims = load_claims(config)?;
    let sets = decompose_claims(config, &claims)?;

    let mut by_source = std::collections::BTreeMap::new();
    for set in &sets {
        *by_source
            .entry(format!("{:?}", set.source))
            .or_insert(0usize) += 1;
    }
    let summary: Vec<String> = by_source
        .iter()
        .map(|(source, count)| format!("{count} {}", source.to_lowercase()))
        .collect();
    println!(
        "decomposed {} claims ({}) -> {}",
        sets.len(),
        summary.join(", "),
        config.cache.display()
    );
    manifest.finish(&config.cache)
}
