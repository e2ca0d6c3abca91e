//! `retrieve`: BM25 top-k candidates for every sub-claim.

use quantcheck_core::config::PipelineConfig;
use quantcheck_core::decompose::DecomposeCache;
use quantcheck_core::retrieval::{search, InvertedIndex};
use quantcheck_core::{Error, Result};

use crate::commands::{candidates_path, load_claims, RetrievedClaim};
use crate::manifest::ManifestBuilder;

pub fn run(config: &PipelineConfig) -> Result<()> {
    let mut manifest = ManifestBuilder::start("retrieve", config);
    manifest.input(&config.claims)?;

    let claims = load_claims(config)?;
    let index = InvertedIndex::load(&config.index_dir)?;

    // Sub-questions must already exist; retrieval never talks to the LLM.
    let cache = DecomposeCache::load(&config.cache)?;
    let mut records = Vec::with_capacity(claims.len());
    for claim in &claims {
        let subs = cache.get(&claim.claim_id).ok_or_else(|| {
            Error::data(format!(
                "claim '{}' has no cached decomposition (run `decompose` first)",
                claim.claim_id
            ))
        })?;
        let mut candidates = Vec::with_capacity(3);
        for (sub_idx, question) in subs.questions.iter().enumerate() {
            let mut hits = search(&index, question, config.k)?;
            for hit in &mut hits {
                hit.sub_claim_index = sub_idx;
            }
            candidates.push(hits);
        }
        records.push(RetrievedClaim {
            claim_id: claim.claim_id.clone(),
            questions: subs.questions.clone(),
            candidates,
        });
    }

    let path = candidates_path(config);
    crate::commands::write_jsonl(&records, &path)?;
    let total: usize = records
        .iter()
        .map(|r| r.candidates.iter().map(Vec::len).sum::<usize>())
        .sum();
    println!(
        "retrieved {total} candidates for {} claims -> {}",
        records.len(),
        path.display()
    );
    manifest.finish(&path)
}
