//! `assemble`: rerank candidates, select top-m per sub-claim, and build
//! the budgeted classifier inputs.

use quantcheck_core::config::PipelineConfig;
use quantcheck_core::corpus::Claim;
use quantcheck_core::decompose::{Source, SubClaimSet};
use quantcheck_core::rerank::{assemble_input, rerank_many, select_top_m};
use quantcheck_core::{Error, Result};

use crate::commands::{
    assembled_path, build_scorer, candidates_path, load_claims, load_doc_texts, open_artifact,
    read_jsonl, RetrievedClaim,
};
use crate::manifest::ManifestBuilder;

pub fn run(config: &PipelineConfig) -> Result<()> {
    let mut manifest = ManifestBuilder::start("assemble", config);
    manifest.input(&config.claims)?;
    manifest.input(&config.evidence)?;

    let claims = load_claims(config)?;
    let by_id: std::collections::HashMap<&str, &Claim> =
        claims.iter().map(|c| (c.claim_id.as_str(), c)).collect();

    let candidates_file = candidates_path(config);
    let retrieved: Vec<RetrievedClaim> = read_jsonl(
        open_artifact(&candidates_file, "retrieve")?,
        &candidates_file,
    )?;
    manifest.input(&candidates_file)?;

    let doc_texts = load_doc_texts(config)?;
    let lookup = |id: &str| doc_texts.get(id).cloned();
    let scorer = build_scorer(config)?;

    // Flatten to (question, candidates) pairs for bounded reranking.
    let mut pairs = Vec::with_capacity(retrieved.len() * 3);
    for record in &retrieved {
        for (question, candidates) in record.questions.iter().zip(&record.candidates) {
            pairs.push((question.clone(), candidates.clone()));
        }
    }
    let reranked = rerank_many(&pairs, scorer.as_ref(), &lookup, config.max_in_flight)?;

    let mode = config.digit_mode()?;
    let budget = config.context_budget()?;
    let mut assembled = Vec::with_capacity(retrieved.len());
    for (i, record) in retrieved.iter().enumerate() {
        let claim = by_id.get(record.claim_id.as_str()).ok_or_else(|| {
            Error::data(format!(
                "candidates reference unknown claim '{}'",
                record.claim_id
            ))
        })?;
        let selection = select_top_m(&reranked[i * 3..(i + 1) * 3], config.m)?;
        let subs = SubClaimSet {
            claim_id: record.claim_id.clone(),
            questions: record.questions.clone(),
            source: Source::Cache,
        };
        assembled.push(assemble_input(
            claim, &subs, &selection, budget, mode, &lookup,
        )?);
    }

    let path = assembled_path(config);
    crate::commands::write_jsonl(&assembled, &path)?;
    let truncated = assembled.iter().filter(|a| a.truncated).count();
    println!(
        "assembled {} inputs ({} truncated at {} tokens, mode {}) -> {}",
        assembled.len(),
        truncated,
        budget.max_tokens,
        mode.grouping,
        path.display()
    );
    manifest.finish(&path)
}
