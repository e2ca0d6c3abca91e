//! Second-stage reranking of BM25 candidates, evidence selection, and
//! assembly of the classifier input string.
//!
//! A [`PairScorer`] re-scores (query, document) pairs; the built-in
//! backends are a deterministic lexical-overlap scorer (the offline
//! default) and an HTTP cross-encoder client. After reranking, the top
//! `m in 1..=3` snippets per sub-claim are kept, deduplicated across
//! sub-claims. The final input string is
//! `claim [Q] question... [EV] evidence...`; the `[Q]`/`[EV]` markers
//! survive word tokenization as ordinary `q`/`ev` tokens.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Claim;
use crate::decompose::SubClaimSet;
use crate::error::{Error, Result};
use crate::http::{bounded_map, post_json, HttpPolicy};
use crate::retrieval::ScoredEvidence;
use crate::tokenize::{count_tokens, tokenize, truncate_to_budget, ContextBudget, DigitMode};

/// A (query, document) relevance scorer. Backends must be deterministic
/// for identical inputs within one run configuration.
pub trait PairScorer: Sync {
    /// Name reported in errors and run manifests.
    fn identity(&self) -> &str;

    /// Score each document against the query; one score per document.
    fn score_pairs(&self, query: &str, documents: &[&str]) -> Result<Vec<f64>>;
}

/// Offline default: fraction of the query's unique tokens that appear in
/// the document (digit grouping disabled). Always in [0, 1].
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalOverlapScorer;

impl PairScorer for LexicalOverlapScorer {
    fn identity(&self) -> &str {
        "lexical-oracle"
    }

    fn score_pairs(&self, query: &str, documents: &[&str]) -> Result<Vec<f64>> {
        let query_tokens: HashSet<String> = tokenize(query, DigitMode::none())
            .tokens
            .into_iter()
            .collect();
        let denom = query_tokens.len().max(1) as f64;
        Ok(documents
            .iter()
            .map(|doc| {
                let doc_tokens: HashSet<String> = tokenize(doc, DigitMode::none())
                    .tokens
                    .into_iter()
                    .collect();
                query_tokens.intersection(&doc_tokens).count() as f64 / denom
            })
            .collect())
    }
}

/// Client for an external reranker service.
///
/// Wire contract: `POST /rerank` with `{"query": ..., "documents": [...]}`,
/// response `{"scores": [...]}` of the same length.
pub struct HttpCrossEncoder {
    pub base_url: String,
    pub token: Option<String>,
    pub policy: HttpPolicy,
}

#[derive(Serialize)]
struct RerankRequest<'a> {
    query: &'a str,
    documents: &'a [&'a str],
}

#[derive(Deserialize)]
struct RerankResponse {
    scores: Vec<f64>,
}

impl PairScorer for HttpCrossEncoder {
    fn identity(&self) -> &str {
        "http-cross-encoder"
    }

    fn score_pairs(&self, query: &str, documents: &[&str]) -> Result<Vec<f64>> {
        let url = format!("{}/rerank", self.base_url.trim_end_matches('/'));
        let request = RerankRequest { query, documents };
        let response: RerankResponse = post_json(
            self.identity(),
            &url,
            self.token.as_deref(),
            &request,
            &self.policy,
        )?;
        if response.scores.len() != documents.len() {
            return Err(Error::service(
                self.identity(),
                format!(
                    "score count {} does not match document count {}",
                    response.scores.len(),
                    documents.len()
                ),
            ));
        }
        Ok(response.scores)
    }
}

/// Re-score `candidates` against `query` and sort by rerank score
/// descending, ties broken by ascending doc id. BM25 scores are preserved;
/// doc texts are resolved through `doc_text`.
pub fn rerank(
    candidates: &[ScoredEvidence],
    query: &str,
    scorer: &dyn PairScorer,
    doc_text: &dyn Fn(&str) -> Option<String>,
) -> Result<Vec<ScoredEvidence>> {
    if candidates.is_empty() {
        return Err(Error::data("no candidates to rerank"));
    }
    let texts: Vec<String> = candidates
        .iter()
        .map(|c| {
            doc_text(&c.doc_id)
                .ok_or_else(|| Error::data(format!("doc '{}' not found in corpus", c.doc_id)))
        })
        .collect::<Result<_>>()?;
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let scores = scorer.score_pairs(query, &refs).map_err(|e| match e {
        Error::Service { backend, message } => Error::Service {
            backend,
            message: format!("{message} ({} pairs failed)", candidates.len()),
        },
        other => other,
    })?;

    let mut out: Vec<ScoredEvidence> = candidates
        .iter()
        .zip(scores)
        .map(|(c, s)| ScoredEvidence {
            rerank_score: Some(s),
            ..c.clone()
        })
        .collect();
    out.sort_by(|a, b| {
        b.rerank_score
            .unwrap()
            .partial_cmp(&a.rerank_score.unwrap())
            .unwrap()
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
    Ok(out)
}

/// Rerank several candidate lists, fanning backend calls out under an
/// in-flight bound. Output order matches input order regardless of
/// completion order.
pub fn rerank_many(
    per_query: &[(String, Vec<ScoredEvidence>)],
    scorer: &dyn PairScorer,
    doc_text: &(dyn Fn(&str) -> Option<String> + Sync),
    max_in_flight: usize,
) -> Result<Vec<Vec<ScoredEvidence>>> {
    bounded_map(per_query, max_in_flight, |(query, candidates)| {
        if candidates.is_empty() {
            return Ok(Vec::new());
        }
        rerank(candidates, query, scorer, doc_text)
    })
}

/// Evidence kept for one claim: up to `m` snippets per sub-claim, no
/// duplicate doc ids anywhere in the selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceSelection {
    pub per_sub_claim: Vec<Vec<ScoredEvidence>>,
    pub m: usize,
}

impl EvidenceSelection {
    pub fn total(&self) -> usize {
        self.per_sub_claim.iter().map(Vec::len).sum()
    }

    /// Doc ids in selection order: sub-claim 0's picks first.
    pub fn doc_ids(&self) -> Vec<&str> {
        self.per_sub_claim
            .iter()
            .flatten()
            .map(|e| e.doc_id.as_str())
            .collect()
    }
}

/// Keep the top `m` of each sub-claim's reranked candidates. A doc
/// appearing under several sub-claims is kept once, under the sub-claim
/// where its rerank score is highest (ties go to the lowest sub-claim
/// index).
pub fn select_top_m(per_sub_claim: &[Vec<ScoredEvidence>], m: usize) -> Result<EvidenceSelection> {
    if !(1..=3).contains(&m) {
        return Err(Error::config(format!("m must be in [1, 3], got {m}")));
    }
    if per_sub_claim.len() > 3 {
        return Err(Error::data(format!(
            "expected at most 3 sub-claim candidate lists, got {}",
            per_sub_claim.len()
        )));
    }

    // Owner of each doc id: (best score, owning sub-claim).
    let mut owner: HashMap<&str, (f64, usize)> = HashMap::new();
    for (sub_idx, candidates) in per_sub_claim.iter().enumerate() {
        for c in candidates {
            let score = c.rerank_score.ok_or_else(|| {
                Error::data(format!("candidate '{}' has no rerank score", c.doc_id))
            })?;
            match owner.get(c.doc_id.as_str()) {
                Some(&(best, _)) if best >= score => {}
                _ => {
                    owner.insert(&c.doc_id, (score, sub_idx));
                }
            }
        }
    }

    let mut selection: Vec<Vec<ScoredEvidence>> = Vec::with_capacity(per_sub_claim.len());
    for (sub_idx, candidates) in per_sub_claim.iter().enumerate() {
        let mut kept = Vec::with_capacity(m);
        for c in candidates {
            if kept.len() == m {
                break;
            }
            if owner.get(c.doc_id.as_str()) == Some(&(c.rerank_score.unwrap(), sub_idx)) {
                let mut chosen = c.clone();
                chosen.sub_claim_index = sub_idx;
                // Claim it so an equal-scored later occurrence cannot.
                owner.remove(c.doc_id.as_str());
                kept.push(chosen);
            }
        }
        selection.push(kept);
    }

    Ok(EvidenceSelection {
        per_sub_claim: selection,
        m,
    })
}

/// Classifier input for one claim: assembled text plus the token
/// accounting under the cell's digit mode and budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembledInput {
    pub claim_id: String,
    pub text: String,
    pub token_count: usize,
    pub truncated: bool,
    pub budget: ContextBudget,
    pub mode: DigitMode,
}

/// Build the input string `claim [Q] q1 [Q] q2 [Q] q3 [EV] e1 [EV] ...`,
/// tokenize it under `mode`, and truncate to `budget`. Section order is
/// claim, then questions, then evidences; head-preserving truncation drops
/// evidence tails first.
pub fn assemble_input(
    claim: &Claim,
    subs: &SubClaimSet,
    selection: &EvidenceSelection,
    budget: ContextBudget,
    mode: DigitMode,
    doc_text: &dyn Fn(&str) -> Option<String>,
) -> Result<AssembledInput> {
    let mut text = claim.text.clone();
    for question in &subs.questions {
        text.push_str(" [Q] ");
        text.push_str(question);
    }
    for evidence in selection.per_sub_claim.iter().flatten() {
        let doc = doc_text(&evidence.doc_id)
            .ok_or_else(|| Error::data(format!("doc '{}' not found in corpus", evidence.doc_id)))?;
        text.push_str(" [EV] ");
        text.push_str(&doc);
    }

    let stream = truncate_to_budget(tokenize(&text, mode), budget);
    Ok(AssembledInput {
        claim_id: claim.claim_id.clone(),
        token_count: stream.len(),
        truncated: stream.truncated,
        text,
        budget,
        mode,
    })
}

/// Tokens of an assembled input, recomputed deterministically from its
/// text, mode, and budget.
pub fn assembled_tokens(input: &AssembledInput) -> crate::tokenize::TokenStream {
    truncate_to_budget(tokenize(&input.text, input.mode), input.budget)
}

/// Token count of the claim-plus-questions prefix (used to check that
/// truncation never eats into the claim section).
pub fn prefix_token_count(claim: &Claim, subs: &SubClaimSet, mode: DigitMode) -> usize {
    let mut text = claim.text.clone();
    for question in &subs.questions {
        text.push_str(" [Q] ");
        text.push_str(question);
    }
    count_tokens(&text, mode)
}
