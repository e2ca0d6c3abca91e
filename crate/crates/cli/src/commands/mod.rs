//! Subcommand implementations. Shared helpers live here; each stage reads
//! the previous stage's artifact and names the producing subcommand when
//! it is missing.

pub mod ablate;
pub mod assemble;
pub mod decompose;
pub mod evaluate;
pub mod index;
pub mod ingest;
pub mod predict;
pub mod report;
pub mod retrieve;
pub mod search;
pub mod train;

use std::collections::HashMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use quantcheck_core::config::{PipelineConfig, ScorerKind};
use quantcheck_core::corpus::{self, Claim};
use quantcheck_core::decompose::{DecomposeCache, Decomposer, HttpLlmClient};
use quantcheck_core::rerank::{AssembledInput, HttpCrossEncoder, LexicalOverlapScorer, PairScorer};
use quantcheck_core::retrieval::ScoredEvidence;
use quantcheck_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// One line of the retrieve artifact: a claim's questions and the BM25
/// candidates for each.
#[derive(Debug, Serialize, Deserialize)]
pub struct RetrievedClaim {
    pub claim_id: String,
    pub questions: [String; 3],
    pub candidates: Vec<Vec<ScoredEvidence>>,
}

/// One line of the predictions artifact.
#[derive(Debug, Serialize, Deserialize)]
pub struct Prediction {
    pub claim_id: String,
    pub label: String,
    pub probs: ProbMap,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProbMap {
    #[serde(rename = "True")]
    pub true_: f64,
    #[serde(rename = "False")]
    pub false_: f64,
    #[serde(rename = "Conflicting")]
    pub conflicting: f64,
}

pub fn candidates_path(config: &PipelineConfig) -> PathBuf {
    config.reports_dir.join("candidates.jsonl")
}

pub fn assembled_path(config: &PipelineConfig) -> PathBuf {
    config.reports_dir.join("assembled.jsonl")
}

pub fn predictions_path(config: &PipelineConfig) -> PathBuf {
    config.reports_dir.join("predictions.jsonl")
}

pub fn metrics_path(config: &PipelineConfig) -> PathBuf {
    config.reports_dir.join("metrics.json")
}

pub fn ablation_path(config: &PipelineConfig) -> PathBuf {
    config.reports_dir.join("ablation.json")
}

pub fn load_claims(config: &PipelineConfig) -> Result<Vec<Claim>> {
    corpus::load_claims(&config.claims)
}

/// Doc id -> text map for assembly-time lookup.
pub fn load_doc_texts(config: &PipelineConfig) -> Result<HashMap<String, String>> {
    let mut texts = HashMap::new();
    for doc in corpus::load_evidence(&config.evidence)? {
        let doc = doc?;
        texts.insert(doc.doc_id, doc.text);
    }
    Ok(texts)
}

/// Open a stage artifact, pointing at the producing subcommand if absent.
pub fn open_artifact(path: &Path, produced_by: &str) -> Result<std::io::BufReader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| {
        Error::data(format!(
            "missing artifact {} (run `{produced_by}` first): {e}",
            path.display()
        ))
    })?;
    Ok(std::io::BufReader::new(file))
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(
    reader: impl BufRead,
    origin: &Path,
) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| Error::data_at(origin, idx as u64 + 1, format!("malformed JSON: {e}")))?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(records: &[T], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut out = Vec::new();
    for record in records {
        let line = serde_json::to_string(record).map_err(|e| Error::data(e.to_string()))?;
        out.extend_from_slice(line.as_bytes());
        out.push(b'\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// The configured pair scorer. The HTTP scorer is refused offline.
pub fn build_scorer(config: &PipelineConfig) -> Result<Box<dyn PairScorer>> {
    match config.scorer {
        ScorerKind::LexicalOracle => Ok(Box::new(LexicalOverlapScorer)),
        ScorerKind::HttpCrossEncoder => {
            if config.offline {
                return Err(Error::config(
                    "http-cross-encoder scorer conflicts with --offline",
                ));
            }
            let base_url = config
                .reranker_url
                .clone()
                .ok_or_else(|| Error::config("http-cross-encoder scorer needs RERANKER_URL"))?;
            Ok(Box::new(HttpCrossEncoder {
                base_url,
                token: config.reranker_token.clone(),
                policy: config.http_policy(),
            }))
        }
    }
}

/// The configured LLM client; `None` offline or when no endpoint is set.
pub fn build_llm_client(config: &PipelineConfig) -> Option<HttpLlmClient> {
    if config.offline {
        return None;
    }
    config.llm_url.as_ref().map(|url| HttpLlmClient {
        base_url: url.clone(),
        api_key: config.llm_api_key.clone(),
        model: config.llm_model.clone(),
        policy: config.http_policy(),
    })
}

/// Decompose every claim through the cache/client/fallback policy and
/// persist the cache.
pub fn decompose_claims(
    config: &PipelineConfig,
    claims: &[Claim],
) -> Result<Vec<quantcheck_core::decompose::SubClaimSet>> {
    let cache = DecomposeCache::load(&config.cache)?;
    let client = build_llm_client(config);
    let decomposer = Decomposer {
        cache: &cache,
        client: client
            .as_ref()
            .map(|c| c as &dyn quantcheck_core::decompose::LlmClient),
        prompt: config.decompose_prompt()?,
        offline: config.offline,
        max_in_flight: config.max_in_flight,
    };
    let sets = decomposer.decompose_all(claims)?;
    cache.save(&config.cache)?;
    Ok(sets)
}

/// Read the assemble artifact, checking it matches the active mode/budget.
pub fn load_assembled(config: &PipelineConfig) -> Result<Vec<AssembledInput>> {
    let path = assembled_path(config);
    let reader = open_artifact(&path, "assemble")?;
    let inputs: Vec<AssembledInput> = read_jsonl(reader, &path)?;
    let mode = config.digit_mode()?;
    let budget = config.context_budget()?;
    for input in &inputs {
        if input.mode != mode || input.budget != budget {
            return Err(Error::config(format!(
                "assembled artifact was built with mode {}/budget {} but the active config says {}/{}; re-run `assemble`",
                input.mode.grouping,
                input.budget.max_tokens,
                mode.grouping,
                budget.max_tokens
            )));
        }
    }
    Ok(inputs)
}
