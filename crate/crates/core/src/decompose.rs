//! Claim decomposition: every claim becomes exactly three yes/no
//! sub-questions, produced by an external LLM, a cache hit, or a
//! deterministic offline fallback.
//!
//! The LLM request pins the sampling parameters (temperature 0.3,
//! frequency penalty 0.6, presence penalty 0.8, max tokens 300) unless
//! overridden in config. Responses drift in shape, so the parser accepts
//! numbered or bulleted lines and enforces exactly-three by padding with
//! fallback questions or truncating extras. The fallback path keeps the
//! whole pipeline runnable offline and byte-deterministic.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::corpus::Claim;
use crate::error::{Error, Result};
use crate::http::{bounded_map, post_json, HttpPolicy};

/// Where a decomposition came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Llm,
    Cache,
    Fallback,
}

/// Exactly three sub-questions for one claim; each ends with `?`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubClaimSet {
    pub claim_id: String,
    pub questions: [String; 3],
    pub source: Source,
}

/// Prompt template and sampling parameters for the decomposition call.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecomposePrompt {
    /// Must contain a `{claim}` slot.
    pub template: String,
    pub temperature: f64,
    pub frequency_penalty: f64,
    pub presence_penalty: f64,
    pub max_tokens: u32,
}

impl Default for DecomposePrompt {
    fn default() -> Self {
        DecomposePrompt {
            template: "Decompose the claim into three yes/no questions, one per line, \
                       each answerable from a short evidence snippet.\nClaim: {claim}"
                .to_string(),
            temperature: 0.3,
            frequency_penalty: 0.6,
            presence_penalty: 0.8,
            max_tokens: 300,
        }
    }
}

impl DecomposePrompt {
    pub fn render(&self, claim_text: &str) -> String {
        self.template.replace("{claim}", claim_text)
    }
}

/// A chat-completions style text generator.
pub trait LlmClient: Sync {
    fn identity(&self) -> &str;

    /// Send one prompt, get the raw completion text back.
    fn complete(&self, prompt: &str, params: &DecomposePrompt) -> Result<String>;
}

/// HTTP client for a chat-completions endpoint.
///
/// Wire contract: POST to `base_url` with
/// `{"model", "temperature", "frequency_penalty", "presence_penalty",
///   "max_tokens", "messages": [{"role": "user", "content": ...}]}`;
/// the reply must carry the text at `choices[0].message.content`.
pub struct HttpLlmClient {
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: String,
    pub policy: HttpPolicy,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    temperature: f64,
    frequency_penalty: f64,
    presence_penalty: f64,
    max_tokens: u32,
    messages: Vec<ChatMessage<'a>>,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    content: String,
}

impl LlmClient for HttpLlmClient {
    fn identity(&self) -> &str {
        "llm"
    }

    fn complete(&self, prompt: &str, params: &DecomposePrompt) -> Result<String> {
        let request = ChatRequest {
            model: &self.model,
            temperature: params.temperature,
            frequency_penalty: params.frequency_penalty,
            presence_penalty: params.presence_penalty,
            max_tokens: params.max_tokens,
            messages: vec![ChatMessage {
                role: "user",
                content: prompt,
            }],
        };
        let response: ChatResponse = post_json(
            self.identity(),
            &self.base_url,
            self.api_key.as_deref(),
            &request,
            &self.policy,
        )?;
        response
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| Error::service(self.identity(), "response carried no choices"))
    }
}

// ---------------------------------------------------------------------------
// Response parsing and the fallback rule
// ---------------------------------------------------------------------------

/// Strip list markers like `1.`, `2)`, `-`, `*`, `•` from a line.
fn strip_enumeration(line: &str) -> &str {
    let trimmed = line.trim();
    let without_bullet = trimmed
        .strip_prefix(['-', '*', '•'])
        .map(str::trim_start)
        .unwrap_or(trimmed);
    // Numbered forms: digits followed by '.' or ')'.
    let digits_end = without_bullet
        .find(|c: char| !c.is_ascii_digit())
        .unwrap_or(without_bullet.len());
    if digits_end > 0 {
        let rest = &without_bullet[digits_end..];
        if let Some(tail) = rest.strip_prefix(['.', ')']) {
            return tail.trim_start();
        }
    }
    without_bullet
}

fn ensure_question(mut line: String) -> String {
    if !line.ends_with('?') {
        line.push('?');
    }
    line
}

/// Parse a raw completion into exactly three questions, padding from the
/// claim's fallback questions or truncating extras.
pub fn parse_decomposition(raw: &str, claim: &Claim) -> Result<[String; 3]> {
    let mut questions: Vec<String> = raw
        .lines()
        .map(strip_enumeration)
        .filter(|l| !l.is_empty())
        .map(|l| ensure_question(l.to_string()))
        .collect();
    if questions.is_empty() {
        return Err(Error::data(format!(
            "unparseable decomposition for claim '{}': {raw:?}",
            claim.claim_id
        )));
    }
    questions.truncate(3);
    let fallback = fallback_questions(&claim.text);
    while questions.len() < 3 {
        questions.push(fallback[questions.len().min(2)].clone());
    }
    Ok([
        questions[0].clone(),
        questions[1].clone(),
        questions[2].clone(),
    ])
}

/// Deterministic offline decomposition: split the claim on clause
/// boundaries into at most three spans, reframe each as a yes/no question,
/// and repeat the whole-claim question when spans run short.
pub fn fallback_decompose(claim: &Claim) -> SubClaimSet {
    SubClaimSet {
        claim_id: claim.claim_id.clone(),
        questions: fallback_questions(&claim.text),
        source: Source::Fallback,
    }
}

fn fallback_questions(claim_text: &str) -> [String; 3] {
    let spans: Vec<&str> = claim_text
        .split([',', ';', '.', '!', '?'])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .take(3)
        .collect();
    let whole = format!(
        "Is it true that {}?",
        claim_text.trim().trim_end_matches('.')
    );
    let question = |i: usize| -> String {
        match spans.get(i) {
            Some(span) if spans.len() > 1 => format!("Is it true that {span}?"),
            _ => whole.clone(),
        }
    };
    [question(0), question(1), question(2)]
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

/// Append-only JSONL cache of decompositions, keyed by claim id.
/// Write-once: re-storing the same questions is a no-op, storing different
/// questions for a cached id is an error.
#[derive(Debug)]
pub struct DecomposeCache {
    entries: Mutex<HashMap<String, SubClaimSet>>,
}

impl DecomposeCache {
    pub fn empty() -> Self {
        DecomposeCache {
            entries: Mutex::new(HashMap::new()),
        }
    }

    /// Load a cache file; a missing file is an empty cache.
    pub fn load(path: &Path) -> Result<Self> {
        let cache = DecomposeCache::empty();
        let file = match std::fs::File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(cache),
            Err(e) => return Err(e.into()),
        };
        let reader = std::io::BufReader::new(file);
        let mut entries = cache.entries.lock().unwrap();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx as u64 + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: SubClaimSet = serde_json::from_str(&line)
                .map_err(|e| Error::data_at(path, line_no, format!("malformed JSON: {e}")))?;
            match entries.get(&entry.claim_id) {
                Some(existing) if existing.questions != entry.questions => {
                    return Err(Error::data_at(
                        path,
                        line_no,
                        format!(
                            "conflicting duplicate cache entry for claim_id '{}'",
                            entry.claim_id
                        ),
                    ));
                }
                // Identical duplicates are accepted and deduplicated.
                Some(_) => {}
                None => {
                    entries.insert(entry.claim_id.clone(), entry);
                }
            }
        }
        drop(entries);
        Ok(cache)
    }

    pub fn get(&self, claim_id: &str) -> Option<SubClaimSet> {
        self.entries
            .lock()
            .unwrap()
            .get(claim_id)
            .map(|e| SubClaimSet {
                source: Source::Cache,
                ..e.clone()
            })
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Insert in memory; error if the id is cached with different questions.
    pub fn insert(&self, entry: SubClaimSet) -> Result<()> {
        let mut entries = self.entries.lock().unwrap();
        match entries.get(&entry.claim_id) {
            Some(existing) if existing.questions != entry.questions => Err(Error::data(format!(
                "conflicting decomposition for cached claim_id '{}'",
                entry.claim_id
            ))),
            Some(_) => Ok(()),
            None => {
                entries.insert(entry.claim_id.clone(), entry);
                Ok(())
            }
        }
    }

    /// Write every entry as JSONL, sorted by claim id for stable bytes.
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let entries = self.entries.lock().unwrap();
        let mut sorted: Vec<&SubClaimSet> = entries.values().collect();
        sorted.sort_by(|a, b| a.claim_id.cmp(&b.claim_id));
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for entry in sorted {
            serde_json::to_writer(&mut out, entry).map_err(|e| Error::data(e.to_string()))?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Decomposer
// ---------------------------------------------------------------------------

/// Cache-first decomposition driver. In offline mode the client is never
/// consulted; uncached claims take the fallback path.
pub struct Decomposer<'a> {
    pub cache: &'a DecomposeCache,
    pub client: Option<&'a dyn LlmClient>,
    pub prompt: DecomposePrompt,
    pub offline: bool,
    pub max_in_flight: usize,
}

impl<'a> Decomposer<'a> {
    /// Decompose one claim. Cache wins; then the LLM (online, client
    /// configured); then the fallback (offline only). Online without a
    /// client is a config error.
    pub fn decompose(&self, claim: &Claim) -> Result<SubClaimSet> {
        if claim.text.trim().is_empty() {
            return Err(Error::data(format!(
                "claim '{}' has empty text",
                claim.claim_id
            )));
        }
        if let Some(cached) = self.cache.get(&claim.claim_id) {
            return Ok(cached);
        }
        if self.offline {
            let set = fallback_decompose(claim);
            self.cache.insert(set.clone())?;
            return Ok(set);
        }
        let client = self.client.ok_or_else(|| {
            Error::config("no LLM client configured; pass --offline to use the fallback")
        })?;
        let raw = client.complete(&self.prompt.render(&claim.text), &self.prompt)?;
        let questions = parse_decomposition(&raw, claim)?;
        let set = SubClaimSet {
            claim_id: claim.claim_id.clone(),
            questions,
            source: Source::Llm,
        };
        self.cache.insert(set.clone())?;
        Ok(set)
    }

    /// Decompose many claims with bounded fan-out; output order matches
    /// input order.
    pub fn decompose_all(&self, claims: &[Claim]) -> Result<Vec<SubClaimSet>> {
        bounded_map(claims, self.max_in_flight, |claim| self.decompose(claim))
    }
}

/// An [`LlmClient`] wrapper that counts calls; used to assert that offline
/// runs never reach the network path.
pub struct RecordingClient<C> {
    pub inner: C,
    pub calls: AtomicUsize,
}

impl<C> RecordingClient<C> {
    pub fn new(inner: C) -> Self {
        RecordingClient {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<C: LlmClient> LlmClient for RecordingClient<C> {
    fn identity(&self) -> &str {
        self.inner.identity()
    }

    fn complete(&self, prompt: &str, params: &DecomposePrompt) -> Result<String> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.complete(prompt, params)
    }
}
