//! Okapi BM25 retrieval over an inverted index.
//!
//! Scoring follows the Okapi formulation with the smoothed
//! `idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))`, which stays non-negative
//! for terms appearing in every document. Corpus and queries are tokenized
//! with digit grouping disabled so the retrieval stage is held fixed while
//! the classifier-side tokenization is ablated.
//!
//! The index is immutable after build and safe to share across threads.
//! Serialization is canonical (documents sorted by id, postings sorted by
//! term then document), so permuting the input corpus produces a
//! byte-identical segment file.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::EvidenceDoc;
use crate::error::{Error, Result};
use crate::tokenize::{tokenize, DigitMode};

/// Okapi BM25 parameters: `k1` controls term-frequency saturation, `b`
/// controls document-length normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if self.k1.is_nan() || self.k1 < 0.0 {
            return Err(Error::config(format!("k1 must be >= 0, got {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::config(format!(
                "b must be in [0, 1], got {}",
                self.b
            )));
        }
        Ok(())
    }
}

/// Options applied when tokenizing corpus and query text for retrieval.
/// Both default to off: numerical claims hinge on exact tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct TextOptions {
    pub remove_stopwords: bool,
    pub light_stemming: bool,
}

const STOPWORDS: [&str; 32] = [
    "a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "has", "he", "in", "is", "it",
    "its", "of", "on", "or", "she", "that", "the", "this", "to", "was", "were", "will", "with",
    "they", "their", "but", "not",
];

/// Light suffix stemmer: plural/-ed/-ing stripping only.
fn light_stem(token: &str) -> &str {
    for suffix in ["ing", "ed", "es", "s"] {
        if let Some(stripped) = token.strip_suffix(suffix) {
            // Keep at least three characters so short words survive.
            if stripped.len() >= 3 {
                return stripped;
            }
        }
    }
    token
}

/// Retrieval-side tokenization: digit grouping disabled, optional
/// stopword/stemming filters.
pub fn retrieval_tokens(text: &str, opts: TextOptions) -> Vec<String> {
    tokenize(text, DigitMode::none())
        .tokens
        .into_iter()
        .filter(|t| !opts.remove_stopwords || !STOPWORDS.contains(&t.as_str()))
        .map(|t| {
            if opts.light_stemming {
                light_stem(&t).to_string()
            } else {
                t
            }
        })
        .collect()
}

/// An evidence snippet annotated with retrieval state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredEvidence {
    pub doc_id: String,
    pub bm25_score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rerank_score: Option<f64>,
    /// Which of the (up to three) sub-claims retrieved this snippet.
    pub sub_claim_index: usize,
}

/// Immutable BM25 inverted index.
///
/// Documents are stored in ascending `doc_id` order; internal document
/// numbers are positions in that order, so ascending internal order is
/// ascending id order and the tie-break rule falls out of the layout.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    doc_ids: Vec<String>,
    doc_lengths: Vec<u32>,
    postings: Vec<(String, Vec<(u32, u32)>)>,
    term_slots: HashMap<String, usize>,
    doc_count: u64,
    avg_doc_length: f64,
    params: Bm25Params,
    text_options: TextOptions,
}

/// Summary stats written to the `stats.json` sidecar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexStats {
    #[serde(rename = "N")]
    pub n: u64,
    pub avgdl: f64,
    pub k1: f64,
    pub b: f64,
}

impl InvertedIndex {
    pub fn doc_count(&self) -> u64 {
        self.doc_count
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn text_options(&self) -> TextOptions {
        self.text_options
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    /// Document frequency of a term.
    pub fn doc_freq(&self, term: &str) -> u64 {
        self.term_slots
            .get(term)
            .map(|&slot| self.postings[slot].1.len() as u64)
            .unwrap_or(0)
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            n: self.doc_count,
            avgdl: self.avg_doc_length,
            k1: self.params.k1,
            b: self.params.b,
        }
    }

    /// Smoothed inverse document frequency; non-negative for all df <= N.
    pub fn idf(&self, term: &str) -> f64 {
        let df = self.doc_freq(term) as f64;
        let n = self.doc_count as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }
}

/// Build an index over `corpus`. Documents may arrive in any order; the
/// result is canonical. An empty corpus is an error.
pub fn build_index<I>(corpus: I, params: Bm25Params) -> Result<InvertedIndex>
where
    I: IntoIterator<Item = Result<EvidenceDoc>>,
{
    build_index_with(corpus, params, TextOptions::default())
}

pub fn build_index_with<I>(
    corpus: I,
    params: Bm25Params,
    text_options: TextOptions,
) -> Result<InvertedIndex>
where
    I: IntoIterator<Item = Result<EvidenceDoc>>,
{
    params.validate()?;

    // Tokenize as documents stream past, then canonicalize by doc_id.
    let mut docs: Vec<(String, Vec<String>)> = Vec::new();
    for doc in corpus {
        let doc = doc?;
        let tokens = retrieval_tokens(&doc.text, text_options);
        docs.push((doc.doc_id, tokens));
    }
    if docs.is_empty() {
        return Err(Error::data("cannot build index over an empty corpus"));
    }
    docs.sort_by(|a, b| a.0.cmp(&b.0));

    let mut doc_ids = Vec::with_capacity(docs.len());
    let mut doc_lengths = Vec::with_capacity(docs.len());
    let mut term_postings: HashMap<String, Vec<(u32, u32)>> = HashMap::new();
    for (internal, (doc_id, tokens)) in docs.into_iter().enumerate() {
        let mut tf: HashMap<String, u32> = HashMap::new();
        for token in &tokens {
            *tf.entry(token.clone()).or_insert(0) += 1;
        }
        doc_lengths.push(tokens.len() as u32);
        doc_ids.push(doc_id);
        for (term, count) in tf {
            term_postings
                .entry(term)
                .or_default()
                .push((internal as u32, count));
        }
    }

    let mut postings: Vec<(String, Vec<(u32, u32)>)> = term_postings.into_iter().collect();
    postings.sort_by(|a, b| a.0.cmp(&b.0));
    for (_, list) in postings.iter_mut() {
        list.sort_by_key(|&(doc, _)| doc);
    }
    let term_slots = postings
        .iter()
        .enumerate()
        .map(|(slot, (term, _))| (term.clone(), slot))
        .collect();

    let doc_count = doc_ids.len() as u64;
    let avg_doc_length = doc_lengths.iter().map(|&l| l as f64).sum::<f64>() / doc_count as f64;

    Ok(InvertedIndex {
        doc_ids,
        doc_lengths,
        postings,
        term_slots,
        doc_count,
        avg_doc_length,
        params,
        text_options,
    })
}

/// Top-`k` documents for `query` by BM25 score, descending, ties broken by
/// ascending doc id. Documents scoring zero are not hits, so fewer than `k`
/// results may come back.
pub fn search(index: &InvertedIndex, query: &str, k: usize) -> Result<Vec<ScoredEvidence>> {
    if k == 0 {
        return Err(Error::config("search k must be >= 1"));
    }
    if index.doc_count == 0 {
        return Err(Error::data("index is empty"));
    }

    let query_tokens = retrieval_tokens(query, index.text_options);
    let mut scores: HashMap<u32, f64> = HashMap::new();
    // Accumulate per document in query-term order so summation order is
    // identical to a per-document brute-force evaluation.
    for term in &query_tokens {
        let Some(&slot) = index.term_slots.get(term) else {
            continue;
        };
        let idf = index.idf(term);
        let k1 = index.params.k1;
        let b = index.params.b;
        for &(doc, tf) in &index.postings[slot].1 {
            let tf = tf as f64;
            let len_norm =
                1.0 - b + b * index.doc_lengths[doc as usize] as f64 / index.avg_doc_length;
            let contribution = idf * tf * (k1 + 1.0) / (tf + k1 * len_norm);
            *scores.entry(doc).or_insert(0.0) += contribution;
        }
    }

    let mut hits: Vec<(u32, f64)> = scores.into_iter().filter(|&(_, s)| s > 0.0).collect();
    hits.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    hits.truncate(k);

    Ok(hits
        .into_iter()
        .map(|(doc, score)| ScoredEvidence {
            doc_id: index.doc_ids[doc as usize].clone(),
            bm25_score: score,
            rerank_score: None,
            sub_claim_index: 0,
        })
        .collect())
}

/// Score every document against `query` without the index structure.
/// Test oracle for [`search`]; keep the arithmetic expression identical.
pub fn brute_force_scores(
    docs: &[EvidenceDoc],
    query: &str,
    params: Bm25Params,
    text_options: TextOptions,
) -> Vec<(String, f64)> {
    let tokenized: Vec<(String, Vec<String>)> = docs
        .iter()
        .map(|d| (d.doc_id.clone(), retrieval_tokens(&d.text, text_options)))
        .collect();
    let n = tokenized.len() as f64;
    let avgdl = tokenized.iter().map(|(_, t)| t.len() as f64).sum::<f64>() / n;
    let query_tokens = retrieval_tokens(query, text_options);

    let mut out = Vec::new();
    for (doc_id, tokens) in &tokenized {
        let mut score = 0.0;
        for term in &query_tokens {
            let tf = tokens.iter().filter(|t| *t == term).count() as f64;
            if tf == 0.0 {
                continue;
            }
            let df = tokenized
                .iter()
                .filter(|(_, toks)| toks.iter().any(|t| t == term))
                .count() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            let len_norm = 1.0 - params.b + params.b * tokens.len() as f64 / avgdl;
            score += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * len_norm);
        }
        if score > 0.0 {
            out.push((doc_id.clone(), score));
        }
    }
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    out
}

// ---------------------------------------------------------------------------
// Persistence: versioned binary segment + JSON stats sidecar
// ---------------------------------------------------------------------------

const SEGMENT_MAGIC: &[u8; 4] = b"QCIX";
const SEGMENT_VERSION: u32 = 1;
pub const SEGMENT_FILE: &str = "segment.bin";
pub const STATS_FILE: &str = "stats.json";

fn write_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_u64(w: &mut impl Write, v: u64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn write_str(w: &mut impl Write, s: &str) -> Result<()> {
    write_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_str(r: &mut impl Read) -> Result<String> {
    let len = read_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::data(format!("segment string not UTF-8: {e}")))
}

impl InvertedIndex {
    /// Write `segment.bin` and `stats.json` into `dir`, creating it if
    /// needed. The byte layout is canonical.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join(SEGMENT_FILE))?);
        w.write_all(SEGMENT_MAGIC)?;
        write_u32(&mut w, SEGMENT_VERSION)?;
        write_u64(&mut w, self.doc_count)?;
        write_f64(&mut w, self.avg_doc_length)?;
        write_f64(&mut w, self.params.k1)?;
        write_f64(&mut w, self.params.b)?;
        write_u32(&mut w, self.text_options.remove_stopwords as u32)?;
        write_u32(&mut w, self.text_options.light_stemming as u32)?;
        for (doc_id, len) in self.doc_ids.iter().zip(&self.doc_lengths) {
            write_str(&mut w, doc_id)?;
            write_u32(&mut w, *len)?;
        }
        write_u64(&mut w, self.postings.len() as u64)?;
        for (term, list) in &self.postings {
            write_str(&mut w, term)?;
            write_u32(&mut w, list.len() as u32)?;
            for &(doc, tf) in list {
                write_u32(&mut w, doc)?;
                write_u32(&mut w, tf)?;
            }
        }
        w.flush()?;

        let stats =
            serde_json::to_string_pretty(&self.stats()).map_err(|e| Error::data(e.to_string()))?;
        std::fs::write(dir.join(STATS_FILE), stats + "\n")?;
        Ok(())
    }

    /// Load an index previously written by [`InvertedIndex::save`].
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(SEGMENT_FILE);
        let file = std::fs::File::open(&path).map_err(|e| {
            Error::data(format!(
                "cannot open index segment {} (run `index` first): {e}",
                path.display()
            ))
        })?;
        let mut r = std::io::BufReader::new(file);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != SEGMENT_MAGIC {
            return Err(Error::data("not an index segment file (bad magic)"));
        }
        let version = read_u32(&mut r)?;
        if version != SEGMENT_VERSION {
            return Err(Error::data(format!(
                "unsupported segment version {version} (expected {SEGMENT_VERSION})"
            )));
        }
        let doc_count = read_u64(&mut r)?;
        let avg_doc_length = read_f64(&mut r)?;
        let params = Bm25Params {
            k1: read_f64(&mut r)?,
            b: read_f64(&mut r)?,
        };
        let text_options = TextOptions {
            remove_stopwords: read_u32(&mut r)? != 0,
            light_stemming: read_u32(&mut r)? != 0,
        };
        let mut doc_ids = Vec::with_capacity(doc_count as usize);
        let mut doc_lengths = Vec::with_capacity(doc_count as usize);
        for _ in 0..doc_count {
            doc_ids.push(read_str(&mut r)?);
            doc_lengths.push(read_u32(&mut r)?);
        }
        let term_count = read_u64(&mut r)?;
        let mut postings: Vec<(String, Vec<(u32, u32)>)> = Vec::with_capacity(term_count as usize);
        for _ in 0..term_count {
            let term = read_str(&mut r)?;
            let len = read_u32(&mut r)? as usize;
            let mut list = Vec::with_capacity(len);
            for _ in 0..len {
                let doc = read_u32(&mut r)?;
                let tf = read_u32(&mut r)?;
                list.push((doc, tf));
            }
            postings.push((term, list));
        }
        let term_slots = postings
            .iter()
            .enumerate()
            .map(|(slot, (term, _))| (term.clone(), slot))
            .collect();
        Ok(InvertedIndex {
            doc_ids,
            doc_lengths,
            postings,
            term_slots,
            doc_count,
            avg_doc_length,
            params,
            text_options,
        })
    }
}
