//! Claims dataset and evidence corpus in a normalized JSONL format.
//!
//! Canonical schemas:
//! - claims: `{"claim_id": "...", "text": "...", "label": "True"|"False"|"Conflicting", "split": "train"}`
//!   (`label` optional, absent for test splits)
//! - evidence: `{"doc_id": "...", "text": "..."}`
//!
//! Evidence corpora run to hundreds of thousands of snippets, so
//! [`load_evidence`] streams documents line by line instead of
//! materializing the file.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three-way veracity verdict. Class order is fixed as
/// (True, False, Conflicting) everywhere in the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VeracityLabel {
    True,
    False,
    Conflicting,
}

pub const NUM_CLASSES: usize = 3;

/// All labels, in the fixed class order.
pub const ALL_LABELS: [VeracityLabel; NUM_CLASSES] = [
    VeracityLabel::True,
    VeracityLabel::False,
    VeracityLabel::Conflicting,
];

impl VeracityLabel {
    /// Index into the fixed (True, False, Conflicting) class order.
    pub fn index(self) -> usize {
        match self {
            VeracityLabel::True => 0,
            VeracityLabel::False => 1,
            VeracityLabel::Conflicting => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        ALL_LABELS.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VeracityLabel::True => "True",
            VeracityLabel::False => "False",
            VeracityLabel::Conflicting => "Conflicting",
        }
    }

    /// Case-insensitive parse; anything outside the three-way scheme is an
    /// error (nuanced source verdicts are not re-mapped here).
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "true" => Ok(VeracityLabel::True),
            "false" => Ok(VeracityLabel::False),
            "conflicting" => Ok(VeracityLabel::Conflicting),
            other => Err(Error::data(format!(
                "unknown label '{other}' (expected True, False, or Conflicting)"
            ))),
        }
    }
}

impl std::fmt::Display for VeracityLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "validation" | "val" | "dev" => Ok(Split::Validation),
            "test" => Ok(Split::Test),
            other => Err(Error::data(format!(
                "unknown split '{other}' (expected train, validation, or test)"
            ))),
        }
    }
}

/// A textual claim with an optional gold label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub claim_id: String,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<VeracityLabel>,
    pub split: Split,
}

/// One snippet of the evidence corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceDoc {
    pub doc_id: String,
    pub text: String,
}

/// Label counts and empirical priors over the labeled portion of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDistribution {
    /// Counts in (True, False, Conflicting) order.
    pub counts: [u64; NUM_CLASSES],
    /// `counts[c] / total`, summing to 1.
    pub priors: [f64; NUM_CLASSES],
}

impl LabelDistribution {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

// ---------------------------------------------------------------------------
// Claims
// ---------------------------------------------------------------------------

/// Load every claim in `path`, preserving file order. Fails with a
/// line-numbered error on the first malformed line, unknown label, or
/// duplicate claim id.
pub fn load_claims(path: &Path) -> Result<Vec<Claim>> {
    let file = File::open(path)
        .map_err(|e| Error::data(format!("cannot open claims file {}: {e}", path.display())))?;
    load_claims_from(BufReader::new(file), path)
}

/// [`load_claims`] restricted to one split, order preserved.
pub fn load_claims_for_split(path: &Path, split: Split) -> Result<Vec<Claim>> {
    let mut claims = load_claims(path)?;
    claims.retain(|c| c.split == split);
    Ok(claims)
}

/// Same as [`load_claims`] but over any reader; `origin` labels errors.
pub fn load_claims_from(reader: impl BufRead, origin: &Path) -> Result<Vec<Claim>> {
    #[derive(Deserialize)]
    struct RawClaim {
        claim_id: String,
        text: String,
        #[serde(default)]
        label: Option<String>,
        split: String,
    }

    let mut claims = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line.map_err(|e| Error::data_at(origin, line_no, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawClaim = serde_json::from_str(&line)
            .map_err(|e| Error::data_at(origin, line_no, format!("malformed JSON: {e}")))?;
        if raw.text.trim().is_empty() {
            return Err(Error::data_at(origin, line_no, "claim text is empty"));
        }
        let label = match raw.label {
            Some(s) => Some(
                VeracityLabel::parse(&s)
                    .map_err(|e| Error::data_at(origin, line_no, e.to_string()))?,
            ),
            None => None,
        };
        let split: Split = raw
            .split
            .parse()
            .map_err(|e: Error| Error::data_at(origin, line_no, e.to_string()))?;
        if let Some(first) = seen.insert(raw.claim_id.clone(), line_no) {
            return Err(Error::data_at(
                origin,
                line_no,
                format!(
                    "duplicate claim_id '{}' (first seen on line {first})",
                    raw.claim_id
                ),
            ));
        }
        claims.push(Claim {
            claim_id: raw.claim_id,
            text: raw.text,
            label,
            split,
        });
    }
    Ok(claims)
}

/// Serialize claims back to canonical JSONL, one object per line.
pub fn write_claims(claims: &[Claim], mut out: impl std::io::Write) -> Result<()> {
    for claim in claims {
        serde_json::to_writer(&mut out, claim).map_err(|e| Error::data(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Evidence
// ---------------------------------------------------------------------------

/// Streaming reader over an evidence JSONL file. Yields documents in file
/// order; each line is touched exactly once. Duplicate doc ids are an
/// error naming both offending lines.
pub struct EvidenceReader<R> {
    reader: R,
    origin: PathBuf,
    line_no: u64,
    seen: HashMap<String, u64>,
    buf: String,
}

impl EvidenceReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| {
            Error::data(format!("cannot open evidence file {}: {e}", path.display()))
        })?;
        Ok(EvidenceReader::new(BufReader::new(file), path))
    }
}

impl<R: BufRead> EvidenceReader<R> {
    pub fn new(reader: R, origin: &Path) -> Self {
        EvidenceReader {
            reader,
            origin: origin.to_path_buf(),
            line_no: 0,
            seen: HashMap::new(),
            buf: String::new(),
        }
    }

    /// The underlying reader, for instrumentation in tests.
    pub fn get_ref(&self) -> &R {
        &self.reader
    }

    fn next_doc(&mut self) -> Result<Option<EvidenceDoc>> {
        loop {
            self.buf.clear();
            let n = self.reader.read_line(&mut self.buf)?;
            if n == 0 {
                return Ok(None);
            }
            self.line_no += 1;
            let line = self.buf.trim();
            if line.is_empty() {
                continue;
            }
            let doc: EvidenceDoc = serde_json::from_str(line).map_err(|e| {
                Error::data_at(&self.origin, self.line_no, format!("malformed JSON: {e}"))
            })?;
            if doc.text.trim().is_empty() {
                return Err(Error::data_at(
                    &self.origin,
                    self.line_no,
                    "evidence text is empty",
                ));
            }
            if let Some(first) = self.seen.insert(doc.doc_id.clone(), self.line_no) {
                return Err(Error::data_at(
                    &self.origin,
                    self.line_no,
                    format!(
                        "duplicate doc_id '{}' (first seen on line {first})",
                        doc.doc_id
                    ),
                ));
            }
            return Ok(Some(doc));
        }
    }
}

impl<R: BufRead> Iterator for EvidenceReader<R> {
    type Item = Result<EvidenceDoc>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_doc().transpose()
    }
}

/// Open a streaming handle over the evidence corpus at `path`.
pub fn load_evidence(path: &Path) -> Result<EvidenceReader<BufReader<File>>> {
    EvidenceReader::open(path)
}

/// Collect the whole corpus into memory. Intended for desk-scale fixtures;
/// real corpora should stay on the streaming path.
pub fn load_evidence_all(path: &Path) -> Result<Vec<EvidenceDoc>> {
    load_evidence(path)?.collect()
}

// ---------------------------------------------------------------------------
// Label distribution
// ---------------------------------------------------------------------------

/// Counts and priors over the labeled claims in `claims`. Unlabeled claims
/// are ignored; zero labeled claims is an error.
pub fn label_distribution(claims: &[Claim]) -> Result<LabelDistribution> {
    let mut counts = [0u64; NUM_CLASSES];
    for claim in claims {
        if let Some(label) = claim.label {
            counts[label.index()] += 1;
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::data("no labels present"));
    }
    let mut priors = [0.0; NUM_CLASSES];
    for (p, &c) in priors.iter_mut().zip(&counts) {
        *p = c as f64 / total as f64;
    }
    Ok(LabelDistribution { counts, priors })
}

// ---------------------------------------------------------------------------
// Ingest adapter
// ---------------------------------------------------------------------------

// Field aliases accepted when adapting raw upstream files to the canonical
// schema. The first alias present on a line wins; unmapped fields are
// dropped with a warning.
const CLAIM_ID_ALIASES: [&str; 4] = ["claim_id", "id", "taskid", "uid"];
const CLAIM_TEXT_ALIASES: [&str; 3] = ["text", "claim", "statement"];
const CLAIM_LABEL_ALIASES: [&str; 3] = ["label", "verdict", "rating"];
const DOC_ID_ALIASES: [&str; 3] = ["doc_id", "id", "docid"];
const DOC_TEXT_ALIASES: [&str; 4] = ["text", "evidence", "snippet", "passage"];

/// Outcome of an ingest run: the canonical records plus warnings about
/// fields that were dropped.
pub struct Ingested<T> {
    pub records: Vec<T>,
    pub warnings: Vec<String>,
}

fn take_string(
    obj: &serde_json::Map<String, serde_json::Value>,
    aliases: &[&str],
) -> Option<String> {
    for key in aliases {
        match obj.get(*key) {
            Some(serde_json::Value::String(s)) => return Some(s.clone()),
            Some(serde_json::Value::Number(n)) => return Some(n.to_string()),
            _ => {}
        }
    }
    None
}

/// Adapt a raw claims JSONL file to canonical [`Claim`] records.
/// `default_split` applies to lines without a recognizable split field.
pub fn ingest_claims(
    reader: impl BufRead,
    origin: &Path,
    default_split: Split,
) -> Result<Ingested<Claim>> {
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut dropped: std::collections::BTreeSet<String> = Default::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| Error::data_at(origin, line_no, format!("malformed JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::data_at(origin, line_no, "record is not a JSON object"))?;

        let claim_id = take_string(obj, &CLAIM_ID_ALIASES)
            .ok_or_else(|| Error::data_at(origin, line_no, "no claim id field found"))?;
        let text = take_string(obj, &CLAIM_TEXT_ALIASES)
            .ok_or_else(|| Error::data_at(origin, line_no, "no claim text field found"))?;
        if text.trim().is_empty() {
            return Err(Error::data_at(origin, line_no, "claim text is empty"));
        }
        let label = match take_string(obj, &CLAIM_LABEL_ALIASES) {
            Some(s) => Some(
                VeracityLabel::parse(&s)
                    .map_err(|e| Error::data_at(origin, line_no, e.to_string()))?,
            ),
            None => None,
        };
        let split = match take_string(obj, &["split"]) {
            Some(s) => s
                .parse()
                .map_err(|e: Error| Error::data_at(origin, line_no, e.to_string()))?,
            None => default_split,
        };

        let known: Vec<&str> = CLAIM_ID_ALIASES
            .iter()
            .chain(&CLAIM_TEXT_ALIASES)
            .chain(&CLAIM_LABEL_ALIASES)
            .chain(&["split"])
            .copied()
            .collect();
        for key in obj.keys() {
            if !known.contains(&key.as_str()) {
                dropped.insert(key.clone());
            }
        }

        records.push(Claim {
            claim_id,
            text,
            label,
            split,
        });
    }
    for key in dropped {
        warnings.push(format!("dropped unmapped claim field '{key}'"));
    }
    Ok(Ingested { records, warnings })
}

/// Adapt a raw evidence JSONL file to canonical [`EvidenceDoc`] records.
pub fn ingest_evidence(reader: impl BufRead, origin: &Path) -> Result<Ingested<EvidenceDoc>> {
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    let mut dropped: std::collections::BTreeSet<String> = Default::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| Error::data_at(origin, line_no, format!("malformed JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::data_at(origin, line_no, "record is not a JSON object"))?;
        let doc_id = take_string(obj, &DOC_ID_ALIASES)
            .ok_or_else(|| Error::data_at(origin, line_no, "no doc id field found"))?;
        let text = take_string(obj, &DOC_TEXT_ALIASES)
            .ok_or_else(|| Error::data_at(origin, line_no, "no evidence text field found"))?;
        if text.trim().is_empty() {
            return Err(Error::data_at(origin, line_no, "evidence text is empty"));
        }
        let known: Vec<&str> = DOC_ID_ALIASES
            .iter()
            .chain(&DOC_TEXT_ALIASES)
            .copied()
            .collect();
        for key in obj.keys() {
            if !known.contains(&key.as_str()) {
                dropped.insert(key.clone());
            }
        }
        records.push(EvidenceDoc { doc_id, text });
    }
    for key in dropped {
        warnings.push(format!("dropped unmapped evidence field '{key}'"));
    }
    Ok(Ingested { records, warnings })
}

/// Reader wrapper counting bytes handed out, used to verify single-pass
/// streaming in tests.
pub struct CountingReader<R> {
    inner: R,
    pub bytes_read: u64,
    pub read_calls: u64,
}

impl<R: Read> CountingReader<R> {
    pub fn new(inner: R) -> Self {
        CountingReader {
            inner,
            bytes_read: 0,
            read_calls: 0,
        }
    }
}

impl<R: Read> Read for CountingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        self.read_calls += 1;
        let n = self.inner.read(buf)?;
        self.bytes_read += n as u64;
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn p() -> PathBuf {
        PathBuf::from("test.jsonl")
    }

    #[test]
    fn loads_claims_in_file_order() {
        let input = r#"{"claim_id":"c1","text":"GDP rose 5%","label":"True","split":"train"}
{"claim_id":"c2","text":"Debt doubled","label":"False","split":"train"}
{"claim_id":"c3","text":"Rates fell","label":"Conflicting","split":"validation"}
"#;
        let claims = load_claims_from(Cursor::new(input), &p()).unwrap();
        assert_eq!(claims.len(), 3);
        assert_eq!(claims[0].claim_id, "c1");
        assert_eq!(claims[1].label, Some(VeracityLabel::False));
        assert_eq!(claims[2].split, Split::Validation);
    }

    #[test]
    fn unknown_label_names_line_and_value() {
        let input = r#"{"claim_id":"c1","text":"x","label":"True","split":"train"}
{"claim_id":"c2","text":"y","label":"mostly true","split":"train"}
"#;
        let err = load_claims_from(Cursor::new(input), &p()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("test.jsonl:2"), "{msg}");
        assert!(msg.contains("mostly true"), "{msg}");
    }

    #[test]
    fn empty_file_is_empty_sequence() {
        let claims = load_claims_from(Cursor::new(""), &p()).unwrap();
        assert!(claims.is_empty());
    }

    #[test]
    fn duplicate_claim_id_rejected() {
        let input = r#"{"claim_id":"c1","text":"x","split":"train"}
{"claim_id":"c1","text":"y","split":"train"}
"#;
        let err = load_claims_from(Cursor::new(input), &p()).unwrap_err();
        assert!(err.to_string().contains("duplicate claim_id"), "{err}");
    }

    #[test]
    fn invalid_utf8_is_a_hard_error() {
        let mut bytes = br#"{"claim_id":"c1","text":""#.to_vec();
        bytes.extend_from_slice(&[0xFF, 0xFE]);
        bytes.extend_from_slice(br#"","split":"train"}"#);
        assert!(load_claims_from(Cursor::new(bytes), &p()).is_err());

        let mut doc_bytes = br#"{"doc_id":"d1","text":""#.to_vec();
        doc_bytes.extend_from_slice(&[0xC0, 0x80]);
        doc_bytes.extend_from_slice(b"\"}");
        let result: Result<Vec<_>> = EvidenceReader::new(Cursor::new(doc_bytes), &p()).collect();
        assert!(result.is_err());
    }

    #[test]
    fn split_filter_keeps_order() {
        let input = r#"{"claim_id":"c1","text":"a","split":"train"}
{"claim_id":"c2","text":"b","split":"validation"}
{"claim_id":"c3","text":"c","split":"train"}
"#;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("claims.jsonl");
        std::fs::write(&path, input).unwrap();
        let train = load_claims_for_split(&path, Split::Train).unwrap();
        assert_eq!(train.len(), 2);
        assert_eq!(train[0].claim_id, "c1");
        assert_eq!(train[1].claim_id, "c3");
    }

    #[test]
    fn missing_label_is_allowed() {
        let input = r#"{"claim_id":"t1","text":"test claim","split":"test"}"#;
        let claims = load_claims_from(Cursor::new(input), &p()).unwrap();
        assert_eq!(claims[0].label, None);
    }

    #[test]
    fn claims_round_trip() {
        let input = r#"{"claim_id":"c1","text":"GDP rose 5%","label":"True","split":"train"}
{"claim_id":"t1","text":"unlabeled","split":"test"}
"#;
        let claims = load_claims_from(Cursor::new(input), &p()).unwrap();
        let mut out = Vec::new();
        write_claims(&claims, &mut out).unwrap();
        let reloaded = load_claims_from(Cursor::new(out), &p()).unwrap();
        assert_eq!(claims, reloaded);
    }

    #[test]
    fn streams_evidence_in_order() {
        let lines: String = (0..200)
            .map(|i| format!(r#"{{"doc_id":"d{i}","text":"snippet number {i}"}}"#) + "\n")
            .collect();
        let docs: Result<Vec<_>> = EvidenceReader::new(Cursor::new(lines), &p()).collect();
        let docs = docs.unwrap();
        assert_eq!(docs.len(), 200);
        assert_eq!(docs[7].doc_id, "d7");
    }

    #[test]
    fn duplicate_doc_id_cites_both_lines() {
        let input = r#"{"doc_id":"a","text":"1"}
{"doc_id":"b","text":"2"}
{"doc_id":"c","text":"3"}
{"doc_id":"d","text":"4"}
{"doc_id":"x","text":"5"}
{"doc_id":"e","text":"6"}
{"doc_id":"f","text":"7"}
{"doc_id":"g","text":"8"}
{"doc_id":"x","text":"9"}
"#;
        let result: Result<Vec<_>> = EvidenceReader::new(Cursor::new(input), &p()).collect();
        let msg = result.unwrap_err().to_string();
        assert!(msg.contains("test.jsonl:9"), "{msg}");
        assert!(msg.contains("line 5"), "{msg}");
    }

    #[test]
    fn truncated_final_line_is_parse_error_at_last_line() {
        let input = "{\"doc_id\":\"a\",\"text\":\"one\"}\n{\"doc_id\":\"b\",\"tex";
        let result: Result<Vec<_>> = EvidenceReader::new(Cursor::new(input), &p()).collect();
        let msg = result.unwrap_err().to_string();
        assert!(msg.contains("test.jsonl:2"), "{msg}");
    }

    #[test]
    fn evidence_stream_touches_each_byte_once() {
        let lines: String = (0..50)
            .map(|i| format!(r#"{{"doc_id":"d{i}","text":"snippet {i}"}}"#) + "\n")
            .collect();
        let total = lines.len() as u64;
        let counting = CountingReader::new(Cursor::new(lines));
        let mut reader = EvidenceReader::new(BufReader::new(counting), &p());
        let n = reader.by_ref().count();
        assert_eq!(n, 50);
        assert_eq!(reader.get_ref().get_ref().bytes_read, total);
    }

    #[test]
    fn distribution_arithmetic() {
        let mut claims = Vec::new();
        for (label, n) in [
            (VeracityLabel::True, 2),
            (VeracityLabel::False, 6),
            (VeracityLabel::Conflicting, 2),
        ] {
            for i in 0..n {
                claims.push(Claim {
                    claim_id: format!("{label}-{i}"),
                    text: "x".into(),
                    label: Some(label),
                    split: Split::Train,
                });
            }
        }
        let dist = label_distribution(&claims).unwrap();
        assert_eq!(dist.counts, [2, 6, 2]);
        assert_eq!(dist.priors, [0.2, 0.6, 0.2]);
    }

    #[test]
    fn distribution_matches_task_scale_priors() {
        // Counts proportional to the published task label distribution
        // (18.79% / 57.93% / 23.27%) over ~10k claims.
        let mut claims = Vec::new();
        for (label, n) in [
            (VeracityLabel::True, 1879),
            (VeracityLabel::False, 5793),
            (VeracityLabel::Conflicting, 2327),
        ] {
            for i in 0..n {
                claims.push(Claim {
                    claim_id: format!("{label}-{i}"),
                    text: "x".into(),
                    label: Some(label),
                    split: Split::Train,
                });
            }
        }
        let dist = label_distribution(&claims).unwrap();
        let expected = [0.1879, 0.5793, 0.2327];
        for (p, e) in dist.priors.iter().zip(expected) {
            assert!((p - e).abs() < 0.0005, "prior {p} vs {e}");
        }
        let sum: f64 = dist.priors.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn all_unlabeled_is_an_error() {
        let claims: Vec<Claim> = (0..10)
            .map(|i| Claim {
                claim_id: format!("c{i}"),
                text: "x".into(),
                label: None,
                split: Split::Test,
            })
            .collect();
        let err = label_distribution(&claims).unwrap_err();
        assert!(err.to_string().contains("no labels present"));
    }

    #[test]
    fn ingest_maps_aliases_and_warns_on_dropped_fields() {
        let input =
            r#"{"taskid":"q1","claim":"X spent 5 million","verdict":"False","country":"us"}"#;
        let out = ingest_claims(Cursor::new(input), &p(), Split::Train).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].claim_id, "q1");
        assert_eq!(out.records[0].text, "X spent 5 million");
        assert_eq!(out.records[0].label, Some(VeracityLabel::False));
        assert_eq!(out.records[0].split, Split::Train);
        assert_eq!(out.warnings, ["dropped unmapped claim field 'country'"]);
    }

    #[test]
    fn ingest_evidence_aliases() {
        let input = r#"{"id":"e1","snippet":"the budget was 3 billion","url":"http://x"}"#;
        let out = ingest_evidence(Cursor::new(input), &p()).unwrap();
        assert_eq!(out.records[0].doc_id, "e1");
        assert_eq!(out.records[0].text, "the budget was 3 billion");
        assert_eq!(out.warnings.len(), 1);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // Loaded claims survive a serialize/reload cycle unchanged,
            // whatever the text contents.
            #[test]
            fn claims_round_trip_any_text(
                texts in proptest::collection::vec("\\PC{1,60}", 1..8),
                labels in proptest::collection::vec(proptest::option::of(0usize..3), 1..8),
            ) {
                let claims: Vec<Claim> = texts
                    .iter()
                    .zip(&labels)
                    .filter(|(t, _)| !t.trim().is_empty())
                    .enumerate()
                    .map(|(i, (text, label))| Claim {
                        claim_id: format!("c{i}"),
                        text: text.clone(),
                        label: label.and_then(VeracityLabel::from_index),
                        split: Split::Train,
                    })
                    .collect();
                prop_assume!(!claims.is_empty());
                let mut buffer = Vec::new();
                write_claims(&claims, &mut buffer).unwrap();
                let reloaded = load_claims_from(Cursor::new(buffer), &p()).unwrap();
                prop_assert_eq!(claims, reloaded);
            }

            // Priors sum to 1 for any non-empty labeled input.
            #[test]
            fn priors_sum_to_one(counts in proptest::collection::vec(0u64..500, 3)) {
                prop_assume!(counts.iter().sum::<u64>() > 0);
                let mut claims = Vec::new();
                for (ci, &n) in counts.iter().enumerate() {
                    for i in 0..n {
                        claims.push(Claim {
                            claim_id: format!("{ci}-{i}"),
                            text: "x".into(),
                            label: VeracityLabel::from_index(ci),
                            split: Split::Train,
                        });
                    }
                }
                let dist = label_distribution(&claims).unwrap();
                let sum: f64 = dist.priors.iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-9);
            }
        }
    }
}
