//! Deterministic word-level tokenization with configurable digit-run
//! grouping and context-budget truncation.
//!
//! Text is lowercased and split on maximal runs of non-alphanumeric
//! characters. Digit runs longer than the group size are then split into
//! fixed-size groups anchored either at the left (`L2R`) or at the right
//! (`R2L`) end of the run, mirroring place-value structure. Right-anchored
//! grouping of `1234567` with group size 3 yields `1 234 567`; left-anchored
//! yields `123 456 7`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How digit runs are segmented into groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    /// Leave digit runs whole.
    #[default]
    None,
    /// Groups anchored at the leftmost digit; the last group may be short.
    L2r,
    /// Groups anchored at the rightmost digit; the first group may be short.
    R2l,
}

impl Grouping {
    pub fn as_str(&self) -> &'static str {
        match self {
            Grouping::None => "none",
            Grouping::L2r => "l2r",
            Grouping::R2l => "r2l",
        }
    }
}

impl std::str::FromStr for Grouping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Grouping::None),
            "l2r" => Ok(Grouping::L2r),
            "r2l" => Ok(Grouping::R2l),
            other => Err(Error::config(format!(
                "unknown digit mode '{other}' (expected none, l2r, or r2l)"
            ))),
        }
    }
}

impl std::fmt::Display for Grouping {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Digit-grouping mode: direction plus group size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitMode {
    pub grouping: Grouping,
    pub group_size: usize,
}

pub const DEFAULT_GROUP_SIZE: usize = 3;

impl DigitMode {
    pub fn new(grouping: Grouping, group_size: usize) -> Result<Self> {
        if group_size == 0 {
            return Err(Error::config("digit group size must be >= 1"));
        }
        Ok(DigitMode {
            grouping,
            group_size,
        })
    }

    pub fn none() -> Self {
        DigitMode {
            grouping: Grouping::None,
            group_size: DEFAULT_GROUP_SIZE,
        }
    }

    pub fn l2r() -> Self {
        DigitMode {
            grouping: Grouping::L2r,
            group_size: DEFAULT_GROUP_SIZE,
        }
    }

    pub fn r2l() -> Self {
        DigitMode {
            grouping: Grouping::R2l,
            group_size: DEFAULT_GROUP_SIZE,
        }
    }
}

impl Default for DigitMode {
    fn default() -> Self {
        DigitMode::none()
    }
}

/// Maximum number of tokens an assembled input may contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContextBudget {
    pub max_tokens: usize,
}

impl ContextBudget {
    pub const SHORT: ContextBudget = ContextBudget { max_tokens: 256 };
    pub const LONG: ContextBudget = ContextBudget { max_tokens: 1024 };

    pub fn new(max_tokens: usize) -> Result<Self> {
        if max_tokens == 0 {
            return Err(Error::config("context budget must be >= 1"));
        }
        Ok(ContextBudget { max_tokens })
    }
}

/// Ordered tokens produced under one digit mode, with a truncation marker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<String>,
    pub mode: DigitMode,
    pub truncated: bool,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Split `text` into tokens under `mode`. Empty text yields an empty stream.
pub fn tokenize(text: &str, mode: DigitMode) -> TokenStream {
    let mut tokens = Vec::new();
    for_each_token(text, mode, |tok| tokens.push(tok.to_string()));
    TokenStream {
        tokens,
        mode,
        truncated: false,
    }
}

/// Token count of `tokenize(text, mode)` without materializing the stream.
pub fn count_tokens(text: &str, mode: DigitMode) -> usize {
    let mut n = 0usize;
    for_each_token(text, mode, |_| n += 1);
    n
}

/// Keep at most `budget.max_tokens` tokens from the head of the stream.
pub fn truncate_to_budget(stream: TokenStream, budget: ContextBudget) -> TokenStream {
    if stream.tokens.len() <= budget.max_tokens {
        return stream;
    }
    let mut tokens = stream.tokens;
    tokens.truncate(budget.max_tokens);
    TokenStream {
        tokens,
        mode: stream.mode,
        truncated: true,
    }
}

/// Core splitter. Lowercases, splits on non-alphanumeric runs, then applies
/// digit grouping to each maximal ASCII-digit run inside a word.
fn for_each_token(text: &str, mode: DigitMode, mut emit: impl FnMut(&str)) {
    let lower = text.to_lowercase();
    for word in lower.split(|c: char| !c.is_alphanumeric()) {
        if word.is_empty() {
            continue;
        }
        emit_word(word, mode, &mut emit);
    }
}

fn emit_word(word: &str, mode: DigitMode, emit: &mut impl FnMut(&str)) {
    if mode.grouping == Grouping::None {
        emit(word);
        return;
    }
    // Walk maximal ASCII-digit runs; split a run only when it exceeds the
    // group size. Non-digit stretches and short runs stay attached to each
    // other so "ab12cd" survives as one token.
    let bytes = word.as_bytes();
    let mut segment_start = 0usize;
    let mut i = 0usize;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let run_start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let run_len = i - run_start;
            if run_len > mode.group_size {
                // Flush whatever preceded the run, then the groups.
                if run_start > segment_start {
                    emit(&word[segment_start..run_start]);
                }
                emit_groups(&word[run_start..i], mode, emit);
                segment_start = i;
            }
        } else {
            i += 1;
        }
    }
    if segment_start < bytes.len() {
        emit(&word[segment_start..]);
    }
}

fn emit_groups(run: &str, mode: DigitMode, emit: &mut impl FnMut(&str)) {
    let g = mode.group_size;
    match mode.grouping {
        Grouping::None => emit(run),
        Grouping::L2r => {
            let mut rest = run;
            while rest.len() > g {
                emit(&rest[..g]);
                rest = &rest[g..];
            }
            emit(rest);
        }
        Grouping::R2l => {
            let head = run.len() % g;
            if head > 0 {
                emit(&run[..head]);
            }
            let mut pos = head;
            while pos < run.len() {
                emit(&run[pos..pos + g]);
                pos += g;
            }
        }
    }
}
