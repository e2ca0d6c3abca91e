//! Shared input generators for the criterion benchmarks in `benches/`.

use quantcheck_core::corpus::EvidenceDoc;

/// Deterministic xorshift, reused across bench inputs.
pub struct BenchRng(pub u64);

impl BenchRng {
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }
}

const WORDS: [&str; 24] = [
    "budget", "deficit", "tax", "spending", "grew", "fell", "percent", "million", "billion",
    "report", "city", "state", "audit", "records", "confirm", "dispute", "revenue", "fund",
    "program", "annual", "fiscal", "total", "increase", "decrease",
];

/// Synthetic numeric-heavy prose: `n_words` words, every seventh token a
/// multi-digit number.
pub fn numeric_text(rng: &mut BenchRng, n_words: usize) -> String {
    let mut text = String::with_capacity(n_words * 8);
    for i in 0..n_words {
        if i % 7 == 3 {
            text.push_str(&(rng.next_u64() % 100_000_000).to_string());
        } else {
            text.push_str(WORDS[(rng.next_u64() % WORDS.len() as u64) as usize]);
        }
        text.push(' ');
    }
    text
}

/// A corpus of `n` synthetic snippets.
pub fn synthetic_corpus(n: usize) -> Vec<EvidenceDoc> {
    let mut rng = BenchRng(0x5DEECE66D);
    (0..n)
        .map(|i| EvidenceDoc {
            doc_id: format!("d{i:06}"),
            text: numeric_text(&mut rng, 8 + (i % 40)),
        })
        .collect()
}
