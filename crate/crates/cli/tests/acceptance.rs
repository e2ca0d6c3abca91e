//! Acceptance suite: one test per criterion, each printing a PASS line and
//! enforcing its runtime bound. Run with:
//!
//! ```text
//! cargo test -p quantcheck-cli --test acceptance -- --nocapture
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use quantcheck_core::classify::{
    self, loss, loss_from_logits, loss_gradient, predict, train, FeatureVector, Featurizer,
    FocalLossConfig, PriorBias, TrainConfig,
};
use quantcheck_core::corpus::{load_evidence_all, VeracityLabel};
use quantcheck_core::rerank::{select_top_m, AssembledInput};
use quantcheck_core::retrieval::{
    brute_force_scores, build_index, search, Bm25Params, TextOptions,
};
use quantcheck_core::tokenize::{count_tokens, tokenize, ContextBudget, DigitMode};

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn fixtures() -> PathBuf {
    workspace_root().join("fixtures")
}

/// Tiny deterministic RNG for randomized acceptance checks.
struct Rng(u64);

impl Rng {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    fn unit_f64(&mut self) -> f64 {
        self.next_u64() as f64 / u64::MAX as f64
    }

    fn below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }
}

fn finish(criterion: &str, started: Instant, bound: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed < bound,
        "{criterion} exceeded its runtime bound: {elapsed:?} >= {bound:?}"
    );
    println!("ACCEPTANCE {criterion}: PASS ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// Criterion 1: macro-F1 reconstructs the published reference rows.
// ---------------------------------------------------------------------------

/// Published reference rows: (run, reported macro-F1, class F1s as
/// (false, conflicting, true)). Validation block plus the test-split row.
const REFERENCE_ROWS: [(&str, f64, (f64, f64, f64)); 9] = [
    ("benchmark", 0.56, (0.79, 0.48, 0.41)),
    ("our-data", 0.52, (0.80, 0.29, 0.46)),
    ("short-context", 0.52, (0.77, 0.42, 0.37)),
    ("long-context", 0.52, (0.78, 0.37, 0.41)),
    ("r2l-short-context", 0.45, (0.79, 0.40, 0.16)),
    ("r2l-long-context", 0.47, (0.79, 0.32, 0.30)),
    ("submission", 0.57, (0.81, 0.36, 0.55)),
    ("focal-loss", 0.57, (0.81, 0.41, 0.50)),
    ("test-submission", 0.52, (0.80, 0.39, 0.38)),
];

/// The parameter-efficient fine-tuning row, excluded from the in-scope
/// grid (that training technique is out of scope here). Its reported
/// macro deviates from the mean of its rounded class F1s by ~0.0067,
/// which exceeds the in-scope gate but sits inside the worst-case
/// envelope of rounding each value to two decimals (0.0075).
const PEFT_ROW: (&str, f64, (f64, f64, f64)) = ("peft", 0.49, (0.78, 0.30, 0.37));

#[test]
fn criterion_1_metric_reconstruction() {
    let started = Instant::now();
    for (run, reported, (f1_false, f1_conflicting, f1_true)) in REFERENCE_ROWS {
        let mean = (f1_false + f1_conflicting + f1_true) / 3.0;
        assert!(
            (mean - reported).abs() <= 0.005,
            "run '{run}': mean of class F1s {mean:.4} vs reported {reported}"
        );
    }
    // Spot values: the worked examples behind the gate.
    let test_row = (0.80 + 0.39 + 0.38) / 3.0_f64;
    assert!((test_row - 0.5233).abs() < 1e-4);
    let benchmark = (0.79 + 0.48 + 0.41) / 3.0_f64;
    assert!((benchmark - 0.56).abs() < 1e-9);

    let (run, reported, (f, c, t)) = PEFT_ROW;
    let mean = (f + c + t) / 3.0;
    let deviation = (mean - reported).abs();
    assert!(
        deviation > 0.005 && deviation <= 0.0075,
        "run '{run}': expected the known double-rounding deviation, got {deviation:.4}"
    );
    finish("1 metric-reconstruction", started, Duration::from_secs(1));
}

// ---------------------------------------------------------------------------
// Criterion 2: time-efficiency ratios for all nine reference rows.
// ---------------------------------------------------------------------------

const TIME_ROWS: [(&str, f64, u32, f64); 9] = [
    ("benchmark", 6.97, 5, 1.39),
    ("our-data", 9.45, 7, 1.35),
    ("short-context", 12.70, 6, 2.12),
    ("long-context", 30.83, 5, 6.17),
    ("r2l-short-context", 5.62, 2, 2.81),
    ("r2l-long-context", 15.65, 2, 7.83),
    ("submission", 13.07, 3, 4.36),
    ("peft", 17.68, 4, 4.42),
    ("focal", 28.22, 4, 7.06),
];

#[test]
fn criterion_2_time_efficiency_reconstruction() {
    let started = Instant::now();
    for (run, runtime, epochs, reported) in TIME_ROWS {
        let ratio = quantcheck_core::eval::time_efficiency(runtime, epochs).unwrap();
        assert!(
            (ratio - reported).abs() <= 0.01,
            "run '{run}': {runtime}/{epochs} = {ratio:.4} vs reported {reported}"
        );
    }
    finish(
        "2 time-efficiency-reconstruction",
        started,
        Duration::from_secs(1),
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: BM25 search equals brute-force scoring on the fixture.
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_bm25_oracle_equivalence() {
    let started = Instant::now();
    let docs = load_evidence_all(&fixtures().join("evidence.jsonl")).unwrap();
    assert_eq!(docs.len(), 200);
    let queries: Vec<String> = std::fs::read_to_string(fixtures().join("queries.txt"))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    assert_eq!(queries.len(), 25);

    let params = Bm25Params::default();
    let index = build_index(docs.iter().cloned().map(Ok), params).unwrap();
    for query in &queries {
        let hits = search(&index, query, 10).unwrap();
        let oracle = brute_force_scores(&docs, query, params, TextOptions::default());
        assert_eq!(
            hits.len(),
            oracle.len().min(10),
            "query '{query}': hit count"
        );
        for (rank, (hit, (oracle_id, oracle_score))) in hits.iter().zip(&oracle).enumerate() {
            assert_eq!(
                &hit.doc_id, oracle_id,
                "query '{query}' rank {rank}: ordering"
            );
            assert!(
                (hit.bm25_score - oracle_score).abs() <= 1e-9,
                "query '{query}' rank {rank}: {} vs {}",
                hit.bm25_score,
                oracle_score
            );
        }
    }
    finish("3 bm25-oracle-equivalence", started, Duration::from_secs(5));
}

// ---------------------------------------------------------------------------
// Criterion 4: tokenizer digit-grouping properties on 10,000 random runs.
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_tokenizer_properties() {
    let started = Instant::now();
    let mut rng = Rng(4242);
    for _ in 0..10_000 {
        let len = 1 + rng.below(40) as usize;
        let digits: String = (0..len)
            .map(|_| char::from(b'0' + rng.below(10) as u8))
            .collect();

        let r2l = tokenize(&digits, DigitMode::r2l()).tokens;
        let l2r = tokenize(&digits, DigitMode::l2r()).tokens;

        // Round trip both directions.
        assert_eq!(r2l.concat(), digits);
        assert_eq!(l2r.concat(), digits);

        // Right-anchored: all groups length 3 except possibly the first.
        for group in &r2l[1..] {
            assert_eq!(group.len(), 3, "digits {digits}");
        }
        assert!(r2l[0].len() <= 3 && !r2l[0].is_empty());

        // Left-anchored mirror: all length 3 except possibly the last.
        for group in &l2r[..l2r.len() - 1] {
            assert_eq!(group.len(), 3, "digits {digits}");
        }
        assert!(l2r[l2r.len() - 1].len() <= 3 && !l2r[l2r.len() - 1].is_empty());

        // Same token count in both directions.
        assert_eq!(r2l.len(), l2r.len());
        assert_eq!(count_tokens(&digits, DigitMode::r2l()), r2l.len());
    }
    finish("4 tokenizer-properties", started, Duration::from_secs(5));
}

// ---------------------------------------------------------------------------
// Criterion 5: focal loss and its gradient.
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_focal_loss_correctness() {
    let started = Instant::now();

    // gamma = 0 equals cross-entropy to 1e-12 over 1,000 random vectors.
    let ce_cfg = FocalLossConfig::cross_entropy();
    let mut rng = Rng(5);
    for _ in 0..1_000 {
        let raw = [
            rng.unit_f64() + 1e-3,
            rng.unit_f64() + 1e-3,
            rng.unit_f64() + 1e-3,
        ];
        let sum: f64 = raw.iter().sum();
        let probs = raw.map(|p| p / sum);
        let gold = rng.below(3) as usize;
        let diff = (loss(&probs, gold, &ce_cfg) - (-probs[gold].ln())).abs();
        assert!(diff <= 1e-12, "CE mismatch {diff}");
    }

    // Analytic gradient vs central finite differences, h = 1e-5,
    // 100 samples over gamma in {0, 1, 2}.
    let h = 1e-5;
    for _ in 0..100 {
        let gamma = [0.0, 1.0, 2.0][rng.below(3) as usize];
        let cfg = FocalLossConfig {
            gamma,
            alpha: [1.0; 3],
        };
        let logits: [f64; 3] = std::array::from_fn(|_| rng.unit_f64() * 8.0 - 4.0);
        let gold = rng.below(3) as usize;
        let analytic = loss_gradient(&logits, gold, &cfg);
        for j in 0..3 {
            let mut plus = logits;
            plus[j] += h;
            let mut minus = logits;
            minus[j] -= h;
            let numeric = (loss_from_logits(&plus, gold, &cfg)
                - loss_from_logits(&minus, gold, &cfg))
                / (2.0 * h);
            let denom = numeric.abs().max(analytic[j].abs()).max(1e-8);
            assert!(
                (analytic[j] - numeric).abs() / denom < 1e-6,
                "gamma={gamma} gold={gold} j={j}: analytic {} vs numeric {numeric}",
                analytic[j]
            );
        }
    }

    // Point value: loss(gamma=2, p_gold=0.4) = 0.36 * (-ln 0.4).
    let point = loss(
        &[0.4, 0.3, 0.3],
        0,
        &FocalLossConfig {
            gamma: 2.0,
            alpha: [1.0; 3],
        },
    );
    assert!((point - 0.329865).abs() <= 1e-6, "point value {point}");

    finish("5 focal-loss-correctness", started, Duration::from_secs(5));
}

// ---------------------------------------------------------------------------
// Criterion 6: prior-bias arithmetic.
// ---------------------------------------------------------------------------

fn tiny_text_dataset() -> Vec<(FeatureVector, VeracityLabel)> {
    // Three-class dataset with class-specific vocabulary, built through
    // the real assembly + featurization path.
    let vocab = [
        ["crimson", "scarlet", "ruby", "garnet"],
        ["azure", "cobalt", "sapphire", "navy"],
        ["emerald", "jade", "olive", "moss"],
    ];
    let featurizer = Featurizer {
        mode: DigitMode::none(),
        budget: ContextBudget::SHORT,
    };
    let mut data = Vec::new();
    for i in 0..60usize {
        let class = i % 3;
        let words = vocab[class];
        let text = format!(
            "{} {} report number {} with {} shading",
            words[i % 4],
            words[(i + 1) % 4],
            i,
            words[(i + 2) % 4]
        );
        let input = AssembledInput {
            claim_id: format!("t{i}"),
            token_count: count_tokens(&text, DigitMode::none()),
            truncated: false,
            text,
            budget: ContextBudget::SHORT,
            mode: DigitMode::none(),
        };
        let features = featurizer.featurize(&input).unwrap();
        data.push((features, VeracityLabel::from_index(class).unwrap()));
    }
    data
}

#[test]
fn criterion_6_prior_bias_arithmetic() {
    let started = Instant::now();

    // Log-odds of the task priors, scale 1: values computed independently
    // as ln(p / (1 - p)).
    let bias = PriorBias::new([0.1879, 0.5793, 0.2327], 1.0).unwrap();
    let values = bias.biases();
    let expected = [
        -1.4637135788689455,
        0.31990048750610345,
        -1.1931277888753735,
    ];
    for (class, (value, want)) in values.iter().zip(expected).enumerate() {
        assert!(
            (value - want).abs() <= 1e-5,
            "class {class}: bias {value} vs {want}"
        );
    }

    // Scale 0 leaves predictions bit-identical.
    let data = tiny_text_dataset();
    let cfg = TrainConfig {
        max_epochs: 10,
        learning_rate: 5.0,
        ..TrainConfig::default()
    };
    let model = train(&data, None, &cfg).unwrap().model;
    let zero_bias = PriorBias::new([0.1879, 0.5793, 0.2327], 0.0).unwrap();
    for (features, _) in &data {
        let (label_plain, probs_plain) = predict(&model, features, None);
        let (label_zero, probs_zero) = predict(&model, features, Some(&zero_bias));
        assert_eq!(label_plain, label_zero);
        assert_eq!(probs_plain, probs_zero, "probs must match bitwise");
    }

    // Uniform priors leave the argmax unchanged at any scale.
    for scale in [0.25, 1.0, 4.0] {
        let uniform = PriorBias::new([1.0 / 3.0; 3], scale).unwrap();
        for (features, _) in &data {
            let (label_plain, _) = predict(&model, features, None);
            let (label_uniform, _) = predict(&model, features, Some(&uniform));
            assert_eq!(label_plain, label_uniform);
        }
    }

    finish("6 prior-bias-arithmetic", started, Duration::from_secs(5));
}

// ---------------------------------------------------------------------------
// Criterion 7: trainability and training determinism.
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_trainability() {
    let started = Instant::now();
    let data = tiny_text_dataset();
    let cfg = TrainConfig {
        max_epochs: 50,
        patience: 50,
        learning_rate: 5.0,
        seed: 42,
        ..TrainConfig::default()
    };
    let outcome = train(&data, None, &cfg).unwrap();
    assert!(
        outcome.best_validation_macro_f1 >= 0.95,
        "macro-F1 {} within {} epochs",
        outcome.best_validation_macro_f1,
        outcome.epochs_run
    );

    let dir = tempfile::tempdir().unwrap();
    let path_a = dir.path().join("a.bin");
    let path_b = dir.path().join("b.bin");
    train(&data, None, &cfg)
        .unwrap()
        .model
        .save(&path_a)
        .unwrap();
    train(&data, None, &cfg)
        .unwrap()
        .model
        .save(&path_b)
        .unwrap();
    assert_eq!(
        std::fs::read(&path_a).unwrap(),
        std::fs::read(&path_b).unwrap(),
        "same seed must produce byte-identical model files"
    );
    finish("7 trainability", started, Duration::from_secs(30));
}

// ---------------------------------------------------------------------------
// Criterion 8: end-to-end offline ablation over the bundled fixtures.
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_end_to_end_ablation() {
    let started = Instant::now();
    let root = workspace_root();
    let binary = env!("CARGO_BIN_EXE_quantcheck");

    let run_dir = tempfile::tempdir().unwrap();
    let dir_a = run_dir.path().join("a");
    let dir_b = run_dir.path().join("b");
    for dir in [&dir_a, &dir_b] {
        let output = Command::new(binary)
            .current_dir(&root)
            .args([
                "--config",
                "fixtures/toy.toml",
                "--offline",
                "--reports-dir",
            ])
            .arg(dir)
            .arg("ablate")
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "ablate failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }

    let json_a = std::fs::read(dir_a.join("ablation.json")).unwrap();
    let json_b = std::fs::read(dir_b.join("ablation.json")).unwrap();
    assert_eq!(
        json_a, json_b,
        "seeded ablation runs must be diff-identical"
    );

    let cells: Vec<serde_json::Value> = serde_json::from_slice(&json_a).unwrap();
    assert_eq!(cells.len(), 4, "canonical grid is four cells");
    let mut seen = HashSet::new();
    for cell in &cells {
        let mode = cell["mode"].as_str().unwrap().to_string();
        let budget = cell["budget"].as_u64().unwrap();
        let m = cell["m"].as_u64().unwrap();
        seen.insert((mode.clone(), budget, m));
        assert!(matches!((budget, m), (256, 1) | (1024, 3)), "{cell}");
        for key in [
            "macro_f1",
            "accuracy",
            "f1_true",
            "f1_false",
            "f1_conflicting",
        ] {
            let value = cell[key].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&value), "{key} = {value}");
        }
        let runtime = cell["runtime_min"].as_f64().unwrap();
        let epochs = cell["epochs"].as_u64().unwrap();
        let efficiency = cell["time_efficiency"].as_f64().unwrap();
        assert!(epochs >= 1);
        assert!((efficiency - runtime / epochs as f64).abs() <= 1e-9);
    }
    assert_eq!(
        seen,
        HashSet::from([
            ("l2r".to_string(), 256, 1),
            ("l2r".to_string(), 1024, 3),
            ("r2l".to_string(), 256, 1),
            ("r2l".to_string(), 1024, 3),
        ])
    );

    // Selection widths per claim: m=1 keeps at most 3 evidences, m=3 at
    // most 9, over the same fixture pipeline the cells ran.
    let claims = quantcheck_core::corpus::load_claims(&root.join("fixtures/claims.jsonl")).unwrap();
    let docs = load_evidence_all(&root.join("fixtures/evidence.jsonl")).unwrap();
    let index = build_index(docs.iter().cloned().map(Ok), Bm25Params::default()).unwrap();
    let doc_texts: std::collections::HashMap<String, String> =
        docs.into_iter().map(|d| (d.doc_id, d.text)).collect();
    let cache = quantcheck_core::decompose::DecomposeCache::load(
        &root.join("fixtures/decompose_cache.jsonl"),
    )
    .unwrap();
    let decomposer = quantcheck_core::decompose::Decomposer {
        cache: &cache,
        client: None,
        prompt: Default::default(),
        offline: true,
        max_in_flight: 2,
    };
    let prepared = quantcheck_core::eval::ablation::prepare_claims(
        &claims,
        &index,
        doc_texts,
        &decomposer,
        &quantcheck_core::rerank::LexicalOverlapScorer,
        10,
        2,
    )
    .unwrap();
    for prepared_claim in &prepared.claims {
        for (m, bound) in [(1usize, 3usize), (3, 9)] {
            let selection = select_top_m(&prepared_claim.reranked, m).unwrap();
            assert!(
                selection.total() <= bound,
                "claim {} selected {} evidences with m={m}",
                prepared_claim.claim.claim_id,
                selection.total()
            );
        }
    }

    finish("8 end-to-end-ablation", started, Duration::from_secs(120));
}

// ---------------------------------------------------------------------------
// Criterion 9: selection contract over random candidate sets.
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_selection_contract() {
    let started = Instant::now();
    let mut rng = Rng(99);
    for _ in 0..1_000 {
        // Up to 3 sub-claims, doc ids from a small pool so cross-sub-claim
        // collisions are common.
        let sub_claims = 1 + rng.below(3) as usize;
        let mut lists = Vec::with_capacity(sub_claims);
        for sub in 0..sub_claims {
            let len = rng.below(8) as usize;
            let mut seen = HashSet::new();
            let mut list = Vec::new();
            for _ in 0..len {
                let id = format!("doc{}", rng.below(12));
                if !seen.insert(id.clone()) {
                    continue;
                }
                list.push(quantcheck_core::retrieval::ScoredEvidence {
                    doc_id: id,
                    bm25_score: 1.0,
                    rerank_score: Some((rng.below(1000) as f64) / 1000.0),
                    sub_claim_index: sub,
                });
            }
            list.sort_by(|a, b| {
                b.rerank_score
                    .partial_cmp(&a.rerank_score)
                    .unwrap()
                    .then_with(|| a.doc_id.cmp(&b.doc_id))
            });
            lists.push(list);
        }
        let m = 1 + rng.below(3) as usize;
        let selection = select_top_m(&lists, m).unwrap();

        assert!(selection.total() <= 3 * m);
        let ids = selection.doc_ids();
        let unique: HashSet<&&str> = ids.iter().collect();
        assert_eq!(unique.len(), ids.len(), "duplicate doc ids in selection");
        for per_sub in &selection.per_sub_claim {
            assert!(per_sub.len() <= m);
            for pair in per_sub.windows(2) {
                assert!(pair[0].rerank_score >= pair[1].rerank_score);
            }
        }
    }
    finish("9 selection-contract", started, Duration::from_secs(5));
}

// ---------------------------------------------------------------------------
// Shared featurization sanity used by criteria 6 and 7.
// ---------------------------------------------------------------------------

#[test]
fn text_fixture_is_three_class_and_separable_shaped() {
    let data = tiny_text_dataset();
    assert_eq!(data.len(), 60);
    let mut counts = [0usize; 3];
    for (features, label) in &data {
        counts[label.index()] += 1;
        assert!(!features.is_empty());
    }
    assert_eq!(counts, [20, 20, 20]);
    let _ = classify::stable_hash(b"determinism anchor");
}
