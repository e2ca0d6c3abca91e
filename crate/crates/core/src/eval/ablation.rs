//! The ablation harness: run the pipeline end to end over a grid of
//! (digit mode, context budget, evidence count, loss) cells and report
//! Table-style metrics for each.
//!
//! The canonical grid crosses L2R/R2L digit grouping with
//! (m=1, 256 tokens) and (m=3, 1024 tokens). Retrieval and reranking are
//! held fixed across cells; only selection width, assembly budget, and
//! classifier-side tokenization vary.
//!
//! Reports are byte-deterministic for a fixed seed: the recorded
//! `runtime_min` is a normalized training-cost measure (millions of tokens
//! processed across all training epochs), not wall-clock time, which would
//! differ between otherwise identical runs. Wall-clock durations belong in
//! run manifests.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::classify::{self, train, Featurizer, LossKind, NliServerClient, TrainConfig};
use crate::corpus::{Claim, Split, VeracityLabel};
use crate::decompose::{Decomposer, SubClaimSet};
use crate::error::{Error, Result};
use crate::eval::{confusion, MetricsReport};
use crate::rerank::{assemble_input, rerank_many, select_top_m, PairScorer};
use crate::retrieval::{search, InvertedIndex, ScoredEvidence};
use crate::tokenize::{ContextBudget, DigitMode, Grouping};

/// Which classifier backs the ablation cells.
pub enum CellBackend<'a> {
    /// Train the in-repo linear model per cell (the default).
    Linear,
    /// Delegate every validation input to an external NLI server; no
    /// training happens and each cell is a single inference pass.
    NliServer(&'a NliServerClient),
}

/// One cell of the ablation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AblationCellConfig {
    pub mode: DigitMode,
    pub budget: ContextBudget,
    pub m: usize,
    pub loss: LossKind,
}

impl AblationCellConfig {
    /// `{L2R, R2L} x {(m=1, 256), (m=3, 1024)}`.
    pub fn canonical_grid(loss: LossKind, group_size: usize) -> Vec<AblationCellConfig> {
        let mut cells = Vec::new();
        for grouping in [Grouping::L2r, Grouping::R2l] {
            for (m, budget) in [(1usize, ContextBudget::SHORT), (3, ContextBudget::LONG)] {
                cells.push(AblationCellConfig {
                    mode: DigitMode {
                        grouping,
                        group_size,
                    },
                    budget,
                    m,
                    loss,
                });
            }
        }
        cells
    }

    pub fn name(&self) -> String {
        let loss = match self.loss {
            LossKind::CrossEntropy => "ce",
            LossKind::Focal => "focal",
        };
        format!(
            "{}-{}-m{}-{}",
            self.mode.grouping, self.budget.max_tokens, self.m, loss
        )
    }

    fn sort_key(&self) -> (String, usize, usize, String) {
        (
            self.mode.grouping.to_string(),
            self.budget.max_tokens,
            self.m,
            format!("{:?}", self.loss),
        )
    }
}

/// One row of the machine report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCellReport {
    pub mode: String,
    pub budget: usize,
    pub m: usize,
    pub loss: String,
    pub macro_f1: f64,
    pub f1_true: f64,
    pub f1_false: f64,
    pub f1_conflicting: f64,
    pub accuracy: f64,
    pub runtime_min: f64,
    pub epochs: u32,
    pub time_efficiency: f64,
}

/// Grid results in canonical cell order.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationReport {
    pub cells: Vec<AblationCellReport>,
    /// Not part of the machine report; surfaced on stderr by the CLI.
    pub warnings: Vec<String>,
}

impl AblationReport {
    /// The machine report: a JSON array of cells, full precision.
    pub fn to_machine_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.cells)
            .map(|s| s + "\n")
            .map_err(|e| Error::data(e.to_string()))
    }

    pub fn from_machine_json(json: &str) -> Result<Self> {
        let cells: Vec<AblationCellReport> =
            serde_json::from_str(json).map_err(|e| Error::data(e.to_string()))?;
        Ok(AblationReport {
            cells,
            warnings: Vec::new(),
        })
    }

    /// Aligned human-readable table, two decimal places.
    pub fn to_human_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<20} {:>8} {:>6} {:>8} {:>9} {:>8} {:>8} {:>7} {:>9}\n",
            "CELL",
            "MACRO-F1",
            "ACC",
            "F1-TRUE",
            "F1-FALSE",
            "F1-CONF",
            "RUNTIME",
            "EPOCHS",
            "TIME-EFF"
        ));
        for cell in &self.cells {
            let loss_short = match cell.loss.as_str() {
                "cross_entropy" => "ce",
                other => other,
            };
            out.push_str(&format!(
                "{:<20} {:>8.2} {:>6.2} {:>8.2} {:>9.2} {:>8.2} {:>8.2} {:>7} {:>9.2}\n",
                format!("{}-{}-m{}-{}", cell.mode, cell.budget, cell.m, loss_short),
                cell.macro_f1,
                cell.accuracy,
                cell.f1_true,
                cell.f1_false,
                cell.f1_conflicting,
                cell.runtime_min,
                cell.epochs,
                cell.time_efficiency,
            ));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "mode,budget,m,loss,macro_f1,f1_true,f1_false,f1_conflicting,accuracy,runtime_min,epochs,time_efficiency\n",
        );
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                c.mode,
                c.budget,
                c.m,
                c.loss,
                c.macro_f1,
                c.f1_true,
                c.f1_false,
                c.f1_conflicting,
                c.accuracy,
                c.runtime_min,
                c.epochs,
                c.time_efficiency
            ));
        }
        out
    }
}

/// A claim with everything the per-cell pipeline needs precomputed:
/// decomposition and reranked candidates per sub-claim. Retrieval and
/// reranking do not depend on the cell, so they run once.
#[derive(Debug, Clone)]
pub struct PreparedClaim {
    pub claim: Claim,
    pub subs: SubClaimSet,
    pub reranked: Vec<Vec<ScoredEvidence>>,
}

/// Inputs shared by every cell.
pub struct PreparedData {
    pub claims: Vec<PreparedClaim>,
    pub doc_texts: HashMap<String, String>,
}

impl PreparedData {
    fn split(&self, split: Split) -> Vec<&PreparedClaim> {
        self.claims
            .iter()
            .filter(|p| p.claim.split == split && p.claim.label.is_some())
            .collect()
    }
}

/// Decompose, retrieve, and rerank every claim once.
pub fn prepare_claims(
    claims: &[Claim],
    index: &InvertedIndex,
    doc_texts: HashMap<String, String>,
    decomposer: &Decomposer,
    scorer: &dyn PairScorer,
    retrieval_k: usize,
    max_in_flight: usize,
) -> Result<PreparedData> {
    let subs = decomposer.decompose_all(claims)?;

    // One (query, candidates) pair per sub-claim, flattened.
    let mut pairs: Vec<(String, Vec<ScoredEvidence>)> = Vec::with_capacity(claims.len() * 3);
    for set in &subs {
        for (sub_idx, question) in set.questions.iter().enumerate() {
            let mut candidates = search(index, question, retrieval_k)?;
            for c in &mut candidates {
                c.sub_claim_index = sub_idx;
            }
            pairs.push((question.clone(), candidates));
        }
    }
    let lookup = |id: &str| doc_texts.get(id).cloned();
    let reranked_flat = rerank_many(&pairs, scorer, &lookup, max_in_flight)?;

    let mut prepared = Vec::with_capacity(claims.len());
    for (i, (claim, set)) in claims.iter().zip(subs).enumerate() {
        prepared.push(PreparedClaim {
            claim: claim.clone(),
            subs: set,
            reranked: reranked_flat[i * 3..(i + 1) * 3].to_vec(),
        });
    }
    Ok(PreparedData {
        claims: prepared,
        doc_texts,
    })
}

/// Run one cell: select, assemble, then either train-and-predict the
/// linear model or delegate to the NLI server.
fn run_cell(
    cell: &AblationCellConfig,
    data: &PreparedData,
    base: &TrainConfig,
    seed: u64,
    backend: &CellBackend,
) -> Result<AblationCellReport> {
    let train_claims = data.split(Split::Train);
    let val_claims = data.split(Split::Validation);
    if train_claims.is_empty() {
        return Err(Error::data("no labeled training claims"));
    }
    if val_claims.is_empty() {
        return Err(Error::data("no labeled validation claims"));
    }

    let featurizer = Featurizer {
        mode: cell.mode,
        budget: cell.budget,
    };
    let lookup = |id: &str| data.doc_texts.get(id).cloned();

    let assemble_split = |claims: &[&PreparedClaim]| -> Result<(Vec<(crate::rerank::AssembledInput, VeracityLabel)>, u64)> {
        let mut out = Vec::with_capacity(claims.len());
        let mut tokens_total = 0u64;
        for prepared in claims {
            let selection = select_top_m(&prepared.reranked, cell.m)?;
            let input = assemble_input(
                &prepared.claim,
                &prepared.subs,
                &selection,
                cell.budget,
                cell.mode,
                &lookup,
            )?;
            tokens_total += input.token_count as u64;
            out.push((input, prepared.claim.label.unwrap()));
        }
        Ok((out, tokens_total))
    };

    let (val_inputs, val_tokens) = assemble_split(&val_claims)?;
    let golds: Vec<VeracityLabel> = val_inputs.iter().map(|(_, l)| *l).collect();

    let (preds, runtime_min, epochs) = match backend {
        CellBackend::Linear => {
            let (train_raw, train_tokens) = assemble_split(&train_claims)?;
            let train_set: Vec<(classify::FeatureVector, VeracityLabel)> = train_raw
                .iter()
                .map(|(input, label)| Ok((featurizer.featurize(input)?, *label)))
                .collect::<Result<_>>()?;
            let val_set: Vec<(classify::FeatureVector, VeracityLabel)> = val_inputs
                .iter()
                .map(|(input, label)| Ok((featurizer.featurize(input)?, *label)))
                .collect::<Result<_>>()?;

            let cfg = TrainConfig {
                mode: cell.mode,
                budget: cell.budget,
                loss: cell.loss,
                seed,
                ..base.clone()
            };
            let outcome = train(&train_set, Some(&val_set), &cfg)?;
            let preds: Vec<VeracityLabel> = val_set
                .iter()
                .map(|(f, _)| classify::predict(&outcome.model, f, None).0)
                .collect();
            // Normalized training cost: millions of tokens seen across
            // all epochs.
            let runtime_min = train_tokens as f64 * outcome.epochs_run as f64 / 1.0e6;
            (preds, runtime_min, outcome.epochs_run)
        }
        CellBackend::NliServer(client) => {
            let preds: Vec<VeracityLabel> = val_inputs
                .iter()
                .map(|(input, _)| Ok(classify::nli_server_predict(client, input)?.0))
                .collect::<Result<_>>()?;
            // One inference pass over the validation inputs.
            (preds, val_tokens as f64 / 1.0e6, 1)
        }
    };

    let metrics = MetricsReport::from_confusion(&confusion(&golds, &preds)?)?;
    let time_efficiency = super::time_efficiency(runtime_min, epochs)?;

    Ok(AblationCellReport {
        mode: cell.mode.grouping.to_string(),
        budget: cell.budget.max_tokens,
        m: cell.m,
        loss: match cell.loss {
            LossKind::CrossEntropy => "cross_entropy".to_string(),
            LossKind::Focal => "focal".to_string(),
        },
        macro_f1: metrics.macro_f1,
        f1_true: metrics.f1[0],
        f1_false: metrics.f1[1],
        f1_conflicting: metrics.f1[2],
        accuracy: metrics.accuracy,
        runtime_min,
        epochs,
        time_efficiency,
    })
}

/// Run every cell of `grid`. Duplicate cells are dropped with a warning;
/// cells execute and report in canonical order; any cell failure aborts
/// the run naming the cell.
pub fn run_ablation(
    grid: &[AblationCellConfig],
    data: &PreparedData,
    base: &TrainConfig,
    seed: u64,
) -> Result<AblationReport> {
    run_ablation_with(grid, data, base, seed, &CellBackend::Linear)
}

/// [`run_ablation`] with an explicit cell backend.
pub fn run_ablation_with(
    grid: &[AblationCellConfig],
    data: &PreparedData,
    base: &TrainConfig,
    seed: u64,
    backend: &CellBackend,
) -> Result<AblationReport> {
    if grid.is_empty() {
        return Err(Error::config("ablation grid is empty"));
    }
    let mut warnings = Vec::new();
    let mut cells: Vec<AblationCellConfig> = Vec::new();
    for cell in grid {
        if cells.contains(cell) {
            warnings.push(format!("duplicate ablation cell {} dropped", cell.name()));
        } else {
            cells.push(*cell);
        }
    }
    cells.sort_by_key(|c| c.sort_key());

    let mut reports = Vec::with_capacity(cells.len());
    for cell in &cells {
        let report = run_cell(cell, data, base, seed, backend).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("cell {}: {msg}", cell.name())),
            Error::Data(msg) => Error::Data(format!("cell {}: {msg}", cell.name())),
            other => other,
        })?;
        reports.push(report);
    }
    Ok(AblationReport {
        cells: reports,
        warnings,
    })
}
