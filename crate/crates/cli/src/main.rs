//! `quantcheck`: the numerical claim verification pipeline as re-runnable
//! subcommands over filesystem artifacts.
//!
//! Configuration layers: TOML file < `QC_*` environment < flags. Every
//! subcommand writes one primary artifact plus a run manifest recording
//! the config hash, seed, input digests, and duration. Exit codes:
//! 0 success, 2 config error, 3 data error, 4 external-service error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use quantcheck_core::config::PipelineConfig;
use quantcheck_core::Error;

mod commands;
mod manifest;

#[derive(Parser)]
#[command(
    name = "quantcheck",
    version,
    about = "Numerical claim verification pipeline"
)]
struct Cli {
    /// TOML config file; flags override file and environment values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

/// Flag-level overrides applied on top of file and environment config.
#[derive(Args, Debug, Default, Clone)]
struct Overrides {
    /// Claims JSONL path.
    #[arg(long, global = true)]
    claims: Option<PathBuf>,

    /// Evidence JSONL path.
    #[arg(long, global = true)]
    evidence: Option<PathBuf>,

    /// Index directory.
    #[arg(long, global = true)]
    index_dir: Option<PathBuf>,

    /// Decomposition cache JSONL path.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,

    /// Model file path.
    #[arg(long, global = true)]
    model: Option<PathBuf>,

    /// Directory for reports and intermediate artifacts.
    #[arg(long, global = true)]
    reports_dir: Option<PathBuf>,

    /// BM25 candidates per sub-claim.
    #[arg(short, long, global = true)]
    k: Option<usize>,

    /// Evidence snippets kept per sub-claim (1..=3).
    #[arg(short, long, global = true)]
    m: Option<usize>,

    /// Digit grouping mode: none, l2r, or r2l.
    #[arg(long, global = true)]
    digit_mode: Option<String>,

    /// Token budget for assembled inputs (canonically 256 or 1024).
    #[arg(long, global = true)]
    context_budget: Option<usize>,

    /// Loss: cross_entropy or focal.
    #[arg(long, global = true)]
    loss: Option<String>,

    /// Focal focusing parameter.
    #[arg(long, global = true)]
    gamma: Option<f64>,

    /// Prior-bias scale applied at prediction time.
    #[arg(long, global = true)]
    prior_bias_alpha: Option<f64>,

    /// RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Forbid all network activity; offline backends only.
    #[arg(long, global = true)]
    offline: bool,

    /// Rerank scorer: lexical-oracle or http-cross-encoder.
    #[arg(long, global = true)]
    scorer: Option<String>,
}

impl Overrides {
    fn apply(&self, config: &mut PipelineConfig) -> Result<(), Error> {
        if let Some(v) = &self.claims {
            config.claims = v.clone();
        }
        if let Some(v) = &self.evidence {
            config.evidence = v.clone();
        }
        if let Some(v) = &self.index_dir {
            config.index_dir = v.clone();
        }
        if let Some(v) = &self.cache {
            config.cache = v.clone();
        }
        if let Some(v) = &self.model {
            config.model = v.clone();
        }
        if let Some(v) = &self.reports_dir {
            config.reports_dir = v.clone();
        }
        if let Some(v) = self.k {
            config.k = v;
        }
        if let Some(v) = self.m {
            config.m = v;
        }
        if let Some(v) = &self.digit_mode {
            config.digit_mode = v.parse()?;
        }
        if let Some(v) = self.context_budget {
            config.context_budget = v;
        }
        if let Some(v) = &self.loss {
            config.loss = v.parse()?;
        }
        if let Some(v) = self.gamma {
            config.gamma = v;
        }
        if let Some(v) = self.prior_bias_alpha {
            config.prior_bias_alpha = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if self.offline {
            config.offline = true;
        }
        if let Some(v) = &self.scorer {
            config.scorer = v.parse()?;
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Adapt raw upstream claim/evidence files to the canonical schemas.
    Ingest {
        /// Raw claims JSONL to adapt.
        #[arg(long)]
        raw_claims: Option<PathBuf>,
        /// Raw evidence JSONL to adapt.
        #[arg(long)]
        raw_evidence: Option<PathBuf>,
        /// Split assigned to claims without a split field.
        #[arg(long, default_value = "train")]
        split: String,
        /// Output path (canonical claims or evidence JSONL).
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the BM25 index over the evidence corpus.
    Index {
        /// Evidence corpus JSONL (alias for --evidence).
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Output index directory (alias for --index-dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Query the BM25 index directly; prints scored hits as JSON lines.
    Search {
        /// Index directory (alias for --index-dir).
        #[arg(long)]
        index: Option<PathBuf>,
        /// Query text.
        #[arg(long)]
        query: String,
    },
    /// Decompose claims into sub-questions (cache-first; LLM or fallback).
    Decompose,
    /// Retrieve BM25 candidates for every sub-claim.
    Retrieve,
    /// Rerank candidates, select evidence, and assemble classifier inputs.
    Assemble,
    /// Train the veracity classifier on assembled inputs.
    Train,
    /// Predict labels for assembled inputs.
    Predict {
        /// Predict a single claim instead of every assembled input.
        #[arg(long)]
        claim_id: Option<String>,
    },
    /// Score predictions against gold labels.
    Evaluate {
        /// Predictions JSONL (defaults to reports_dir/predictions.jsonl).
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Run the canonical ablation grid end to end.
    Ablate,
    /// Render an ablation report as an aligned table and CSV.
    Report {
        /// Ablation report JSON (defaults to reports_dir/ablation.json).
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut config = PipelineConfig::load(cli.config.as_deref())?;
    cli.overrides.apply(&mut config)?;
    config.validate()?;

    match cli.command {
        Command::Ingest {
            raw_claims,
            raw_evidence,
            split,
            out,
        } => commands::ingest::run(&config, raw_claims, raw_evidence, &split, &out),
        Command::Index { corpus, out } => {
            if let Some(corpus) = corpus {
                config.evidence = corpus;
            }
            if let Some(out) = out {
                config.index_dir = out;
            }
            commands::index::run(&config)
        }
        Command::Search { index, query } => {
            if let Some(index) = index {
                config.index_dir = index;
            }
            commands::search::run(&config, &query)
        }
        Command::Decompose => commands::decompose::run(&config),
        Command::Retrieve => commands::retrieve::run(&config),
        Command::Assemble => commands::assemble::run(&config),
        Command::Train => commands::train::run(&config),
        Command::Predict { claim_id } => commands::predict::run(&config, claim_id.as_deref()),
        Command::Evaluate { predictions } => commands::evaluate::run(&config, predictions),
        Command::Ablate => commands::ablate::run(&config),
        Command::Report { input } => commands::report::run(&config, input),
    }
}
