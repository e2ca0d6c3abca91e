//! `ablate`: run the canonical 4-cell grid end to end and write the
//! machine report.

use quantcheck_core::classify::NliServerClient;
use quantcheck_core::config::PipelineConfig;
use quantcheck_core::decompose::{DecomposeCache, Decomposer, LlmClient};
use quantcheck_core::eval::{run_ablation_with, AblationCellConfig, CellBackend};
use quantcheck_core::retrieval::{build_index_with, InvertedIndex};
use quantcheck_core::{Error, Result};

use crate::commands::{ablation_path, build_llm_client, build_scorer, load_claims, load_doc_texts};
use crate::manifest::ManifestBuilder;

pub fn run(config: &PipelineConfig) -> Result<()> {
    let mut manifest = ManifestBuilder::start("ablate", config);
    manifest.input(&config.claims)?;
    manifest.input(&config.evidence)?;

    let claims = load_claims(config)?;
    let doc_texts = load_doc_texts(config)?;

    // Reuse a prebuilt index when present; build in memory otherwise so a
    // fixture run needs no prior `index` step.
    let index = match InvertedIndex::load(&config.index_dir) {
        Ok(index) => index,
        Err(_) => build_index_with(
            quantcheck_core::corpus::load_evidence(&config.evidence)?,
            config.bm25_params(),
            config.text_options(),
        )?,
    };

    let cache = DecomposeCache::load(&config.cache)?;
    let client = build_llm_client(config);
    let decomposer = Decomposer {
        cache: &cache,
        client: client.as_ref().map(|c| c as &dyn LlmClient),
        prompt: config.decompose_prompt()?,
        offline: config.offline,
        max_in_flight: config.max_in_flight,
    };
    let scorer = build_scorer(config)?;

    let prepared = quantcheck_core::eval::ablation::prepare_claims(
        &claims,
        &index,
        doc_texts,
        &decomposer,
        scorer.as_ref(),
        config.k,
        config.max_in_flight,
    )?;

    let grid = AblationCellConfig::canonical_grid(config.loss, config.digit_group_size);
    let nli_client = if config.use_nli_server {
        let base_url = config
            .nli_url
            .clone()
            .ok_or_else(|| Error::config("use_nli_server needs QC_NLI_URL"))?;
        Some(NliServerClient {
            base_url,
            token: None,
            policy: config.http_policy(),
            offline: config.offline,
        })
    } else {
        None
    };
    let backend = match &nli_client {
        Some(client) => CellBackend::NliServer(client),
        None => CellBackend::Linear,
    };
    let report = run_ablation_with(
        &grid,
        &prepared,
        &config.train_config()?,
        config.seed,
        &backend,
    )?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }

    let path = ablation_path(config);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&path, report.to_machine_json()?)?;

    print!("{}", report.to_human_table());
    println!("-> {}", path.display());
    manifest.finish(&path)
}
