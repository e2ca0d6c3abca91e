//! `index`: build the BM25 segment over the evidence corpus.

use quantcheck_core::config::PipelineConfig;
use quantcheck_core::corpus::load_evidence;
use quantcheck_core::retrieval::{build_index_with, SEGMENT_FILE};
use quantcheck_core::Result;

use crate::manifest::ManifestBuilder;

pub fn run(config: &PipelineConfig) -> Result<()> {
    let mut manifest = ManifestBuilder::start("index", config);
    manifest.input(&config.evidence)?;

    let corpus = load_evidence(&config.evidence)?;
    let index = build_index_with(corpus, config.bm25_params(), config.text_options())?;
    index.save(&config.index_dir)?;

    let stats = index.stats();
    println!(
        "indexed {} docs (avgdl {:.2}) -> {}",
        stats.n,
        stats.avgdl,
        config.index_dir.display()
    );
    manifest.finish(&config.index_dir.join(SEGMENT_FILE))
}
