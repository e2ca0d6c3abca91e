//! `search`: ad-hoc BM25 queries against a built index. Prints one JSON
//! line per hit; writes no artifact.

use quantcheck_core::config::PipelineConfig;
use quantcheck_core::retrieval::{search, InvertedIndex};
use quantcheck_core::{Error, Result};

pub fn run(config: &PipelineConfig, query: &str) -> Result<()> {
    let index = InvertedIndex::load(&config.index_dir)?;
    let hits = search(&index, query, config.k)?;
    for hit in &hits {
        let line = serde_json::json!({
            "doc_id": hit.doc_id,
            "bm25_score": hit.bm25_score,
        });
        println!(
            "{}",
            serde_json::to_string(&line).map_err(|e| Error::data(e.to_string()))?
        );
    }
    eprintln!("{} hits for '{query}' (k = {})", hits.len(), config.k);
    Ok(())
}
