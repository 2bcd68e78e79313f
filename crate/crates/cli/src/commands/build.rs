//! `plangr build`: load and validate the corpus, build the trie, and emit a
//! validation report.

use serde::Serialize;

use plangr_core::error::Result;

use crate::config::ExperimentConfig;
use crate::manifest::ManifestWriter;
use crate::pipeline::load_artifacts;

#[derive(Debug, Serialize)]
struct BuildReport {
    documents: usize,
    seq_len: usize,
    docid_vocab: u32,
    planner_vocab: u32,
    set_size: usize,
    trie_nodes: u64,
    trie_leaves: u64,
    trie_edges: u64,
    trie_estimated_bytes: u64,
    /// Leaf count equals document count (rechecked defensively).
    leaves_match_documents: bool,
}

pub fn run(config: &ExperimentConfig) -> Result<()> {
    let mut manifest = ManifestWriter::begin(&config.output_dir, "build", &config.canonical_json())?;
    let artifacts = manifest.time("build", || load_artifacts(config))?;
    let stats = artifacts.trie.stats();
    let report = BuildReport {
        documents: artifacts.corpus.len(),
        seq_len: artifacts.corpus.seq_len,
        docid_vocab: artifacts.corpus.docid_vocab.size,
        planner_vocab: artifacts.corpus.planner_vocab.size,
        set_size: artifacts.corpus.set_size,
        trie_nodes: stats.node_count,
        trie_leaves: stats.leaf_count,
        trie_edges: stats.edge_count,
        trie_estimated_bytes: stats.estimated_bytes,
        leaves_match_documents: stats.leaf_count as usize == artifacts.corpus.len(),
    };
    let path = config.output_dir.join("build_report.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")?;
    manifest.record_output(&path);
    manifest.finalize()?;
    println!(
        "built trie over {} documents: {} nodes, {} leaves, ~{} bytes",
        report.documents, report.trie_nodes, report.trie_leaves, report.trie_estimated_bytes
    );
    Ok(())
}
