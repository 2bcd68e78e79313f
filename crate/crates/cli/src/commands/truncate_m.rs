//! `plangr truncate-m`: write a set-docids file keeping each document's
//! top-m' highest-weight planning tokens, for the planner-size sweep.

use std::path::PathBuf;

use plangr_core::corpus::{load_corpus, write_set_docids, CorpusConfig};
use plangr_core::error::Result;

use crate::config::ExperimentConfig;
use crate::manifest::ManifestWriter;

pub struct TruncateArgs {
    pub m_prime: usize,
    pub out: Option<PathBuf>,
}

pub fn run(config: &ExperimentConfig, args: &TruncateArgs) -> Result<()> {
    let mut manifest =
        ManifestWriter::begin(&config.output_dir, "truncate-m", &config.canonical_json())?;
    // Truncation starts from the file as stored, ignoring any m_truncation
    // already active in the config.
    let corpus_config = CorpusConfig::load(config.corpus_config()?)?;
    let corpus = load_corpus(config.docids()?, config.set_docids()?, corpus_config)?;
    let truncated = corpus.with_truncated_set_docids(args.m_prime)?;
    let out = args.out.clone().unwrap_or_else(|| {
        config
            .output_dir
            .join(format!("set_docids.m{}.tsv", args.m_prime))
    });
    write_set_docids(&truncated, &out)?;
    manifest.record_output(&out);
    manifest.finalize()?;
    println!(
        "truncated set docids to m'={} -> {}",
        args.m_prime,
        out.display()
    );
    Ok(())
}
