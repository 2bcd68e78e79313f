//! `plangr perturb`: generate the fixed variation query sets next to the
//! original queries file.

use plangr_core::error::{Error, Result};
use plangr_core::variations::{generate_variation_sets, write_variation_set};

use crate::config::ExperimentConfig;
use crate::manifest::ManifestWriter;
use crate::pipeline::{load_lexicon, load_queries_from};

pub fn run(config: &ExperimentConfig) -> Result<()> {
    let mut manifest =
        ManifestWriter::begin(&config.output_dir, "perturb", &config.canonical_json())?;
    let queries_path = config.queries()?;
    let queries = load_queries_from(queries_path)?;
    let lexicon = load_lexicon(config)?;
    for (name, content) in lexicon_sources(config)? {
        manifest.add_lexicon_hash(&name, content.as_bytes());
    }
    let split = config.split_label();
    let target_dir = queries_path
        .parent()
        .ok_or_else(|| Error::InvalidArgument("queries path has no parent directory".into()))?;

    let sets = manifest.time("perturb", || {
        generate_variation_sets(&queries, &config.kinds, &config.seeds, &lexicon)
    })?;
    for set in &sets {
        let path = write_variation_set(target_dir, &split, set)?;
        manifest.record_output(&path);
    }
    manifest.finalize()?;
    println!(
        "wrote {} variation sets ({} kinds x {} seeds) next to {}",
        sets.len(),
        config.kinds.len(),
        config.seeds.len(),
        queries_path.display()
    );
    Ok(())
}

/// Lexicon (name, content) pairs driving the manifest hashes.
fn lexicon_sources(config: &ExperimentConfig) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let overrides = [
        ("synonyms.tsv", &config.synonyms_path),
        ("paraphrase_rules.tsv", &config.paraphrase_rules_path),
        ("naturality.tsv", &config.naturality_path),
    ];
    for ((builtin_name, builtin_content), (name, path)) in
        plangr_core::variations::builtin_lexicon_sources()
            .into_iter()
            .zip(overrides)
    {
        debug_assert_eq!(builtin_name, name);
        match path {
            Some(p) => out.push((name.to_string(), std::fs::read_to_string(p)?)),
            None => out.push((name.to_string(), builtin_content.to_string())),
        }
    }
    Ok(out)
}
