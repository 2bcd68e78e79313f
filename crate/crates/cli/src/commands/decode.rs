//! `plangr decode`: trie-constrained guided decoding to TREC runs, with
//! switches for the unguided ablation and the counterfactual plan swap.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use plangr_core::corpus::Query;
use plangr_core::decode::{decode, DecodeOptions, FinalScore};
use plangr_core::error::{Error, Result};
use plangr_core::metrics::write_run;
use plangr_core::planner::plan;
use plangr_core::run::RunList;

use crate::config::ExperimentConfig;
use crate::manifest::ManifestWriter;
use crate::pipeline::{apply_weights_override, load_artifacts, load_queries_from, par_map_queries};

#[derive(Debug, Default)]
pub struct DecodeArgs {
    pub queries: Option<PathBuf>,
    /// Disable the look-ahead bonus (unguided ablation).
    pub no_bonus: bool,
    /// Decode under plans computed from this alternate query file (by qid).
    pub plan_from: Option<PathBuf>,
    pub final_score: Option<FinalScore>,
    pub tag: Option<String>,
    pub out: Option<PathBuf>,
    pub weights_from: Option<PathBuf>,
}

impl DecodeArgs {
    fn default_tag(&self) -> &'static str {
        if self.no_bonus {
            "seq"
        } else if self.plan_from.is_some() {
            "swapped"
        } else {
            "pag"
        }
    }
}

pub fn run(config: &ExperimentConfig, args: &DecodeArgs) -> Result<()> {
    let mut manifest =
        ManifestWriter::begin(&config.output_dir, "decode", &config.canonical_json())?;
    let artifacts = manifest.time("load", || load_artifacts(config))?;
    let scorer = apply_weights_override(artifacts.scorer, args.weights_from.as_deref())?;
    let corpus = &artifacts.corpus;
    let trie = &artifacts.trie;

    let queries_path: &Path = args.queries.as_deref().unwrap_or(config.queries()?);
    let queries = load_queries_from(queries_path)?;

    // Queries whose plans drive the bonus: the decoded queries themselves,
    // or the alternates keyed by qid for the swapped arm.
    let plan_sources: HashMap<String, Query> = match &args.plan_from {
        Some(path) => load_queries_from(path)?
            .into_iter()
            .map(|q| (q.qid.clone(), q))
            .collect(),
        None => HashMap::new(),
    };

    let options_template = DecodeOptions {
        beam_size: config.k,
        use_bonus: !args.no_bonus,
        plan_override: None,
        output_depth: config.run_depth.min(config.k),
        final_score: args.final_score.unwrap_or(config.final_score),
    };

    let runs: Vec<RunList> = manifest.time("decode", || {
        par_map_queries(config, &queries, |q| {
            let plan_query = match &args.plan_from {
                Some(path) => plan_sources.get(&q.qid).ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "qid '{}' missing from plan source '{}'",
                        q.qid,
                        path.display()
                    ))
                })?,
                None => q,
            };
            let planning = plan(plan_query, corpus, &scorer, config.n)?;
            decode(q, trie, &scorer, &planning, &options_template)
        })
    })?;

    let tag = args.tag.clone().unwrap_or_else(|| args.default_tag().to_string());
    let out_path = match &args.out {
        Some(p) => p.clone(),
        None => {
            let runs_dir = config.output_dir.join("runs");
            std::fs::create_dir_all(&runs_dir)?;
            runs_dir.join(format!("{tag}.trec"))
        }
    };
    write_run(&out_path, &runs, &tag)?;
    manifest.record_output(&out_path);
    manifest.finalize()?;
    println!(
        "decoded {} queries (k={}, bonus={}) -> {}",
        queries.len(),
        config.k,
        !args.no_bonus,
        out_path.display()
    );
    Ok(())
}
