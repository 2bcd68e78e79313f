//! Shared artifact loading and query-parallel execution for the commands.

use std::collections::HashMap;
use std::fs;
use std::io::BufRead;
use std::path::Path;
use std::time::Duration;

use serde::Deserialize;

use plangr_core::corpus::{load_corpus, read_queries, Corpus, CorpusConfig, Query};
use plangr_core::error::{Error, Result};
use plangr_core::scorer::{
    ExternalScorer, ExternalScorerOptions, PlannerWeights, Scorer, SyntheticScorer, TableScorer,
    WeightsOverride,
};
use plangr_core::trie::{build_trie, DocidTrie};
use plangr_core::variations::Lexicon;

use crate::config::{ExperimentConfig, ScorerSpec};

/// Corpus, trie and scorer loaded per the config.
pub struct Artifacts {
    pub corpus: Corpus,
    pub trie: DocidTrie,
    pub scorer: Box<dyn Scorer>,
}

pub fn load_artifacts(config: &ExperimentConfig) -> Result<Artifacts> {
    let corpus = load_corpus_only(config)?;
    let trie = build_trie(&corpus)?;
    let scorer = build_scorer(config, &corpus.config())?;
    Ok(Artifacts {
        corpus,
        trie,
        scorer,
    })
}

pub fn load_corpus_only(config: &ExperimentConfig) -> Result<Corpus> {
    let corpus_config = CorpusConfig::load(config.corpus_config()?)?;
    let corpus = load_corpus(config.docids()?, config.set_docids()?, corpus_config)?;
    match config.m_truncation {
        Some(m_prime) => corpus.with_truncated_set_docids(m_prime),
        None => Ok(corpus),
    }
}

pub fn build_scorer(
    config: &ExperimentConfig,
    corpus_config: &CorpusConfig,
) -> Result<Box<dyn Scorer>> {
    Ok(match &config.scorer {
        ScorerSpec::Synthetic { seed } => Box::new(SyntheticScorer::new(
            *seed,
            corpus_config.docid_vocab,
            corpus_config.planner_vocab,
        )),
        ScorerSpec::Table { path } => Box::new(TableScorer::load(path)?),
        ScorerSpec::External {
            command,
            pool_size,
            timeout_secs,
        } => Box::new(ExternalScorer::spawn(
            command,
            corpus_config.docid_vocab,
            ExternalScorerOptions {
                timeout: Duration::from_secs(*timeout_secs),
                pool_size: *pool_size,
            },
        )?),
    })
}

pub fn load_queries_from(path: &Path) -> Result<Vec<Query>> {
    if !path.exists() {
        return Err(Error::InvalidArgument(format!(
            "missing queries file '{}'",
            path.display()
        )));
    }
    read_queries(path)
}

#[derive(Debug, Deserialize)]
struct WeightsOverrideLine {
    qid: String,
    weights: std::collections::BTreeMap<String, f64>,
}

/// Load a planner-weights override file (JSONL, one
/// `{"qid":"...","weights":{"17":0.5}}` object per line).
pub fn load_weights_override(path: &Path) -> Result<HashMap<String, PlannerWeights>> {
    let file = fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut overrides = HashMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: WeightsOverrideLine =
            serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: format!("bad weights override: {e}"),
            })?;
        let mut weights = PlannerWeights::new();
        for (token, w) in parsed.weights {
            let token: u32 = token.parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: lineno + 1,
                msg: format!("bad planner token '{token}'"),
            })?;
            weights.insert(token, w);
        }
        overrides.insert(parsed.qid, weights);
    }
    Ok(overrides)
}

/// Wrap a scorer with a weights override when a file is given.
pub fn apply_weights_override(
    scorer: Box<dyn Scorer>,
    path: Option<&Path>,
) -> Result<Box<dyn Scorer>> {
    match path {
        Some(p) => {
            let overrides = load_weights_override(p)?;
            Ok(Box::new(WeightsOverride::new(scorer, overrides)))
        }
        None => Ok(scorer),
    }
}

pub fn load_lexicon(config: &ExperimentConfig) -> Result<Lexicon> {
    Lexicon::from_files(
        config.synonyms_path.as_deref(),
        config.paraphrase_rules_path.as_deref(),
        config.naturality_path.as_deref(),
    )
}

/// Worker count: `PLANGR_WORKERS` beats the config, which beats all cores.
pub fn worker_count(config: &ExperimentConfig) -> usize {
    if let Ok(value) = std::env::var("PLANGR_WORKERS") {
        if let Ok(n) = value.parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    config.workers.unwrap_or(0) // 0 = rayon default (all cores)
}

/// Map queries in parallel on a dedicated pool, preserving input order.
pub fn par_map_queries<T: Send>(
    config: &ExperimentConfig,
    queries: &[Query],
    f: impl Fn(&Query) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(config))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    pool.install(|| queries.par_iter().map(&f).collect())
}
