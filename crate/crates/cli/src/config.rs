//! Experiment configuration: one JSON file drives every command.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use plangr_core::decode::FinalScore;
use plangr_core::error::{Error, Result};
use plangr_core::metrics::Metric;
use plangr_core::variations::VariationKind;

/// Scoring backend selection.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ScorerSpec {
    /// Hash-based deterministic scorer.
    Synthetic { seed: u64 },
    /// Linear scorer backed by a table file.
    Table { path: PathBuf },
    /// Child process speaking the line-delimited JSON protocol.
    External {
        command: String,
        #[serde(default = "default_pool_size")]
        pool_size: usize,
        #[serde(default = "default_timeout_secs")]
        timeout_secs: u64,
    },
}

fn default_pool_size() -> usize {
    1
}

fn default_timeout_secs() -> u64 {
    30
}

impl Default for ScorerSpec {
    fn default() -> Self {
        ScorerSpec::Synthetic { seed: 42 }
    }
}

/// Full experiment configuration. Every field has a default so a minimal
/// config only names its input files.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ExperimentConfig {
    // Corpus-side artifacts.
    pub docids_path: Option<PathBuf>,
    pub set_docids_path: Option<PathBuf>,
    pub corpus_config_path: Option<PathBuf>,
    // Query-side inputs.
    pub queries_path: Option<PathBuf>,
    pub qrels_path: Option<PathBuf>,
    pub scorer: ScorerSpec,
    /// Beam size.
    pub k: usize,
    /// Planning pool size.
    pub n: usize,
    /// Optional set-docid truncation applied at load time.
    pub m_truncation: Option<usize>,
    /// Candidate-overlap truncation depth.
    #[serde(rename = "K")]
    pub overlap_k: usize,
    /// Planner-token truncation depth.
    pub ell: usize,
    /// Collapse effectiveness-drop threshold.
    pub delta: f64,
    /// Collapse stability threshold percentile of CandOverlap.
    pub tau_percentile: f64,
    /// Variation seeds.
    pub seeds: Vec<u64>,
    /// Variation kinds.
    pub kinds: Vec<VariationKind>,
    pub output_dir: PathBuf,
    /// Score ordering the final decode ranking.
    pub final_score: FinalScore,
    /// Binary relevance threshold for MRR/Recall.
    pub rel_threshold: u32,
    /// Effectiveness metric M used by diagnostics.
    pub metric: Metric,
    /// Metric cutoff (the @k).
    pub cutoff: usize,
    /// Depth of written run files.
    pub run_depth: usize,
    /// Condition label; defaults to the queries file stem.
    pub split: Option<String>,
    /// Worker threads; `PLANGR_WORKERS` overrides, default = all cores.
    pub workers: Option<usize>,
    /// Jaccard value assigned when both token sets are empty.
    pub empty_jaccard: f64,
    // Optional lexicon overrides (built-in lexicon otherwise).
    pub synonyms_path: Option<PathBuf>,
    pub paraphrase_rules_path: Option<PathBuf>,
    pub naturality_path: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            docids_path: None,
            set_docids_path: None,
            corpus_config_path: None,
            queries_path: None,
            qrels_path: None,
            scorer: ScorerSpec::default(),
            k: 100,
            n: 1000,
            m_truncation: None,
            overlap_k: 100,
            ell: 100,
            delta: 0.05,
            tau_percentile: 10.0,
            seeds: vec![1999, 5, 27, 2016, 2026],
            kinds: VariationKind::ALL.to_vec(),
            output_dir: PathBuf::from("out"),
            final_score: FinalScore::Combined,
            rel_threshold: 1,
            metric: Metric::Mrr,
            cutoff: 10,
            run_depth: 100,
            split: None,
            workers: None,
            empty_jaccard: 1.0,
            synonyms_path: None,
            paraphrase_rules_path: None,
            naturality_path: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.n < 1 || self.overlap_k < 1 || self.ell < 1 {
            return Err(Error::InvalidArgument(
                "k, n, K and ell must all be >= 1".into(),
            ));
        }
        if self.cutoff < 1 || self.run_depth < 1 {
            return Err(Error::InvalidArgument("cutoff and run_depth must be >= 1".into()));
        }
        if self.run_depth > self.n {
            return Err(Error::InvalidArgument(format!(
                "run_depth {} exceeds planning pool n = {}",
                self.run_depth, self.n
            )));
        }
        if !(0.0..=100.0).contains(&self.tau_percentile) {
            return Err(Error::InvalidArgument(format!(
                "tau_percentile {} outside [0, 100]",
                self.tau_percentile
            )));
        }
        if self.delta < 0.0 {
            return Err(Error::InvalidArgument("delta must be >= 0".into()));
        }
        if self.seeds.is_empty() || self.kinds.is_empty() {
            return Err(Error::InvalidArgument("seeds and kinds must be nonempty".into()));
        }
        Ok(())
    }

    /// Canonical JSON used for hashing and golden tests.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Resolve the condition label from config or the queries file stem.
    pub fn split_label(&self) -> String {
        if let Some(split) = &self.split {
            return split.clone();
        }
        self.queries_path
            .as_ref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "queries".to_string())
    }

    fn required_path<'a>(&self, field: &str, value: &'a Option<PathBuf>) -> Result<&'a Path> {
        value
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument(format!("config is missing {field}")))
    }

    pub fn docids(&self) -> Result<&Path> {
        self.required_path("docids_path", &self.docids_path)
    }

    pub fn set_docids(&self) -> Result<&Path> {
        self.required_path("set_docids_path", &self.set_docids_path)
    }

    pub fn corpus_config(&self) -> Result<&Path> {
        self.required_path("corpus_config_path", &self.corpus_config_path)
    }

    pub fn queries(&self) -> Result<&Path> {
        self.required_path("queries_path", &self.queries_path)
    }

    pub fn qrels(&self) -> Result<&Path> {
        self.required_path("qrels_path", &self.qrels_path)
    }
}
