//! Ranking effectiveness metrics (MRR@k, NDCG@k, Recall@k) and TREC-format
//! run/qrels I/O.
//!
//! Binary relevance for MRR and Recall means grade >= `rel_threshold`
//! (default 1, exposed as a flag since conventions differ). NDCG uses
//! trec_eval-compatible gains `2^grade - 1` with discount `1/log2(rank+1)`.
//! Queries missing from the qrels, and queries whose ideal DCG (or relevant
//! set) is empty, are excluded from the mean and counted, never silently
//! scored zero.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Qrels;
use crate::error::{Error, Result};
use crate::run::RunList;

/// Which effectiveness metric to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Mrr,
    Ndcg,
    Recall,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Mrr => write!(f, "mrr"),
            Metric::Ndcg => write!(f, "ndcg"),
            Metric::Recall => write!(f, "recall"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mrr" => Ok(Metric::Mrr),
            "ndcg" => Ok(Metric::Ndcg),
            "recall" => Ok(Metric::Recall),
            other => Err(Error::InvalidArgument(format!(
                "unknown metric '{other}' (expected mrr, ndcg or recall)"
            ))),
        }
    }
}

/// Per-query values plus their arithmetic mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    pub cutoff: usize,
    pub mean: f64,
    pub per_query: std::collections::BTreeMap<String, f64>,
    /// Queries dropped because they had no usable judgments.
    pub excluded: usize,
}

/// Per-query value, or `None` when the query must be excluded.
pub fn per_query_metric(
    metric: Metric,
    run: &RunList,
    qrels: &Qrels,
    k: usize,
    rel_threshold: u32,
) -> Option<f64> {
    let judged = qrels.judged(&run.qid)?;
    match metric {
        Metric::Mrr => {
            let has_relevant = judged.values().any(|&g| g >= rel_threshold);
            if !has_relevant {
                return None;
            }
            for entry in run.top_k(k) {
                if qrels.grade(&run.qid, &entry.doc_id) >= rel_threshold {
                    return Some(1.0 / entry.rank as f64);
                }
            }
            Some(0.0)
        }
        Metric::Recall => {
            let relevant: HashSet<&str> = judged
                .iter()
                .filter(|&(_, &g)| g >= rel_threshold)
                .map(|(d, _)| d.as_str())
                .collect();
            if relevant.is_empty() {
                return None;
            }
            let hit = run
                .top_k(k)
                .iter()
                .filter(|e| relevant.contains(e.doc_id.as_str()))
                .count();
            Some(hit as f64 / relevant.len() as f64)
        }
        Metric::Ndcg => {
            let mut grades: Vec<u32> = judged.values().copied().collect();
            grades.sort_unstable_by(|a, b| b.cmp(a));
            let ideal: f64 = grades
                .iter()
                .take(k)
                .enumerate()
                .map(|(i, &g)| gain(g) / discount(i + 1))
                .sum();
            if ideal <= 0.0 {
                return None;
            }
            let dcg: f64 = run
                .top_k(k)
                .iter()
                .map(|e| gain(qrels.grade(&run.qid, &e.doc_id)) / discount(e.rank))
                .sum();
            Some(dcg / ideal)
        }
    }
}

fn gain(grade: u32) -> f64 {
    2f64.powi(grade as i32) - 1.0
}

fn discount(rank: usize) -> f64 {
    ((rank + 1) as f64).log2()
}

/// Evaluate a metric over a set of per-query runs.
pub fn evaluate(
    metric: Metric,
    runs: &[RunList],
    qrels: &Qrels,
    k: usize,
    rel_threshold: u32,
) -> MetricReport {
    let mut per_query = std::collections::BTreeMap::new();
    let mut excluded = 0usize;
    for run in runs {
        match per_query_metric(metric, run, qrels, k, rel_threshold) {
            Some(v) => {
                per_query.insert(run.qid.clone(), v);
            }
            None => excluded += 1,
        }
    }
    let mean = if per_query.is_empty() {
        0.0
    } else {
        per_query.values().sum::<f64>() / per_query.len() as f64
    };
    MetricReport {
        metric: metric.to_string(),
        cutoff: k,
        mean,
        per_query,
        excluded,
    }
}

pub fn mrr_at_k(runs: &[RunList], qrels: &Qrels, k: usize, rel_threshold: u32) -> MetricReport {
    evaluate(Metric::Mrr, runs, qrels, k, rel_threshold)
}

pub fn ndcg_at_k(runs: &[RunList], qrels: &Qrels, k: usize) -> MetricReport {
    evaluate(Metric::Ndcg, runs, qrels, k, 1)
}

pub fn recall_at_k(runs: &[RunList], qrels: &Qrels, k: usize, rel_threshold: u32) -> MetricReport {
    evaluate(Metric::Recall, runs, qrels, k, rel_threshold)
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Read a 6-column TREC run (`qid Q0 doc_id rank score tag`). The reader is
/// tolerant of arbitrary whitespace, blank lines and `#` comments, but
/// rejects rank gaps and score-order violations. Runs come back sorted by
/// qid; the tag of the first line is returned.
pub fn read_run(path: &Path) -> Result<(Vec<RunList>, String)> {
    let text = fs::read_to_string(path)?;
    let mut tag = String::new();
    // (qid, entries) in first-seen order.
    let mut order: Vec<String> = Vec::new();
    let mut grouped: std::collections::HashMap<String, Vec<(String, f64, usize)>> =
        std::collections::HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 6 fields, got {}", fields.len()),
            ));
        }
        let rank: usize = fields[3]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad rank '{}'", fields[3])))?;
        let score: f64 = fields[4]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad score '{}'", fields[4])))?;
        if tag.is_empty() {
            tag = fields[5].to_string();
        }
        if !grouped.contains_key(fields[0]) {
            order.push(fields[0].to_string());
        }
        grouped
            .entry(fields[0].to_string())
            .or_default()
            .push((fields[2].to_string(), score, rank));
    }
    let mut runs = Vec::with_capacity(order.len());
    for qid in order {
        let entries = grouped.remove(&qid).unwrap();
        for (i, &(_, _, rank)) in entries.iter().enumerate() {
            if rank != i + 1 {
                return Err(Error::InvalidArgument(format!(
                    "run for '{qid}': rank gap (found rank {rank} at position {})",
                    i + 1
                )));
            }
        }
        for pair in entries.windows(2) {
            if pair[1].1 > pair[0].1 {
                return Err(Error::InvalidArgument(format!(
                    "run for '{qid}': score order violated between '{}' and '{}'",
                    pair[0].0, pair[1].0
                )));
            }
        }
        let ranked: Vec<(String, f64)> =
            entries.into_iter().map(|(d, s, _)| (d, s)).collect();
        runs.push(RunList::from_ranked(qid, ranked)?);
    }
    runs.sort_by(|a, b| a.qid.cmp(&b.qid));
    Ok((runs, tag))
}

/// Write runs in canonical TREC form: sorted by qid, scores with 6 decimals.
pub fn write_run(path: &Path, runs: &[RunList], tag: &str) -> Result<()> {
    let mut sorted: Vec<&RunList> = runs.iter().collect();
    sorted.sort_by(|a, b| a.qid.cmp(&b.qid));
    let mut out = String::new();
    for run in sorted {
        for entry in run.entries() {
            out.push_str(&format!(
                "{} Q0 {} {} {:.6} {}\n",
                run.qid, entry.doc_id, entry.rank, entry.score, tag
            ));
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read standard 4-column TREC qrels (`qid 0 doc_id grade`).
pub fn read_qrels(path: &Path) -> Result<Qrels> {
    let text = fs::read_to_string(path)?;
    let mut qrels = Qrels::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        let grade: u32 = fields[3]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad grade '{}'", fields[3])))?;
        qrels.insert(fields[0], fields[2], grade);
    }
    Ok(qrels)
}

/// Write qrels in canonical form (sorted by qid, then doc_id).
pub fn write_qrels(path: &Path, qrels: &Qrels) -> Result<()> {
    let mut out = String::new();
    for qid in qrels.qids() {
        for (doc_id, grade) in qrels.judged(qid).unwrap() {
            out.push_str(&format!("{qid} 0 {doc_id} {grade}\n"));
        }
    }
    fs::write(path, out)?;
    Ok(())
}
