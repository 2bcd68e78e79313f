//! Per-query ranked result lists, the unit consumed by metrics and diagnostics.

use crate::error::{Error, Result};

/// One ranked result.
#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub doc_id: String,
    pub score: f64,
    /// 1-based rank.
    pub rank: usize,
}

/// Ranked (doc_id, score) list for one query. Ranks are consecutive from 1,
/// scores are non-increasing, and doc ids are unique.
#[derive(Debug, Clone, PartialEq)]
pub struct RunList {
    pub qid: String,
    entries: Vec<RunEntry>,
}

impl RunList {
    /// Build from an already-ranked list, validating the invariants.
    pub fn from_ranked(qid: impl Into<String>, ranked: Vec<(String, f64)>) -> Result<Self> {
        let qid = qid.into();
        let mut entries = Vec::with_capacity(ranked.len());
        let mut prev_score = f64::INFINITY;
        let mut seen = std::collections::HashSet::new();
        for (i, (doc_id, score)) in ranked.into_iter().enumerate() {
            if !score.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "run for '{qid}': non-finite score for '{doc_id}'"
                )));
            }
            if score > prev_score {
                return Err(Error::InvalidArgument(format!(
                    "run for '{qid}': score order violated at '{doc_id}' ({score} > {prev_score})"
                )));
            }
            if !seen.insert(doc_id.clone()) {
                return Err(Error::InvalidArgument(format!(
                    "run for '{qid}': duplicate doc '{doc_id}'"
                )));
            }
            prev_score = score;
            entries.push(RunEntry {
                doc_id,
                score,
                rank: i + 1,
            });
        }
        Ok(Self { qid, entries })
    }

    pub fn entries(&self) -> &[RunEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// 1-based rank of a document, if present.
    pub fn rank_of(&self, doc_id: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.doc_id == doc_id)
            .map(|e| e.rank)
    }

    /// The first `k` entries.
    pub fn top_k(&self, k: usize) -> &[RunEntry] {
        &self.entries[..self.entries.len().min(k)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_are_assigned_consecutively() {
        let run = RunList::from_ranked(
            "q1",
            vec![("a".into(), 2.0), ("b".into(), 1.0), ("c".into(), 1.0)],
        )
        .unwrap();
        assert_eq!(
            run.entries().iter().map(|e| e.rank).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
        assert_eq!(run.rank_of("b"), Some(2));
        assert_eq!(run.rank_of("z"), None);
    }

    #[test]
    fn increasing_scores_rejected() {
        let err =
            RunList::from_ranked("q1", vec![("a".into(), 1.0), ("b".into(), 2.0)]).unwrap_err();
        assert!(err.to_string().contains("score order"), "got: {err}");
    }

    #[test]
    fn duplicate_doc_rejected() {
        let err =
            RunList::from_ranked("q1", vec![("a".into(), 1.0), ("a".into(), 1.0)]).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "got: {err}");
    }
}
