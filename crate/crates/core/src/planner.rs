//! Simultaneous (single-pass) decoding: scores every document by aggregating
//! query weights over its set docid, forms the planning set and the
//! top-token set, and ranks documents for planning-only retrieval.
//!
//! Tie-breaking everywhere is (descending score, ascending doc_id), a total
//! order, so planning sets and runs are reproducible.

use std::collections::HashMap;

use crate::corpus::{Corpus, Query, SetDocid};
use crate::error::{Error, Result};
use crate::run::RunList;
use crate::scorer::{PlannerWeights, Scorer};

/// Query-dependent top-n documents by simultaneous score, the source of the
/// look-ahead bonus.
#[derive(Debug, Clone)]
pub struct PlanningSet {
    entries: Vec<(String, f64)>,
    by_doc: HashMap<String, f64>,
    n: usize,
}

impl PlanningSet {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
            by_doc: HashMap::new(),
            n: 0,
        }
    }

    /// Build from entries already in planning order (descending score,
    /// ties by ascending doc_id). The order is trusted, not re-sorted.
    pub fn from_sorted_entries(entries: Vec<(String, f64)>) -> Self {
        let by_doc = entries.iter().cloned().collect();
        let n = entries.len();
        Self {
            entries,
            by_doc,
            n,
        }
    }

    /// Ordered (doc_id, score) entries, best first.
    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    /// Simultaneous score of a planned document, `None` if unplanned.
    pub fn get(&self, doc_id: &str) -> Option<f64> {
        self.by_doc.get(doc_id).copied()
    }

    /// The first `k` entries of the planning order (D_K).
    pub fn top_k(&self, k: usize) -> &[(String, f64)] {
        &self.entries[..self.entries.len().min(k)]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn requested_n(&self) -> usize {
        self.n
    }
}

/// The top-l planner-vocabulary tokens under query weights (P_l), with their
/// weights. Smaller than l only when fewer than l strictly positive weights
/// exist.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerTokenSet {
    entries: Vec<(u32, f64)>,
}

impl PlannerTokenSet {
    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn tokens(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|&(t, _)| t)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Simultaneous score: the sum of query weights over the document's planning
/// tokens. Missing tokens contribute zero; the set docid's own stored
/// weights are not used.
pub fn simul_score(h_q: &PlannerWeights, t_d: &SetDocid) -> f64 {
    t_d.tokens().map(|t| h_q.get(t)).sum()
}

fn rank_documents(corpus: &Corpus, h_q: &PlannerWeights) -> Vec<(String, f64)> {
    let mut scored: Vec<(String, f64)> = corpus
        .documents()
        .iter()
        .map(|d| (d.doc_id.clone(), simul_score(h_q, &d.set_docid)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored
}

fn truncate_into_planning_set(mut scored: Vec<(String, f64)>, n: usize) -> PlanningSet {
    scored.truncate(n);
    let by_doc = scored.iter().cloned().collect();
    PlanningSet {
        entries: scored,
        by_doc,
        n,
    }
}

/// Score every document with [`simul_score`] and keep the top n under
/// (descending score, ascending doc_id).
pub fn plan(query: &Query, corpus: &Corpus, scorer: &dyn Scorer, n: usize) -> Result<PlanningSet> {
    if n < 1 {
        return Err(Error::InvalidArgument("planning set size n must be >= 1".into()));
    }
    let h_q = scorer.planner_weights(query)?;
    Ok(truncate_into_planning_set(rank_documents(corpus, &h_q), n))
}

/// Inverted postings from planner token to documents carrying it. An
/// optional drop-in for [`plan`] on sparse queries; output is identical.
#[derive(Debug)]
pub struct PlannerIndex {
    postings: HashMap<u32, Vec<u32>>,
}

impl PlannerIndex {
    pub fn build(corpus: &Corpus) -> Self {
        let mut postings: HashMap<u32, Vec<u32>> = HashMap::new();
        for (i, doc) in corpus.documents().iter().enumerate() {
            for t in doc.set_docid.tokens() {
                postings.entry(t).or_default().push(i as u32);
            }
        }
        Self { postings }
    }
}

/// [`plan`] via the inverted index: documents sharing no query token keep
/// score zero without being visited. Produces exactly the same planning set.
pub fn plan_indexed(
    query: &Query,
    corpus: &Corpus,
    index: &PlannerIndex,
    scorer: &dyn Scorer,
    n: usize,
) -> Result<PlanningSet> {
    if n < 1 {
        return Err(Error::InvalidArgument("planning set size n must be >= 1".into()));
    }
    let h_q = scorer.planner_weights(query)?;
    let mut acc: HashMap<u32, f64> = HashMap::new();
    for (token, w) in h_q.iter() {
        if let Some(docs) = index.postings.get(&token) {
            for &d in docs {
                *acc.entry(d).or_insert(0.0) += w;
            }
        }
    }
    let mut scored: Vec<(String, f64)> = corpus
        .documents()
        .iter()
        .enumerate()
        .map(|(i, d)| {
            (
                d.doc_id.clone(),
                acc.get(&(i as u32)).copied().unwrap_or(0.0),
            )
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(truncate_into_planning_set(scored, n))
}

/// The l highest-weight strictly positive tokens of h_q, ties by ascending id.
pub fn top_tokens(h_q: &PlannerWeights, l: usize) -> Result<PlannerTokenSet> {
    if l < 1 {
        return Err(Error::InvalidArgument("l must be >= 1".into()));
    }
    let mut entries: Vec<(u32, f64)> = h_q.iter().filter(|&(_, w)| w > 0.0).collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    entries.truncate(l);
    Ok(PlannerTokenSet { entries })
}

/// Planning-only retrieval: rank by simultaneous score, truncated at `depth`.
pub fn simul_only_run(
    queries: &[Query],
    corpus: &Corpus,
    scorer: &dyn Scorer,
    n: usize,
    depth: usize,
) -> Result<Vec<RunList>> {
    if depth > n {
        return Err(Error::InvalidArgument(format!(
            "run depth {depth} exceeds planning pool n = {n}"
        )));
    }
    queries
        .iter()
        .map(|q| {
            let set = plan(q, corpus, scorer, n)?;
            let ranked: Vec<(String, f64)> = set.top_k(depth).to_vec();
            RunList::from_ranked(q.qid.clone(), ranked)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic_corpus, CorpusConfig, SyntheticSpec};
    use crate::rng::SplitMix64;
    use crate::scorer::SyntheticScorer;

    fn fixture_corpus() -> Corpus {
        generate_synthetic_corpus(SyntheticSpec {
            num_docs: 8,
            config: CorpusConfig {
                seq_len: 3,
                docid_vocab: 4,
                planner_vocab: 32,
                set_size: 4,
            },
            vector_dim: 8,
            seed: 7,
        })
        .unwrap()
        .0
    }

    #[test]
    fn simul_score_sums_matching_weights() {
        let t_d = SetDocid::from_pairs(vec![(1, 1.0), (2, 0.5)]).unwrap();
        let h_q: PlannerWeights = [(1, 0.5), (2, 0.25), (9, 9.0)].into_iter().collect();
        assert_eq!(simul_score(&h_q, &t_d), 0.75);
        let disjoint: PlannerWeights = [(7, 3.0)].into_iter().collect();
        assert_eq!(simul_score(&disjoint, &t_d), 0.0);
    }

    #[test]
    fn simul_score_matches_reordered_resummation() {
        let mut rng = SplitMix64::new(5);
        let tokens: Vec<(u32, f64)> = (0..64).map(|t| (t, 1.0)).collect();
        let t_d = SetDocid::from_pairs(tokens).unwrap();
        let h_q: PlannerWeights = (0..64).map(|t| (t, rng.next_f64())).collect();
        let forward = simul_score(&h_q, &t_d);
        let mut ids: Vec<u32> = t_d.tokens().collect();
        ids.reverse();
        let backward: f64 = ids.iter().map(|&t| h_q.get(t)).sum();
        assert!((forward - backward).abs() < 1e-12);
    }

    #[test]
    fn plan_with_large_n_orders_all_documents() {
        let corpus = fixture_corpus();
        let scorer = SyntheticScorer::new(3, 4, 32);
        let q = Query::new("q1", "alpha beta gamma");
        let set = plan(&q, &corpus, &scorer, 100).unwrap();
        assert_eq!(set.len(), corpus.len());
        for w in set.entries().windows(2) {
            assert!(
                w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0),
                "order violated: {w:?}"
            );
        }
    }

    #[test]
    fn plan_matches_exhaustive_sort_oracle() {
        let corpus = fixture_corpus();
        let scorer = SyntheticScorer::new(3, 4, 32);
        let q = Query::new("q1", "some words here");
        let set = plan(&q, &corpus, &scorer, 3).unwrap();
        // Oracle: brute-force score everything, sort, truncate.
        let h_q = scorer.planner_weights(&q).unwrap();
        let mut scored: Vec<(String, f64)> = corpus
            .documents()
            .iter()
            .map(|d| (d.doc_id.clone(), simul_score(&h_q, &d.set_docid)))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        scored.truncate(3);
        assert_eq!(set.entries(), scored.as_slice());
    }

    #[test]
    fn planning_set_is_prefix_monotone_in_n() {
        let corpus = fixture_corpus();
        let scorer = SyntheticScorer::new(9, 4, 32);
        let q = Query::new("q1", "prefix property probe");
        let small = plan(&q, &corpus, &scorer, 3).unwrap();
        let large = plan(&q, &corpus, &scorer, 6).unwrap();
        assert_eq!(small.entries(), &large.entries()[..3]);
    }

    #[test]
    fn scaling_weights_scales_scores_but_not_order() {
        let corpus = fixture_corpus();
        let scorer = SyntheticScorer::new(11, 4, 32);
        let q = Query::new("q1", "scale covariance probe");
        let h_q = scorer.planner_weights(&q).unwrap();
        let alpha = 3.5;
        let scaled: PlannerWeights = h_q.iter().map(|(t, w)| (t, w * alpha)).collect();
        let base = rank_documents(&corpus, &h_q);
        let scaled_rank = rank_documents(&corpus, &scaled);
        for (b, s) in base.iter().zip(&scaled_rank) {
            assert_eq!(b.0, s.0);
            assert!((s.1 - alpha * b.1).abs() < 1e-9);
        }
    }

    #[test]
    fn truncated_set_docids_never_score_higher() {
        let corpus = fixture_corpus();
        let truncated = corpus.with_truncated_set_docids(2).unwrap();
        let scorer = SyntheticScorer::new(13, 4, 32);
        for text in ["first probe", "second probe text", "third"] {
            let q = Query::new("q", text);
            let h_q = scorer.planner_weights(&q).unwrap();
            for (full, cut) in corpus.documents().iter().zip(truncated.documents()) {
                let s_full = simul_score(&h_q, &full.set_docid);
                let s_cut = simul_score(&h_q, &cut.set_docid);
                assert!(
                    s_cut <= s_full + 1e-12,
                    "truncation raised a score: {s_cut} > {s_full}"
                );
            }
        }
    }

    #[test]
    fn indexed_plan_is_identical_to_linear_scan() {
        let corpus = fixture_corpus();
        let index = PlannerIndex::build(&corpus);
        let scorer = SyntheticScorer::new(17, 4, 32);
        for text in ["", "one", "one two three four five"] {
            let q = Query::new("q", text);
            let linear = plan(&q, &corpus, &scorer, 5).unwrap();
            let indexed = plan_indexed(&q, &corpus, &index, &scorer, 5).unwrap();
            assert_eq!(linear.entries(), indexed.entries(), "text: {text:?}");
        }
    }

    #[test]
    fn top_tokens_examples() {
        let h: PlannerWeights = [(1, 2.0), (2, 1.0), (3, 0.5)].into_iter().collect();
        assert_eq!(top_tokens(&h, 100).unwrap().len(), 3);
        assert_eq!(top_tokens(&h, 1).unwrap().entries(), &[(1, 2.0)]);
        // Weight ties resolve to the lowest ids, matching a stable sort oracle.
        let tied: PlannerWeights = [(9, 1.0), (2, 1.0), (5, 1.0)].into_iter().collect();
        let picked: Vec<u32> = top_tokens(&tied, 2).unwrap().tokens().collect();
        assert_eq!(picked, vec![2, 5]);
    }

    #[test]
    fn empty_weights_rank_by_ascending_doc_id() {
        let corpus = fixture_corpus();
        let scorer = SyntheticScorer::new(1, 4, 32);
        let queries = vec![Query::new("q1", "")];
        let runs = simul_only_run(&queries, &corpus, &scorer, 8, 8).unwrap();
        let ids: Vec<&str> = runs[0].entries().iter().map(|e| e.doc_id.as_str()).collect();
        let mut want: Vec<&str> = corpus.documents().iter().map(|d| d.doc_id.as_str()).collect();
        want.sort_unstable();
        assert_eq!(ids, want);
        assert!(runs[0].entries().iter().all(|e| e.score == 0.0));
    }

    #[test]
    fn run_depth_cannot_exceed_pool() {
        let corpus = fixture_corpus();
        let scorer = SyntheticScorer::new(1, 4, 32);
        let queries = vec![Query::new("q1", "x")];
        assert!(simul_only_run(&queries, &corpus, &scorer, 4, 5).is_err());
    }
}
