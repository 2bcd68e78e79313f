//! Trie-constrained beam search scoring prefixes by sequential score plus the
//! planning look-ahead bonus, with switches for unguided decoding and
//! counterfactual plan swapping, plus an exhaustive oracle.
//!
//! The bonus of a prefix is the best simultaneous score among planned
//! documents still completable from it, or zero when none remain. Beam
//! pruning ranks prefixes by sequential score + bonus; the final ranking at
//! depth L uses the combined score by default, with a flag to rank by the
//! sequential score alone.

use crate::corpus::{Corpus, Query};
use crate::error::{Error, Result};
use crate::planner::PlanningSet;
use crate::run::RunList;
use crate::scorer::Scorer;
use crate::trie::DocidTrie;

/// Upper bound on corpus size for the exhaustive oracle.
const ORACLE_MAX_DOCS: usize = 100_000;

/// Which score orders the final result list.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum FinalScore {
    /// Sequential score plus bonus (the pruning score).
    #[default]
    Combined,
    /// Sequential score alone.
    Seq,
}

impl std::str::FromStr for FinalScore {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "combined" => Ok(FinalScore::Combined),
            "seq" => Ok(FinalScore::Seq),
            other => Err(Error::InvalidArgument(format!(
                "unknown final score '{other}' (expected seq or combined)"
            ))),
        }
    }
}

/// One beam hypothesis. `combined` is exactly `seq_score + bonus`.
#[derive(Debug, Clone)]
pub struct BeamEntry {
    pub prefix: Vec<u32>,
    pub seq_score: f64,
    pub bonus: f64,
    pub combined: f64,
    node: u32,
}

/// Beam search switches.
#[derive(Debug, Clone, Copy, Default)]
pub struct DecodeOptions<'a> {
    /// Beam width k.
    pub beam_size: usize,
    /// When false the bonus is identically zero (unguided ablation).
    pub use_bonus: bool,
    /// Substitute planning set (the counterfactual "swapped" arm).
    pub plan_override: Option<&'a PlanningSet>,
    /// Results retained after the final ranking; must not exceed beam_size.
    pub output_depth: usize,
    pub final_score: FinalScore,
}

impl<'a> DecodeOptions<'a> {
    pub fn new(beam_size: usize, output_depth: usize) -> Self {
        Self {
            beam_size,
            use_bonus: true,
            plan_override: None,
            output_depth,
            final_score: FinalScore::Combined,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.beam_size < 1 {
            return Err(Error::InvalidArgument("beam_size must be >= 1".into()));
        }
        if self.output_depth < 1 || self.output_depth > self.beam_size {
            return Err(Error::InvalidArgument(format!(
                "output_depth must be in [1, beam_size]; got {} with k={}",
                self.output_depth, self.beam_size
            )));
        }
        Ok(())
    }
}

/// Score a complete docid: the sum over steps of the step logit at each token.
pub fn score_docid(query: &Query, docid: &[u32], scorer: &dyn Scorer) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..docid.len() {
        let logits = scorer.step_logits(query, &docid[..i])?;
        let token = docid[i] as usize;
        if token >= logits.len() {
            return Err(Error::Scorer(format!(
                "step {} returned {} logits but token {} was requested",
                i + 1,
                logits.len(),
                token
            )));
        }
        total += logits[token];
    }
    Ok(total)
}

/// Look-ahead bonus of a prefix: the maximum simultaneous score among
/// planned documents whose docid extends the prefix, zero when none does.
pub fn lookahead_bonus(prefix: &[u32], planning_set: &PlanningSet, trie: &DocidTrie) -> f64 {
    let mut best: Option<f64> = None;
    for doc_id in trie.docs_under(prefix) {
        if let Some(score) = planning_set.get(doc_id) {
            best = Some(match best {
                Some(b) => b.max(score),
                None => score,
            });
        }
    }
    best.unwrap_or(0.0)
}

/// Per-node maximum planned score over each subtree, computed in one pass
/// over the planning set (O(n * L)) so the beam loop reads bonuses in O(1).
/// Each planned document walks its leaf-to-root path, stopping as soon as an
/// ancestor already holds a score at least as large (that ancestor and
/// everything above it were set by a better-planned document sharing the
/// path). `NEG_INFINITY` marks subtrees with no planned document; output is
/// identical to [`lookahead_bonus`].
fn subtree_max(trie: &DocidTrie, plan: &PlanningSet) -> Vec<f64> {
    let mut max = vec![f64::NEG_INFINITY; trie.node_count()];
    for (doc_id, score) in plan.entries() {
        let Some(doc_idx) = trie.doc_idx(doc_id) else {
            continue;
        };
        let mut node = trie.leaf_of(doc_idx);
        loop {
            if max[node as usize] >= *score {
                break;
            }
            max[node as usize] = *score;
            if node == 0 {
                break;
            }
            node = trie.parent(node);
        }
    }
    max
}

/// Beam search of width k over trie edges. Every candidate child prefix gets
/// its sequential score via the prefix recursion and its bonus recomputed
/// per prefix; the top k by (combined, then lexicographically smallest
/// prefix) survive each step. At depth L the complete docids are ranked by
/// the selected final score (ties by ascending doc_id) and truncated to
/// `output_depth`.
pub fn decode(
    query: &Query,
    trie: &DocidTrie,
    scorer: &dyn Scorer,
    planning_set: &PlanningSet,
    options: &DecodeOptions,
) -> Result<RunList> {
    options.validate()?;
    if trie.leaf_count() == 0 {
        return Err(Error::InvalidArgument("cannot decode over an empty trie".into()));
    }
    let effective_plan: Option<&PlanningSet> = if options.use_bonus {
        Some(options.plan_override.unwrap_or(planning_set))
    } else {
        None
    };
    let node_max = effective_plan.map(|p| subtree_max(trie, p));
    let bonus_at = |node: u32| -> f64 {
        match &node_max {
            Some(m) => {
                let v = m[node as usize];
                if v == f64::NEG_INFINITY {
                    0.0
                } else {
                    v
                }
            }
            None => 0.0,
        }
    };

    let root_bonus = bonus_at(0);
    let mut beam = vec![BeamEntry {
        prefix: Vec::new(),
        seq_score: 0.0,
        bonus: root_bonus,
        combined: root_bonus,
        node: 0,
    }];

    for _ in 0..trie.depth() {
        let mut candidates: Vec<BeamEntry> = Vec::with_capacity(beam.len() * 4);
        for entry in &beam {
            let logits = scorer.step_logits(query, &entry.prefix)?;
            for &(token, child) in trie.children(entry.node) {
                let idx = token as usize;
                if idx >= logits.len() {
                    return Err(Error::Scorer(format!(
                        "step {} returned {} logits but token {token} was requested",
                        entry.prefix.len() + 1,
                        logits.len()
                    )));
                }
                let seq_score = entry.seq_score + logits[idx];
                let bonus = bonus_at(child);
                let mut prefix = entry.prefix.clone();
                prefix.push(token);
                candidates.push(BeamEntry {
                    prefix,
                    seq_score,
                    bonus,
                    combined: seq_score + bonus,
                    node: child,
                });
            }
        }
        candidates.sort_by(|a, b| {
            b.combined
                .total_cmp(&a.combined)
                .then_with(|| a.prefix.cmp(&b.prefix))
        });
        candidates.truncate(options.beam_size);
        beam = candidates;
    }

    // Every surviving prefix has depth L and therefore sits on a leaf.
    let mut ranked: Vec<(String, f64)> = beam
        .into_iter()
        .map(|entry| {
            let doc_idx = trie
                .doc_at(entry.node)
                .expect("complete prefix must end at a leaf");
            let score = match options.final_score {
                FinalScore::Combined => entry.combined,
                FinalScore::Seq => entry.seq_score,
            };
            (trie.doc_id(doc_idx).to_string(), score)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(options.output_depth);
    RunList::from_ranked(query.qid.clone(), ranked)
}

/// Score every docid directly, with no beam: the ground truth ranking for
/// sequential scores. Guarded to corpora small enough to enumerate.
pub fn exhaustive_oracle(
    query: &Query,
    corpus: &Corpus,
    scorer: &dyn Scorer,
    depth: usize,
) -> Result<RunList> {
    if corpus.len() > ORACLE_MAX_DOCS {
        return Err(Error::InvalidArgument(format!(
            "exhaustive oracle refuses corpora over {ORACLE_MAX_DOCS} docs ({} given)",
            corpus.len()
        )));
    }
    let mut ranked: Vec<(String, f64)> = Vec::with_capacity(corpus.len());
    for doc in corpus.documents() {
        let score = score_docid(query, doc.seq_docid.tokens(), scorer)?;
        ranked.push((doc.doc_id.clone(), score));
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(depth);
    RunList::from_ranked(query.qid.clone(), ranked)
}

/// Decode a perturbed query under another query's plan: the counterfactual
/// "swapped" arm. Identical sequential decoding; only the bonus source changes.
pub fn swap_decode(
    query: &Query,
    clean_plan: &PlanningSet,
    trie: &DocidTrie,
    scorer: &dyn Scorer,
    options: &DecodeOptions,
) -> Result<RunList> {
    let swapped = DecodeOptions {
        plan_override: Some(clean_plan),
        ..*options
    };
    decode(query, trie, scorer, clean_plan, &swapped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{
        generate_synthetic_corpus, Corpus, CorpusConfig, Document, Query, SequentialDocid,
        SetDocid, SyntheticSpec,
    };
    use crate::error::Result as CoreResult;
    use crate::planner::plan;
    use crate::rng::SplitMix64;
    use crate::scorer::{PlannerWeights, Scorer, StepLogits, SyntheticScorer};
    use crate::trie::build_trie;
    use std::collections::HashMap;

    /// Test scorer with explicit logits per prefix.
    struct FixtureScorer {
        by_prefix: HashMap<Vec<u32>, Vec<f64>>,
    }

    impl Scorer for FixtureScorer {
        fn planner_weights(&self, _query: &Query) -> CoreResult<PlannerWeights> {
            Ok(PlannerWeights::new())
        }
        fn step_logits(&self, _query: &Query, prefix: &[u32]) -> CoreResult<StepLogits> {
            Ok(self.by_prefix[prefix].clone())
        }
    }

    struct ZeroScorer(u32);

    impl Scorer for ZeroScorer {
        fn planner_weights(&self, _query: &Query) -> CoreResult<PlannerWeights> {
            Ok(PlannerWeights::new())
        }
        fn step_logits(&self, _query: &Query, _prefix: &[u32]) -> CoreResult<StepLogits> {
            Ok(vec![0.0; self.0 as usize])
        }
    }

    fn corpus_from_docids(seq_len: usize, vocab: u32, docids: &[(&str, Vec<u32>)]) -> Corpus {
        let config = CorpusConfig {
            seq_len,
            docid_vocab: vocab,
            planner_vocab: 8,
            set_size: 1,
        };
        let documents = docids
            .iter()
            .enumerate()
            .map(|(i, (id, toks))| Document {
                doc_id: id.to_string(),
                seq_docid: SequentialDocid::new(toks.clone()),
                set_docid: SetDocid::from_pairs(vec![(i as u32 % 8, 1.0)]).unwrap(),
                feature_vector: None,
            })
            .collect();
        Corpus::new(config, documents).unwrap()
    }

    fn synthetic(seed: u64) -> Corpus {
        generate_synthetic_corpus(SyntheticSpec {
            num_docs: 32,
            config: CorpusConfig {
                seq_len: 4,
                docid_vocab: 4,
                planner_vocab: 64,
                set_size: 4,
            },
            vector_dim: 8,
            seed,
        })
        .unwrap()
        .0
    }

    #[test]
    fn zero_scorer_scores_zero() {
        let q = Query::new("q", "anything");
        let s = ZeroScorer(4);
        assert_eq!(score_docid(&q, &[1, 2, 3], &s).unwrap(), 0.0);
    }

    #[test]
    fn score_docid_small_example() {
        let q = Query::new("q", "x");
        let s = FixtureScorer {
            by_prefix: [
                (vec![], vec![1.0, 2.0]),
                (vec![1], vec![5.0, 7.0]),
            ]
            .into(),
        };
        assert_eq!(score_docid(&q, &[1, 0], &s).unwrap(), 7.0);
    }

    #[test]
    fn score_docid_equals_unrolled_prefix_recursion() {
        let corpus = synthetic(5);
        let scorer = SyntheticScorer::new(5, 4, 64);
        let q = Query::new("q", "recursion probe");
        for doc in corpus.documents().iter().take(8) {
            let direct = score_docid(&q, doc.seq_docid.tokens(), &scorer).unwrap();
            // Prefix recursion: s(c_{<=i}) = s(c_{<i}) + logit_i, s(c_{<=0}) = 0.
            let mut s = 0.0;
            for i in 0..doc.seq_docid.len() {
                let logits = scorer.step_logits(&q, &doc.seq_docid.tokens()[..i]).unwrap();
                s += logits[doc.seq_docid.tokens()[i] as usize];
            }
            assert_eq!(direct, s);
        }
    }

    #[test]
    fn bonus_zero_when_plan_disjoint_from_subtree() {
        let corpus = synthetic(5);
        let trie = build_trie(&corpus).unwrap();
        let scorer = SyntheticScorer::new(5, 4, 64);
        let q = Query::new("q", "bonus probe");
        let planning = plan(&q, &corpus, &scorer, 3).unwrap();
        // Find a prefix containing no planned document.
        let planned: Vec<&str> = planning.entries().iter().map(|(d, _)| d.as_str()).collect();
        let unplanned = corpus
            .documents()
            .iter()
            .find(|d| !planned.contains(&d.doc_id.as_str()))
            .unwrap();
        let full = unplanned.seq_docid.tokens();
        assert_eq!(lookahead_bonus(full, &planning, &trie), 0.0);
    }

    #[test]
    fn bonus_at_root_is_plan_maximum() {
        let corpus = synthetic(6);
        let trie = build_trie(&corpus).unwrap();
        let scorer = SyntheticScorer::new(6, 4, 64);
        let q = Query::new("q", "root bonus probe");
        let planning = plan(&q, &corpus, &scorer, 5).unwrap();
        let max = planning
            .entries()
            .iter()
            .map(|&(_, s)| s)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(lookahead_bonus(&[], &planning, &trie), max);
    }

    #[test]
    fn bonus_non_increasing_along_planned_paths() {
        let corpus = synthetic(7);
        let trie = build_trie(&corpus).unwrap();
        let scorer = SyntheticScorer::new(7, 4, 64);
        let q = Query::new("q", "depth sweep probe");
        let planning = plan(&q, &corpus, &scorer, 8).unwrap();
        let (doc_id, _) = &planning.entries()[0];
        let idx = corpus.doc_index(doc_id).unwrap();
        let tokens = corpus.doc(idx).seq_docid.tokens();
        let mut prev = f64::INFINITY;
        for i in 0..=tokens.len() {
            // Brute-force re-scan at each depth.
            let b = lookahead_bonus(&tokens[..i], &planning, &trie);
            assert!(b <= prev, "bonus increased along path at depth {i}");
            prev = b;
        }
    }

    #[test]
    fn subtree_max_matches_public_bonus() {
        let corpus = synthetic(8);
        let trie = build_trie(&corpus).unwrap();
        let scorer = SyntheticScorer::new(8, 4, 64);
        let q = Query::new("q", "equivalence probe");
        let planning = plan(&q, &corpus, &scorer, 6).unwrap();
        let map = subtree_max(&trie, &planning);
        let mut rng = SplitMix64::new(31);
        for _ in 0..300 {
            let len = rng.gen_range(5) as usize;
            let prefix: Vec<u32> = (0..len).map(|_| rng.gen_range(4) as u32).collect();
            let slow = lookahead_bonus(&prefix, &planning, &trie);
            let fast = match trie_node(&trie, &prefix) {
                Some(node) => {
                    let v = map[node as usize];
                    if v == f64::NEG_INFINITY {
                        0.0
                    } else {
                        v
                    }
                }
                None => 0.0,
            };
            assert_eq!(slow, fast, "prefix {prefix:?}");
        }
    }

    fn trie_node(trie: &DocidTrie, prefix: &[u32]) -> Option<u32> {
        let mut node = 0u32;
        for &t in prefix {
            node = trie
                .children(node)
                .iter()
                .find(|&&(tok, _)| tok == t)
                .map(|&(_, c)| c)?;
        }
        Some(node)
    }

    #[test]
    fn single_document_corpus_decodes_to_it() {
        let corpus = corpus_from_docids(3, 4, &[("only", vec![2, 0, 1])]);
        let trie = build_trie(&corpus).unwrap();
        let scorer = SyntheticScorer::new(1, 4, 8);
        let q = Query::new("q", "whatever");
        let planning = plan(&q, &corpus, &scorer, 1).unwrap();
        let run = decode(&q, &trie, &scorer, &planning, &DecodeOptions::new(5, 1)).unwrap();
        assert_eq!(run.entries()[0].doc_id, "only");
        assert_eq!(run.entries()[0].rank, 1);
    }

    #[test]
    fn full_beam_without_bonus_equals_oracle() {
        let corpus = synthetic(9);
        let trie = build_trie(&corpus).unwrap();
        let scorer = SyntheticScorer::new(9, 4, 64);
        let q = Query::new("q", "oracle equivalence probe");
        let planning = plan(&q, &corpus, &scorer, 4).unwrap();
        let options = DecodeOptions {
            beam_size: trie.leaf_count(),
            use_bonus: false,
            plan_override: None,
            output_depth: trie.leaf_count(),
            final_score: FinalScore::Combined,
        };
        let run = decode(&q, &trie, &scorer, &planning, &options).unwrap();
        let oracle = exhaustive_oracle(&q, &corpus, &scorer, corpus.len()).unwrap();
        assert_eq!(run.len(), oracle.len());
        for (a, b) in run.entries().iter().zip(oracle.entries()) {
            assert_eq!(a.doc_id, b.doc_id);
            assert!((a.score - b.score).abs() < 1e-9);
        }
    }

    /// Trap: the relevant document's first token scores worst sequentially,
    /// so a width-1 beam prunes it, but its planned score dominates and the
    /// bonus rescues it.
    fn trap() -> (Corpus, FixtureScorer, PlanningSet) {
        let corpus = corpus_from_docids(
            2,
            3,
            &[
                ("docA", vec![0, 0]),
                ("docB", vec![1, 0]),
                ("docR", vec![2, 0]),
                ("docX", vec![2, 1]),
            ],
        );
        let scorer = FixtureScorer {
            by_prefix: [
                (vec![], vec![1.0, 0.5, 0.0]),
                (vec![0], vec![2.0, 0.0, 0.0]),
                (vec![1], vec![2.0, 0.0, 0.0]),
                (vec![2], vec![2.0, 0.0, 0.0]),
            ]
            .into(),
        };
        let planning = planning_set_from(&[("docR", 5.0), ("docX", 6.0)]);
        (corpus, scorer, planning)
    }

    fn planning_set_from(entries: &[(&str, f64)]) -> PlanningSet {
        // Assemble through plan() on a throwaway corpus is clumsy; build the
        // ordering by scoring a synthetic corpus is worse. Use the planner's
        // own ordering rules directly.
        let mut sorted: Vec<(String, f64)> = entries
            .iter()
            .map(|&(d, s)| (d.to_string(), s))
            .collect();
        sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        PlanningSet::from_sorted_entries(sorted)
    }

    #[test]
    fn trap_beam_one_misses_without_bonus_and_recovers_with_it() {
        let (corpus, scorer, planning) = trap();
        let trie = build_trie(&corpus).unwrap();
        let q = Query::new("q", "trap");
        let unguided = DecodeOptions {
            beam_size: 1,
            use_bonus: false,
            plan_override: None,
            output_depth: 1,
            final_score: FinalScore::Combined,
        };
        let run = decode(&q, &trie, &scorer, &planning, &unguided).unwrap();
        assert_eq!(run.entries()[0].doc_id, "docA");
        assert!(run.rank_of("docR").is_none());

        let guided = DecodeOptions {
            use_bonus: true,
            ..unguided
        };
        let run = decode(&q, &trie, &scorer, &planning, &guided).unwrap();
        assert_eq!(run.entries()[0].doc_id, "docR");
    }

    #[test]
    fn swap_restores_pruned_document() {
        let (corpus, scorer, clean_plan) = trap();
        let trie = build_trie(&corpus).unwrap();
        let q = Query::new("q", "perturbed trap");
        // The perturbed query's own plan points at docA only.
        let own_plan = planning_set_from(&[("docA", 3.0)]);
        let options = DecodeOptions::new(1, 1);
        let normal = decode(&q, &trie, &scorer, &own_plan, &options).unwrap();
        assert!(normal.rank_of("docR").is_none());
        let swapped = swap_decode(&q, &clean_plan, &trie, &scorer, &options).unwrap();
        assert_eq!(swapped.rank_of("docR"), Some(1));
    }

    #[test]
    fn swapping_a_querys_own_plan_changes_nothing() {
        let corpus = synthetic(10);
        let trie = build_trie(&corpus).unwrap();
        let scorer = SyntheticScorer::new(10, 4, 64);
        let q = Query::new("q", "self swap probe");
        let planning = plan(&q, &corpus, &scorer, 8).unwrap();
        let options = DecodeOptions::new(4, 4);
        let normal = decode(&q, &trie, &scorer, &planning, &options).unwrap();
        let swapped = swap_decode(&q, &planning, &trie, &scorer, &options).unwrap();
        assert_eq!(normal, swapped);
    }

    #[test]
    fn bonus_off_empty_plan_and_empty_override_agree() {
        let corpus = synthetic(11);
        let trie = build_trie(&corpus).unwrap();
        let scorer = SyntheticScorer::new(11, 4, 64);
        let q = Query::new("q", "ablation identity probe");
        let planning = plan(&q, &corpus, &scorer, 8).unwrap();
        let empty = PlanningSet::empty();
        let base = DecodeOptions {
            beam_size: 4,
            use_bonus: false,
            plan_override: None,
            output_depth: 4,
            final_score: FinalScore::Combined,
        };
        let no_bonus = decode(&q, &trie, &scorer, &planning, &base).unwrap();
        let with_empty_plan = decode(
            &q,
            &trie,
            &scorer,
            &empty,
            &DecodeOptions {
                use_bonus: true,
                ..base
            },
        )
        .unwrap();
        let with_empty_override = decode(
            &q,
            &trie,
            &scorer,
            &planning,
            &DecodeOptions {
                use_bonus: true,
                plan_override: Some(&empty),
                ..base
            },
        )
        .unwrap();
        assert_eq!(no_bonus, with_empty_plan);
        assert_eq!(no_bonus, with_empty_override);
    }

    #[test]
    fn combined_minus_seq_equals_full_docid_bonus() {
        let corpus = synthetic(12);
        let trie = build_trie(&corpus).unwrap();
        let scorer = SyntheticScorer::new(12, 4, 64);
        let q = Query::new("q", "additivity probe");
        let planning = plan(&q, &corpus, &scorer, 6).unwrap();
        let options = DecodeOptions::new(8, 8);
        let combined_run = decode(&q, &trie, &scorer, &planning, &options).unwrap();
        let seq_run = decode(
            &q,
            &trie,
            &scorer,
            &planning,
            &DecodeOptions {
                final_score: FinalScore::Seq,
                ..options
            },
        )
        .unwrap();
        for entry in combined_run.entries() {
            let doc_idx = corpus.doc_index(&entry.doc_id).unwrap();
            let full = corpus.doc(doc_idx).seq_docid.tokens();
            let expected_bonus = planning.get(&entry.doc_id).unwrap_or(0.0);
            assert_eq!(lookahead_bonus(full, &planning, &trie), expected_bonus);
            if let Some(seq_entry) = seq_run.entries().iter().find(|e| e.doc_id == entry.doc_id)
            {
                assert!((entry.score - seq_entry.score - expected_bonus).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn oracle_with_zero_scorer_orders_by_doc_id() {
        let corpus = synthetic(13);
        let scorer = ZeroScorer(4);
        let q = Query::new("q", "tie probe");
        let run = exhaustive_oracle(&q, &corpus, &scorer, corpus.len()).unwrap();
        let ids: Vec<&str> = run.entries().iter().map(|e| e.doc_id.as_str()).collect();
        let mut want: Vec<&str> = corpus.documents().iter().map(|d| d.doc_id.as_str()).collect();
        want.sort_unstable();
        assert_eq!(ids, want);
    }

    #[test]
    fn output_depth_cannot_exceed_beam() {
        let corpus = synthetic(14);
        let trie = build_trie(&corpus).unwrap();
        let scorer = SyntheticScorer::new(14, 4, 64);
        let q = Query::new("q", "x");
        let planning = plan(&q, &corpus, &scorer, 4).unwrap();
        let options = DecodeOptions {
            beam_size: 2,
            use_bonus: true,
            plan_override: None,
            output_depth: 3,
            final_score: FinalScore::Combined,
        };
        assert!(decode(&q, &trie, &scorer, &planning, &options).is_err());
    }
}
