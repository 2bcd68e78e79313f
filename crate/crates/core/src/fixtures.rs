//! Deterministic fixtures shared by the test and acceptance suites.
//!
//! The trap fixture is the canonical demonstration of prefix pruning: the
//! relevant document's first token scores worst sequentially, so a width-1
//! beam discards it, while its planned score dominates and the look-ahead
//! bonus keeps the prefix alive.

use crate::corpus::{Corpus, CorpusConfig, Document, Qrels, Query, SequentialDocid, SetDocid};
use crate::rng::SplitMix64;
use crate::scorer::{TableScorer, TableScorerFile};

/// The trap corpus, its linear scorer, and the query pair driving it.
pub struct TrapFixture {
    pub corpus: Corpus,
    pub scorer: TableScorer,
    /// Clean query whose planner ranks the relevant document highly.
    pub clean: Query,
    /// Intent-preserving variation whose own plan misses the relevant doc.
    pub perturbed: Query,
    pub qrels: Qrels,
    /// The document beam width 1 prunes without guidance.
    pub relevant_doc: String,
}

/// Table-scorer description of the trap; also writable to disk for the CLI.
pub fn trap_scorer_file() -> TableScorerFile {
    TableScorerFile {
        dim: 1,
        seq_len: 2,
        docid_vocab: 3,
        term_embeddings: [
            ("alpha".to_string(), vec![1.0]),
            ("beta".to_string(), vec![1.0]),
        ]
        .into(),
        term_planner_weights: [
            (
                "alpha".to_string(),
                [
                    ("4".to_string(), 2.5),
                    ("5".to_string(), 2.5),
                    ("6".to_string(), 3.0),
                    ("7".to_string(), 3.0),
                ]
                .into(),
            ),
            (
                "beta".to_string(),
                [("0".to_string(), 1.5), ("1".to_string(), 1.5)].into(),
            ),
        ]
        .into(),
        // Step 1 ranks the relevant doc's first token (2) last; step 2
        // separates the relevant doc (token 0) from the decoy (token 1).
        step_matrices: vec![
            vec![vec![1.0], vec![0.5], vec![0.0]],
            vec![vec![2.0], vec![0.0], vec![0.0]],
        ],
    }
}

pub fn trap_fixture() -> TrapFixture {
    let config = CorpusConfig {
        seq_len: 2,
        docid_vocab: 3,
        planner_vocab: 8,
        set_size: 2,
    };
    let doc = |id: &str, seq: Vec<u32>, set: Vec<(u32, f64)>| Document {
        doc_id: id.to_string(),
        seq_docid: SequentialDocid::new(seq),
        set_docid: SetDocid::from_pairs(set).unwrap(),
        feature_vector: None,
    };
    let documents = vec![
        doc("docA", vec![0, 0], vec![(0, 1.0), (1, 0.9)]),
        doc("docB", vec![1, 0], vec![(2, 1.0), (3, 0.9)]),
        doc("docR", vec![2, 0], vec![(4, 1.0), (5, 0.9)]),
        doc("docX", vec![2, 1], vec![(6, 1.0), (7, 0.9)]),
    ];
    let corpus = Corpus::new(config, documents).unwrap();
    let scorer = TableScorer::from_file(trap_scorer_file()).unwrap();
    let mut qrels = Qrels::new();
    qrels.insert("t1", "docR", 1);
    TrapFixture {
        corpus,
        scorer,
        clean: Query::new("t1", "alpha"),
        perturbed: Query::new("t1", "beta"),
        qrels,
        relevant_doc: "docR".to_string(),
    }
}

const QUERY_WORDS: [&str; 24] = [
    "anchor", "basalt", "cipher", "delta", "ember", "fjord", "glacier", "harbor", "isotope",
    "jetty", "krill", "lagoon", "meridian", "nimbus", "orbit", "prism", "quartz", "ridge",
    "summit", "tundra", "umbra", "vertex", "willow", "zenith",
];

/// Deterministic word-salad queries for sweeps and benchmarks.
pub fn synthetic_queries(count: usize, seed: u64) -> Vec<Query> {
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|i| {
            let len = 2 + rng.gen_range(4) as usize;
            let words: Vec<&str> = (0..len)
                .map(|_| QUERY_WORDS[rng.gen_range(QUERY_WORDS.len() as u64) as usize])
                .collect();
            Query::new(format!("q{i:04}"), words.join(" "))
        })
        .collect()
}

/// Qrels anchored to an ideal ranking: for each query, the top `depth`
/// documents of the supplied run are judged relevant (grade 1).
pub fn qrels_from_ideal(runs: &[crate::run::RunList], depth: usize) -> Qrels {
    let mut qrels = Qrels::new();
    for run in runs {
        for entry in run.top_k(depth) {
            qrels.insert(&run.qid, &entry.doc_id, 1);
        }
    }
    qrels
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trap_fixture_is_valid() {
        let trap = trap_fixture();
        assert_eq!(trap.corpus.len(), 4);
        assert_eq!(trap.qrels.grade("t1", "docR"), 1);
    }

    #[test]
    fn synthetic_queries_are_deterministic() {
        assert_eq!(synthetic_queries(5, 9), synthetic_queries(5, 9));
        let queries = synthetic_queries(100, 1);
        assert_eq!(queries.len(), 100);
        assert!(queries.iter().all(|q| !q.text.is_empty()));
    }
}
