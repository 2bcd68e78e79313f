//! The model abstraction: query-side planner token weights and per-step
//! sequential logits, with no commitment to any neural backbone.
//!
//! Built-in scorers are pure functions of (seed or file, query text, prefix)
//! and byte-identical across runs. The external scorer forwards requests to
//! a child process over line-delimited JSON (see [`external`]).

mod external;

pub use external::{ExternalScorer, ExternalScorerOptions, Request};

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Query;
use crate::error::{Error, Result};
use crate::rng::{SplitMix64, StableHasher};

/// Sparse query-side weights over the planning vocabulary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlannerWeights {
    weights: BTreeMap<u32, f64>,
}

impl PlannerWeights {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from a token -> weight map, rejecting non-finite values.
    pub fn from_map(weights: BTreeMap<u32, f64>) -> Result<Self> {
        for (&t, &w) in &weights {
            if !w.is_finite() {
                return Err(Error::Scorer(format!(
                    "planner weight for token {t} is not finite: {w}"
                )));
            }
        }
        Ok(Self { weights })
    }

    /// Weight of a token, 0 when absent.
    pub fn get(&self, token: u32) -> f64 {
        self.weights.get(&token).copied().unwrap_or(0.0)
    }

    /// Add to a token's weight (creating it at 0).
    pub fn add(&mut self, token: u32, delta: f64) {
        *self.weights.entry(token).or_insert(0.0) += delta;
    }

    pub fn insert(&mut self, token: u32, weight: f64) {
        self.weights.insert(token, weight);
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.weights.iter().map(|(&t, &w)| (t, w))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl FromIterator<(u32, f64)> for PlannerWeights {
    fn from_iter<I: IntoIterator<Item = (u32, f64)>>(iter: I) -> Self {
        Self {
            weights: iter.into_iter().collect(),
        }
    }
}

/// Dense per-step logits, one value per docid token (length exactly V).
pub type StepLogits = Vec<f64>;

/// Behavioral scorer contract: planner weights for a query, and sequential
/// step logits for a (query, prefix) pair. Implementations must be
/// deterministic for identical inputs.
pub trait Scorer: Send + Sync {
    fn planner_weights(&self, query: &Query) -> Result<PlannerWeights>;
    fn step_logits(&self, query: &Query, prefix: &[u32]) -> Result<StepLogits>;
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn planner_weights(&self, query: &Query) -> Result<PlannerWeights> {
        (**self).planner_weights(query)
    }
    fn step_logits(&self, query: &Query, prefix: &[u32]) -> Result<StepLogits> {
        (**self).step_logits(query, prefix)
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn planner_weights(&self, query: &Query) -> Result<PlannerWeights> {
        (**self).planner_weights(query)
    }
    fn step_logits(&self, query: &Query, prefix: &[u32]) -> Result<StepLogits> {
        (**self).step_logits(query, prefix)
    }
}

/// Hash-based scorer: planner weights from the query's whitespace tokens
/// hashed into the planning vocabulary, step logits from a seeded hash of
/// (query text, prefix, step) mapped into [-1, 1].
#[derive(Debug, Clone)]
pub struct SyntheticScorer {
    seed: u64,
    docid_vocab: u32,
    planner_vocab: u32,
}

impl SyntheticScorer {
    pub fn new(seed: u64, docid_vocab: u32, planner_vocab: u32) -> Self {
        Self {
            seed,
            docid_vocab,
            planner_vocab,
        }
    }
}

impl Scorer for SyntheticScorer {
    fn planner_weights(&self, query: &Query) -> Result<PlannerWeights> {
        let mut weights = PlannerWeights::new();
        for word in query.text.split_whitespace() {
            let mut h = StableHasher::new();
            h.write_u64(self.seed).write_str("planner").write_str(word);
            let hash = h.finish();
            let token = (hash % self.planner_vocab as u64) as u32;
            let mut rng = SplitMix64::new(hash);
            weights.add(token, 0.1 + 0.9 * rng.next_f64());
        }
        Ok(weights)
    }

    fn step_logits(&self, query: &Query, prefix: &[u32]) -> Result<StepLogits> {
        let mut h = StableHasher::new();
        h.write_u64(self.seed).write_str("step").write_str(&query.text);
        for &t in prefix {
            h.write_u32(t);
        }
        h.write_u64(prefix.len() as u64 + 1);
        let mut rng = SplitMix64::new(h.finish());
        Ok((0..self.docid_vocab)
            .map(|_| rng.next_f64() * 2.0 - 1.0)
            .collect())
    }
}

/// On-disk description of a [`TableScorer`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableScorerFile {
    pub dim: usize,
    #[serde(rename = "L")]
    pub seq_len: usize,
    #[serde(rename = "V")]
    pub docid_vocab: u32,
    /// term -> embedding vector of length `dim`.
    pub term_embeddings: BTreeMap<String, Vec<f64>>,
    /// term -> sparse planner weights (token id as string -> weight).
    pub term_planner_weights: BTreeMap<String, BTreeMap<String, f64>>,
    /// L matrices of shape V x dim.
    pub step_matrices: Vec<Vec<Vec<f64>>>,
}

/// Linear scorer backed by a table file: the query vector is the mean of its
/// term embeddings and step logits are `E_i . query_vector`, so logits are
/// prefix-independent by construction and the exhaustive score decomposes
/// per step.
#[derive(Debug, Clone)]
pub struct TableScorer {
    dim: usize,
    seq_len: usize,
    term_embeddings: HashMap<String, Vec<f64>>,
    term_planner_weights: HashMap<String, Vec<(u32, f64)>>,
    step_matrices: Vec<Vec<Vec<f64>>>,
}

impl TableScorer {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let file: TableScorerFile = serde_json::from_str(&text)
            .map_err(|e| Error::Scorer(format!("malformed table scorer file: {e}")))?;
        Self::from_file(file)
    }

    pub fn from_file(file: TableScorerFile) -> Result<Self> {
        if file.step_matrices.len() != file.seq_len {
            return Err(Error::Scorer(format!(
                "expected {} step matrices, got {}",
                file.seq_len,
                file.step_matrices.len()
            )));
        }
        for (i, m) in file.step_matrices.iter().enumerate() {
            if m.len() != file.docid_vocab as usize {
                return Err(Error::Scorer(format!(
                    "step matrix {i} has {} rows, expected V={}",
                    m.len(),
                    file.docid_vocab
                )));
            }
            for row in m {
                if row.len() != file.dim {
                    return Err(Error::Scorer(format!(
                        "step matrix {i} has a row of width {}, expected dim={}",
                        row.len(),
                        file.dim
                    )));
                }
            }
        }
        let mut term_embeddings = HashMap::new();
        for (term, emb) in file.term_embeddings {
            if emb.len() != file.dim {
                return Err(Error::Scorer(format!(
                    "embedding for '{term}' has dimension {}, expected {}",
                    emb.len(),
                    file.dim
                )));
            }
            term_embeddings.insert(term, emb);
        }
        let mut term_planner_weights = HashMap::new();
        for (term, raw) in file.term_planner_weights {
            let mut pairs = Vec::with_capacity(raw.len());
            for (tok, w) in raw {
                let tok: u32 = tok.parse().map_err(|_| {
                    Error::Scorer(format!("bad planner token '{tok}' for term '{term}'"))
                })?;
                pairs.push((tok, w));
            }
            term_planner_weights.insert(term, pairs);
        }
        Ok(Self {
            dim: file.dim,
            seq_len: file.seq_len,
            term_embeddings,
            term_planner_weights,
            step_matrices: file.step_matrices,
        })
    }

    fn query_vector(&self, query: &Query) -> Vec<f64> {
        let mut sum = vec![0.0; self.dim];
        let mut count = 0usize;
        for term in query.text.split_whitespace() {
            count += 1;
            match self.term_embeddings.get(term) {
                Some(emb) => {
                    for (s, x) in sum.iter_mut().zip(emb) {
                        *s += x;
                    }
                }
                None => log::debug!("table scorer: unknown query term '{term}'"),
            }
        }
        if count > 0 {
            for s in &mut sum {
                *s /= count as f64;
            }
        }
        sum
    }
}

impl Scorer for TableScorer {
    fn planner_weights(&self, query: &Query) -> Result<PlannerWeights> {
        let mut weights = PlannerWeights::new();
        for term in query.text.split_whitespace() {
            if let Some(pairs) = self.term_planner_weights.get(term) {
                for &(tok, w) in pairs {
                    weights.add(tok, w);
                }
            }
        }
        Ok(weights)
    }

    fn step_logits(&self, query: &Query, prefix: &[u32]) -> Result<StepLogits> {
        let step = prefix.len();
        if step >= self.seq_len {
            return Err(Error::Scorer(format!(
                "step {} out of range for L={}",
                step + 1,
                self.seq_len
            )));
        }
        let qv = self.query_vector(query);
        Ok(self.step_matrices[step]
            .iter()
            .map(|row| row.iter().zip(&qv).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Wraps a scorer, substituting planner weights for selected qids. Step
/// logits always come from the inner scorer. Realizes the query-side
/// planner-weights override interface.
pub struct WeightsOverride<S> {
    inner: S,
    overrides: HashMap<String, PlannerWeights>,
}

impl<S: Scorer> WeightsOverride<S> {
    pub fn new(inner: S, overrides: HashMap<String, PlannerWeights>) -> Self {
        Self { inner, overrides }
    }
}

impl<S: Scorer> Scorer for WeightsOverride<S> {
    fn planner_weights(&self, query: &Query) -> Result<PlannerWeights> {
        match self.overrides.get(&query.qid) {
            Some(w) => Ok(w.clone()),
            None => self.inner.planner_weights(query),
        }
    }

    fn step_logits(&self, query: &Query, prefix: &[u32]) -> Result<StepLogits> {
        self.inner.step_logits(query, prefix)
    }
}

/// Fold per-position lexical logits into sparse planner weights:
/// `z[v] = max_t( log(1 + relu(logits[t][v])) * mask[t] )`, with zero
/// entries omitted from the result.
pub fn lexical_weight_transform(
    position_logits: &[Vec<f64>],
    mask: &[bool],
) -> Result<PlannerWeights> {
    if position_logits.len() != mask.len() {
        return Err(Error::InvalidArgument(format!(
            "mask length {} != number of positions {}",
            mask.len(),
            position_logits.len()
        )));
    }
    let width = position_logits.first().map_or(0, |row| row.len());
    let mut z = vec![0.0f64; width];
    for (row, &m) in position_logits.iter().zip(mask) {
        if row.len() != width {
            return Err(Error::InvalidArgument(
                "position logit rows have inconsistent widths".into(),
            ));
        }
        if !m {
            continue;
        }
        for (v, &logit) in row.iter().enumerate() {
            let contrib = logit.max(0.0).ln_1p();
            if contrib > z[v] {
                z[v] = contrib;
            }
        }
    }
    let mut out = PlannerWeights::new();
    for (v, &w) in z.iter().enumerate() {
        if w > 0.0 {
            out.insert(v as u32, w);
        }
    }
    Ok(out)
}

/// Validate logits returned by any backend: exact length and finiteness.
pub(crate) fn validate_logits(logits: &[f64], expected: u32, context: &str) -> Result<()> {
    if logits.len() != expected as usize {
        return Err(Error::Protocol {
            msg: format!("expected {expected} logits, got {}", logits.len()),
            request: context.to_string(),
        });
    }
    if let Some(bad) = logits.iter().find(|v| !v.is_finite()) {
        return Err(Error::Protocol {
            msg: format!("non-finite logit {bad}"),
            request: context.to_string(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(text: &str) -> Query {
        Query::new("q1", text)
    }

    #[test]
    fn synthetic_is_deterministic() {
        let s = SyntheticScorer::new(42, 16, 64);
        let query = q("how do trees grow");
        let a = s.step_logits(&query, &[3, 1]).unwrap();
        let b = s.step_logits(&query, &[3, 1]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 16);
        assert!(a.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(
            s.planner_weights(&query).unwrap(),
            s.planner_weights(&query).unwrap()
        );
    }

    #[test]
    fn different_seeds_differ_somewhere() {
        let a = SyntheticScorer::new(1, 16, 64);
        let b = SyntheticScorer::new(2, 16, 64);
        let query = q("fixture query");
        let la = a.step_logits(&query, &[]).unwrap();
        let lb = b.step_logits(&query, &[]).unwrap();
        assert!(la.iter().zip(&lb).any(|(x, y)| x != y));
    }

    #[test]
    fn empty_query_has_empty_weights_but_defined_logits() {
        let s = SyntheticScorer::new(7, 8, 32);
        let query = q("");
        assert!(s.planner_weights(&query).unwrap().is_empty());
        assert_eq!(s.step_logits(&query, &[]).unwrap().len(), 8);
    }

    fn tiny_table() -> TableScorer {
        TableScorer::from_file(TableScorerFile {
            dim: 1,
            seq_len: 2,
            docid_vocab: 2,
            term_embeddings: [("alpha".to_string(), vec![3.0])].into(),
            term_planner_weights: [(
                "alpha".to_string(),
                [("5".to_string(), 0.5)].into(),
            )]
            .into(),
            step_matrices: vec![vec![vec![2.0], vec![-1.0]], vec![vec![1.0], vec![0.0]]],
        })
        .unwrap()
    }

    #[test]
    fn table_scorer_dot_product() {
        let s = tiny_table();
        let logits = s.step_logits(&q("alpha"), &[]).unwrap();
        assert_eq!(logits, vec![6.0, -3.0]);
        let w = s.planner_weights(&q("alpha")).unwrap();
        assert_eq!(w.get(5), 0.5);
    }

    #[test]
    fn unknown_terms_give_zero_vector_and_zero_logits() {
        let s = tiny_table();
        let logits = s.step_logits(&q("zzz yyy"), &[]).unwrap();
        assert_eq!(logits, vec![0.0, 0.0]);
        assert!(s.planner_weights(&q("zzz")).unwrap().is_empty());
    }

    #[test]
    fn table_scorer_is_linear_in_query_vector() {
        // "alpha alpha" has the same mean embedding as "alpha"; adding an
        // unknown term halves the mean, halving every logit.
        let s = tiny_table();
        let full = s.step_logits(&q("alpha"), &[]).unwrap();
        let halved = s.step_logits(&q("alpha zzz"), &[]).unwrap();
        for (f, h) in full.iter().zip(&halved) {
            let rel = (h - 0.5 * f).abs() / f.abs().max(1e-300);
            assert!(rel < 1e-12, "expected {h} == {f}/2");
        }
    }

    #[test]
    fn transform_kills_nonpositive_logits() {
        let w = lexical_weight_transform(&[vec![-1.0, 0.0, -5.0]], &[true]).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn transform_respects_mask() {
        let w = lexical_weight_transform(&[vec![3.0, 2.0]], &[false]).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn transform_log1p_identity() {
        let e_minus_1 = std::f64::consts::E - 1.0;
        let w = lexical_weight_transform(&[vec![e_minus_1]], &[true]).unwrap();
        assert!((w.get(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transform_mask_length_mismatch_is_an_error() {
        assert!(lexical_weight_transform(&[vec![1.0]], &[true, false]).is_err());
    }

    #[test]
    fn override_substitutes_planner_weights_only() {
        let inner = SyntheticScorer::new(3, 8, 32);
        let mut ov: PlannerWeights = PlannerWeights::new();
        ov.insert(2, 9.0);
        let wrapped = WeightsOverride::new(
            inner.clone(),
            [("q1".to_string(), ov.clone())].into(),
        );
        let query = q("some text");
        assert_eq!(wrapped.planner_weights(&query).unwrap(), ov);
        assert_eq!(
            wrapped.step_logits(&query, &[1]).unwrap(),
            inner.step_logits(&query, &[1]).unwrap()
        );
        let other = Query::new("q2", "some text");
        assert_eq!(
            wrapped.planner_weights(&other).unwrap(),
            inner.planner_weights(&other).unwrap()
        );
    }

    proptest! {
        // Raising one masked logit never lowers any output weight, and
        // masked-out positions never affect the output.
        #[test]
        fn transform_monotone_and_mask_independent(
            base in proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, 4), 1..4),
            pos in 0usize..4,
            tok in 0usize..4,
            bump in 0.0f64..3.0,
        ) {
            let positions = base.len();
            let mask: Vec<bool> = (0..positions).map(|i| i % 2 == 0).collect();
            let before = lexical_weight_transform(&base, &mask).unwrap();
            let mut bumped = base.clone();
            let p = pos % positions;
            bumped[p][tok] += bump;
            let after = lexical_weight_transform(&bumped, &mask).unwrap();
            if mask[p] {
                for v in 0..4u32 {
                    prop_assert!(after.get(v) + 1e-12 >= before.get(v));
                }
            } else {
                prop_assert_eq!(before, after);
            }
        }

        // Every emitted weight is strictly positive.
        #[test]
        fn transform_emits_only_positive_weights(
            rows in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 5), 1..4)
        ) {
            let mask = vec![true; rows.len()];
            let w = lexical_weight_transform(&rows, &mask).unwrap();
            for (_, value) in w.iter() {
                prop_assert!(value > 0.0);
            }
        }
    }
}
