//! Corpus data model: documents, both identifier kinds, queries, relevance
//! judgments, file ingestion with validation, and synthetic corpus generation.
//!
//! File formats (all UTF-8, LF):
//! - docids TSV: `doc_id \t t1,t2,...,tL` with base-10 token ids
//! - set-docids TSV: `doc_id \t tok:weight,...` exactly m pairs, descending weight
//! - queries TSV: `qid \t text`
//! - corpus config JSON: `{"L":..,"V":..,"V_T":..,"m":..}`
//!
//! Weights are 64-bit reals in memory and serialize with 9 significant
//! digits (`{:.8e}`), so canonical files round-trip byte-for-byte.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{hash_str, SplitMix64, StableHasher};
use crate::rq;

/// Docid-token vocabulary: every sequential-docid token lies in `[0, size)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocidVocab {
    pub size: u32,
}

impl DocidVocab {
    pub fn new(size: u32) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidArgument(format!(
                "docid vocabulary size must be >= 2, got {size}"
            )));
        }
        Ok(Self { size })
    }
}

/// Planning-token vocabulary, with an optional display table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannerVocab {
    pub size: u32,
    pub token_names: Option<Vec<String>>,
}

impl PlannerVocab {
    pub fn new(size: u32) -> Result<Self> {
        if size < 1 {
            return Err(Error::InvalidArgument(format!(
                "planner vocabulary size must be >= 1, got {size}"
            )));
        }
        Ok(Self {
            size,
            token_names: None,
        })
    }
}

/// Length-L token sequence identifying one document; the path beam search decodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SequentialDocid(Vec<u32>);

impl SequentialDocid {
    pub fn new(tokens: Vec<u32>) -> Self {
        Self(tokens)
    }

    pub fn tokens(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn starts_with(&self, prefix: &[u32]) -> bool {
        self.0.starts_with(prefix)
    }
}

impl fmt::Display for SequentialDocid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Unordered set of m weighted planning tokens, stored by descending weight
/// (ties by ascending token id).
#[derive(Debug, Clone, PartialEq)]
pub struct SetDocid {
    entries: Vec<(u32, f64)>,
}

impl SetDocid {
    /// Build from arbitrary (token, weight) pairs, sorting into canonical order.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for &(tok, w) in &pairs {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "set-docid weight for token {tok} must be finite and >= 0, got {w}"
                )));
            }
            if !seen.insert(tok) {
                return Err(Error::InvalidArgument(format!(
                    "set-docid token {tok} appears twice"
                )));
            }
        }
        pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        Ok(Self { entries: pairs })
    }

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

    /// The same identifier truncated to its `m_prime` highest-weight entries.
    pub fn truncated(&self, m_prime: usize) -> Self {
        Self {
            entries: self.entries.iter().take(m_prime).copied().collect(),
        }
    }
}

/// One document with its external id and both identifiers.
#[derive(Debug, Clone)]
pub struct Document {
    pub doc_id: String,
    pub seq_docid: SequentialDocid,
    pub set_docid: SetDocid,
    pub feature_vector: Option<Vec<f64>>,
}

/// Identifier configuration shared by every document in a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusConfig {
    /// Sequential docid length.
    #[serde(rename = "L")]
    pub seq_len: usize,
    /// Docid-token vocabulary size.
    #[serde(rename = "V")]
    pub docid_vocab: u32,
    /// Planning-token vocabulary size.
    #[serde(rename = "V_T")]
    pub planner_vocab: u32,
    /// Planning tokens per document.
    #[serde(rename = "m")]
    pub set_size: usize,
}

impl CorpusConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cfg: CorpusConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seq_len < 1 {
            return Err(Error::InvalidArgument("L must be >= 1".into()));
        }
        if self.set_size < 1 {
            return Err(Error::InvalidArgument("m must be >= 1".into()));
        }
        DocidVocab::new(self.docid_vocab)?;
        PlannerVocab::new(self.planner_vocab)?;
        Ok(())
    }
}

/// Validated, immutable document collection.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub docid_vocab: DocidVocab,
    pub planner_vocab: PlannerVocab,
    pub seq_len: usize,
    pub set_size: usize,
    documents: Vec<Document>,
    index: HashMap<String, usize>,
}

impl Corpus {
    /// Assemble and validate a corpus. Checks every invariant: identifier
    /// lengths and cardinalities, token ranges, unique doc ids, and pairwise
    /// distinct sequential docids.
    pub fn new(config: CorpusConfig, documents: Vec<Document>) -> Result<Self> {
        config.validate()?;
        if documents.is_empty() {
            return Err(Error::InvalidCorpus("corpus has no documents".into()));
        }
        let mut index = HashMap::with_capacity(documents.len());
        let mut seen_seq: HashMap<&SequentialDocid, &str> = HashMap::new();
        for (i, doc) in documents.iter().enumerate() {
            if doc.doc_id.is_empty() {
                return Err(Error::InvalidCorpus("empty doc_id".into()));
            }
            if index.insert(doc.doc_id.clone(), i).is_some() {
                return Err(Error::InvalidCorpus(format!(
                    "doc_id '{}' appears twice",
                    doc.doc_id
                )));
            }
            if doc.seq_docid.len() != config.seq_len {
                return Err(Error::InvalidCorpus(format!(
                    "doc '{}': sequential docid has {} tokens, expected L={}",
                    doc.doc_id,
                    doc.seq_docid.len(),
                    config.seq_len
                )));
            }
            if let Some(&t) = doc
                .seq_docid
                .tokens()
                .iter()
                .find(|&&t| t >= config.docid_vocab)
            {
                return Err(Error::InvalidCorpus(format!(
                    "doc '{}': docid token {t} outside vocabulary [0, {})",
                    doc.doc_id, config.docid_vocab
                )));
            }
            if doc.set_docid.len() != config.set_size {
                return Err(Error::InvalidCorpus(format!(
                    "doc '{}': set docid has {} tokens, expected m={}",
                    doc.doc_id,
                    doc.set_docid.len(),
                    config.set_size
                )));
            }
            if let Some(t) = doc.set_docid.tokens().find(|&t| t >= config.planner_vocab) {
                return Err(Error::InvalidCorpus(format!(
                    "doc '{}': planner token {t} outside vocabulary [0, {})",
                    doc.doc_id, config.planner_vocab
                )));
            }
            if let Some(&first) = seen_seq.get(&doc.seq_docid) {
                return Err(Error::DuplicateSeqDocid {
                    first: first.to_string(),
                    second: doc.doc_id.clone(),
                });
            }
            seen_seq.insert(&doc.seq_docid, &doc.doc_id);
        }
        drop(seen_seq);
        Ok(Self {
            docid_vocab: DocidVocab::new(config.docid_vocab)?,
            planner_vocab: PlannerVocab::new(config.planner_vocab)?,
            seq_len: config.seq_len,
            set_size: config.set_size,
            documents,
            index,
        })
    }

    pub fn config(&self) -> CorpusConfig {
        CorpusConfig {
            seq_len: self.seq_len,
            docid_vocab: self.docid_vocab.size,
            planner_vocab: self.planner_vocab.size,
            set_size: self.set_size,
        }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn doc(&self, idx: usize) -> &Document {
        &self.documents[idx]
    }

    pub fn doc_index(&self, doc_id: &str) -> Option<usize> {
        self.index.get(doc_id).copied()
    }

    /// A copy of this corpus with every set docid truncated to its top
    /// `m_prime` entries.
    pub fn with_truncated_set_docids(&self, m_prime: usize) -> Result<Corpus> {
        if m_prime > self.set_size {
            return Err(Error::InvalidArgument(format!(
                "m' = {m_prime} exceeds m = {}",
                self.set_size
            )));
        }
        let documents = self
            .documents
            .iter()
            .map(|d| Document {
                doc_id: d.doc_id.clone(),
                seq_docid: d.seq_docid.clone(),
                set_docid: d.set_docid.truncated(m_prime),
                feature_vector: d.feature_vector.clone(),
            })
            .collect();
        let mut config = self.config();
        config.set_size = m_prime;
        Corpus::new(config, documents)
    }
}

/// One query. Perturbed copies keep the qid and change only the text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub qid: String,
    pub text: String,
}

impl Query {
    pub fn new(qid: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            qid: qid.into(),
            text: text.into(),
        }
    }
}

/// Relevance judgments: (qid, doc_id) -> grade, absent pairs meaning 0.
#[derive(Debug, Clone, Default)]
pub struct Qrels {
    by_query: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, qid: &str, doc_id: &str, grade: u32) {
        self.by_query
            .entry(qid.to_string())
            .or_default()
            .insert(doc_id.to_string(), grade);
    }

    pub fn grade(&self, qid: &str, doc_id: &str) -> u32 {
        self.by_query
            .get(qid)
            .and_then(|m| m.get(doc_id))
            .copied()
            .unwrap_or(0)
    }

    pub fn judged(&self, qid: &str) -> Option<&BTreeMap<String, u32>> {
        self.by_query.get(qid)
    }

    pub fn qids(&self) -> impl Iterator<Item = &String> {
        self.by_query.keys()
    }
}

/// Serialize a weight with 9 significant digits.
pub fn fmt_weight(w: f64) -> String {
    format!("{w:.8e}")
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Load and validate a corpus from a docids file, a set-docids file and a
/// config. Reports the offending line on malformed input and both documents
/// on a duplicated sequential docid.
pub fn load_corpus(
    docids_path: &Path,
    set_docids_path: &Path,
    config: CorpusConfig,
) -> Result<Corpus> {
    config.validate()?;
    let docids_text = fs::read_to_string(docids_path)?;
    let mut order: Vec<String> = Vec::new();
    let mut seq_by_doc: HashMap<String, SequentialDocid> = HashMap::new();
    for (lineno, line) in docids_text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        let (doc_id, toks) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(docids_path, lineno, "expected `doc_id<TAB>tokens`"))?;
        if doc_id.is_empty() {
            return Err(parse_err(docids_path, lineno, "empty doc_id"));
        }
        let mut tokens = Vec::with_capacity(config.seq_len);
        for part in toks.split(',') {
            let t: u32 = part.parse().map_err(|_| {
                parse_err(docids_path, lineno, format!("bad docid token '{part}'"))
            })?;
            if t >= config.docid_vocab {
                return Err(parse_err(
                    docids_path,
                    lineno,
                    format!("docid token {t} outside vocabulary [0, {})", config.docid_vocab),
                ));
            }
            tokens.push(t);
        }
        if tokens.len() != config.seq_len {
            return Err(parse_err(
                docids_path,
                lineno,
                format!("sequential docid has {} tokens, expected L={}", tokens.len(), config.seq_len),
            ));
        }
        if seq_by_doc
            .insert(doc_id.to_string(), SequentialDocid::new(tokens))
            .is_some()
        {
            return Err(parse_err(
                docids_path,
                lineno,
                format!("doc_id '{doc_id}' appears twice"),
            ));
        }
        order.push(doc_id.to_string());
    }

    let set_text = fs::read_to_string(set_docids_path)?;
    let mut set_by_doc: HashMap<String, SetDocid> = HashMap::new();
    for (lineno, line) in set_text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        let (doc_id, pairs_text) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(set_docids_path, lineno, "expected `doc_id<TAB>tok:weight,...`"))?;
        let mut pairs = Vec::with_capacity(config.set_size);
        for part in pairs_text.split(',') {
            let (tok, w) = part.split_once(':').ok_or_else(|| {
                parse_err(set_docids_path, lineno, format!("bad pair '{part}', expected tok:weight"))
            })?;
            let tok: u32 = tok.parse().map_err(|_| {
                parse_err(set_docids_path, lineno, format!("bad planner token '{tok}'"))
            })?;
            let w: f64 = w.parse().map_err(|_| {
                parse_err(set_docids_path, lineno, format!("bad weight '{w}'"))
            })?;
            pairs.push((tok, w));
        }
        if pairs.len() != config.set_size {
            return Err(parse_err(
                set_docids_path,
                lineno,
                format!("set docid has {} entries, expected m={}", pairs.len(), config.set_size),
            ));
        }
        let set = SetDocid::from_pairs(pairs)
            .map_err(|e| parse_err(set_docids_path, lineno, e.to_string()))?;
        if set_by_doc.insert(doc_id.to_string(), set).is_some() {
            return Err(parse_err(
                set_docids_path,
                lineno,
                format!("doc_id '{doc_id}' appears twice"),
            ));
        }
    }

    let mut documents = Vec::with_capacity(order.len());
    for doc_id in order {
        let seq_docid = seq_by_doc.remove(&doc_id).unwrap();
        let set_docid = set_by_doc.remove(&doc_id).ok_or_else(|| {
            Error::InvalidCorpus(format!("doc '{doc_id}' has no set docid"))
        })?;
        documents.push(Document {
            doc_id,
            seq_docid,
            set_docid,
            feature_vector: None,
        });
    }
    if let Some(extra) = set_by_doc.keys().min() {
        return Err(Error::InvalidCorpus(format!(
            "set-docids file names unknown doc '{extra}'"
        )));
    }
    Corpus::new(config, documents)
}

/// Write a corpus back to its two identifier files in canonical form.
pub fn write_corpus(corpus: &Corpus, docids_path: &Path, set_docids_path: &Path) -> Result<()> {
    let mut docids = String::new();
    for doc in corpus.documents() {
        docids.push_str(&doc.doc_id);
        docids.push('\t');
        docids.push_str(&doc.seq_docid.to_string());
        docids.push('\n');
    }
    fs::write(docids_path, docids)?;
    write_set_docids(corpus, set_docids_path)
}

/// Write just the set-docids file in canonical form.
pub fn write_set_docids(corpus: &Corpus, path: &Path) -> Result<()> {
    let mut sets = String::new();
    for doc in corpus.documents() {
        sets.push_str(&doc.doc_id);
        sets.push('\t');
        for (i, &(tok, w)) in doc.set_docid.entries().iter().enumerate() {
            if i > 0 {
                sets.push(',');
            }
            sets.push_str(&format!("{tok}:{}", fmt_weight(w)));
        }
        sets.push('\n');
    }
    fs::write(path, sets)?;
    Ok(())
}

/// Read a queries TSV (`qid \t text`).
pub fn read_queries(path: &Path) -> Result<Vec<Query>> {
    let text = fs::read_to_string(path)?;
    let mut queries = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        let (qid, qtext) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(path, lineno, "expected `qid<TAB>text`"))?;
        if !seen.insert(qid.to_string()) {
            return Err(parse_err(path, lineno, format!("qid '{qid}' appears twice")));
        }
        queries.push(Query::new(qid, qtext));
    }
    Ok(queries)
}

/// Write a queries TSV in canonical form.
pub fn write_queries(path: &Path, queries: &[Query]) -> Result<()> {
    let mut out = String::new();
    for q in queries {
        out.push_str(&q.qid);
        out.push('\t');
        out.push_str(&q.text);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Select the `m` highest-weight tokens, breaking weight ties by ascending
/// token id. Only strictly positive weights are eligible; if fewer than `m`
/// exist the caller must lower `m` or densify the weights.
pub fn derive_set_docid(token_weights: &BTreeMap<u32, f64>, m: usize) -> Result<SetDocid> {
    if m < 1 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let mut positive: Vec<(u32, f64)> = token_weights
        .iter()
        .filter(|&(_, &w)| w > 0.0)
        .map(|(&t, &w)| (t, w))
        .collect();
    if positive.len() < m {
        return Err(Error::TopMShortfall {
            requested: m,
            available: positive.len(),
        });
    }
    positive.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    positive.truncate(m);
    SetDocid::from_pairs(positive)
}

/// Parameters for [`generate_synthetic_corpus`].
#[derive(Debug, Clone, Copy)]
pub struct SyntheticSpec {
    pub num_docs: usize,
    pub config: CorpusConfig,
    pub vector_dim: usize,
    pub seed: u64,
}

/// Deterministically generate a corpus: Gaussian feature vectors, sequential
/// docids via residual quantization, and set docids from a topic mixture so
/// that documents close in vector space share planner tokens.
pub fn generate_synthetic_corpus(
    spec: SyntheticSpec,
) -> Result<(Corpus, BTreeMap<String, Vec<f64>>)> {
    let cfg = spec.config;
    cfg.validate()?;
    if spec.num_docs < 1 || spec.vector_dim < 1 {
        return Err(Error::InvalidArgument(
            "num_docs and vector_dim must be >= 1".into(),
        ));
    }
    if let Some(capacity) = (cfg.docid_vocab as u128).checked_pow(cfg.seq_len as u32) {
        if spec.num_docs as u128 > capacity {
            return Err(Error::DocidSpaceExhausted {
                requested: spec.num_docs,
                capacity,
            });
        }
    }

    let width = spec.num_docs.saturating_sub(1).to_string().len().max(4);
    let doc_ids: Vec<String> = (0..spec.num_docs)
        .map(|i| format!("d{i:0width$}"))
        .collect();

    let mut rng = SplitMix64::new(spec.seed);
    let mut vec_rng = rng.fork("vectors");
    let mut vectors: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for doc_id in &doc_ids {
        let v: Vec<f64> = (0..spec.vector_dim).map(|_| vec_rng.next_gaussian()).collect();
        vectors.insert(doc_id.clone(), v);
    }

    let rq_seed = {
        let mut h = StableHasher::new();
        h.write_u64(spec.seed).write_str("rq");
        h.finish()
    };
    let seq_docids = rq::build_rq_docids(&vectors, cfg.seq_len, cfg.docid_vocab, rq_seed)?;

    // Topic mixture: each topic owns a pool of planner tokens; a document
    // draws its weights from the pool of the nearest topic center, so nearby
    // documents share planning evidence.
    let num_topics = spec.num_docs.clamp(1, 8);
    let mut topic_rng = rng.fork("topics");
    let centers: Vec<Vec<f64>> = (0..num_topics)
        .map(|_| (0..spec.vector_dim).map(|_| topic_rng.next_gaussian()).collect())
        .collect();
    let pool_size = (2 * cfg.set_size).min(cfg.planner_vocab as usize).max(cfg.set_size.min(cfg.planner_vocab as usize));
    let mut pools: Vec<Vec<u32>> = Vec::with_capacity(num_topics);
    for t in 0..num_topics {
        let mut all: Vec<u32> = (0..cfg.planner_vocab).collect();
        let mut pool_rng = SplitMix64::new(hash_str(spec.seed, &format!("pool-{t}")));
        pool_rng.shuffle(&mut all);
        all.truncate(pool_size);
        pools.push(all);
    }

    let mut documents = Vec::with_capacity(spec.num_docs);
    for doc_id in &doc_ids {
        let v = &vectors[doc_id];
        let topic = nearest_center(v, &centers);
        let mut weights: BTreeMap<u32, f64> = BTreeMap::new();
        for &tok in &pools[topic] {
            let base = unit_weight(hash_str(spec.seed, &format!("base-{topic}-{tok}")));
            let jitter = unit_weight(hash_str(spec.seed, &format!("jit-{doc_id}-{tok}")));
            weights.insert(tok, 0.5 * base + 0.5 * jitter);
        }
        let set_docid = derive_set_docid(&weights, cfg.set_size)?;
        documents.push(Document {
            doc_id: doc_id.clone(),
            seq_docid: seq_docids[doc_id].clone(),
            set_docid,
            feature_vector: Some(v.clone()),
        });
    }

    let corpus = Corpus::new(cfg, documents)?;
    Ok((corpus, vectors))
}

fn nearest_center(v: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d: f64 = v.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Map a hash to a weight in [0.1, 1.0) so mixture weights stay strictly positive.
fn unit_weight(h: u64) -> f64 {
    0.1 + 0.9 * ((h >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
}
