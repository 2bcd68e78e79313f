//! Immutable prefix tree over all sequential docids.
//!
//! The trie defines valid expansions for constrained beam search and answers
//! which documents live under a prefix. It is write-once: built from a
//! corpus, then only read. Children are stored sorted by token id so that
//! iteration order, and hence all downstream tie-breaking, is deterministic.

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Documented constants for the memory-estimate formula:
/// `estimated_bytes = node_count * C_NODE + edge_count * C_EDGE`.
pub const C_NODE: u64 = 40;
pub const C_EDGE: u64 = 12;

#[derive(Debug)]
struct TrieNode {
    /// (token, child node index), sorted by token.
    children: Vec<(u32, u32)>,
    /// Document index for leaf nodes (singleton under docid uniqueness).
    doc: Option<u32>,
    /// Parent node (the root points at itself).
    parent: u32,
}

/// Prefix tree over a corpus's sequential docids.
#[derive(Debug)]
pub struct DocidTrie {
    nodes: Vec<TrieNode>,
    depth: usize,
    leaf_count: usize,
    doc_ids: Vec<String>,
    /// Document index -> leaf node, for walking paths bottom-up.
    doc_leaf: Vec<u32>,
    doc_index: std::collections::HashMap<String, u32>,
}

/// Exact node/leaf counts plus the documented byte estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrieStats {
    pub node_count: u64,
    pub leaf_count: u64,
    pub edge_count: u64,
    pub estimated_bytes: u64,
}

impl DocidTrie {
    /// Build the trie for a corpus. Corpus invariants are rechecked
    /// defensively: every root-to-leaf path must have length exactly L and
    /// leaf count must equal the document count.
    pub fn build(corpus: &Corpus) -> Result<Self> {
        let mut nodes = vec![TrieNode {
            children: Vec::new(),
            doc: None,
            parent: 0,
        }];
        let mut doc_leaf = Vec::with_capacity(corpus.len());
        let mut leaf_count = 0usize;
        for (doc_idx, doc) in corpus.documents().iter().enumerate() {
            let mut cur = 0u32;
            for &token in doc.seq_docid.tokens() {
                let pos = nodes[cur as usize]
                    .children
                    .binary_search_by_key(&token, |&(t, _)| t);
                cur = match pos {
                    Ok(i) => nodes[cur as usize].children[i].1,
                    Err(i) => {
                        let child = nodes.len() as u32;
                        nodes.push(TrieNode {
                            children: Vec::new(),
                            doc: None,
                            parent: cur,
                        });
                        nodes[cur as usize].children.insert(i, (token, child));
                        child
                    }
                };
            }
            let leaf = &mut nodes[cur as usize];
            if let Some(prev) = leaf.doc {
                return Err(Error::DuplicateSeqDocid {
                    first: corpus.doc(prev as usize).doc_id.clone(),
                    second: doc.doc_id.clone(),
                });
            }
            if !leaf.children.is_empty() {
                return Err(Error::InvalidCorpus(format!(
                    "docid of '{}' is a prefix of another docid",
                    doc.doc_id
                )));
            }
            leaf.doc = Some(doc_idx as u32);
            doc_leaf.push(cur);
            leaf_count += 1;
        }
        if leaf_count != corpus.len() {
            return Err(Error::InvalidCorpus("leaf count != document count".into()));
        }
        let doc_ids: Vec<String> = corpus.documents().iter().map(|d| d.doc_id.clone()).collect();
        let doc_index = doc_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as u32))
            .collect();
        Ok(Self {
            nodes,
            depth: corpus.seq_len,
            leaf_count,
            doc_ids,
            doc_leaf,
            doc_index,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_count
    }

    /// The node index reached by walking `prefix` from the root.
    pub(crate) fn node_at(&self, prefix: &[u32]) -> Option<u32> {
        let mut cur = 0u32;
        for &token in prefix {
            let node = &self.nodes[cur as usize];
            match node.children.binary_search_by_key(&token, |&(t, _)| t) {
                Ok(i) => cur = node.children[i].1,
                Err(_) => return None,
            }
        }
        Some(cur)
    }

    pub(crate) fn children(&self, node: u32) -> &[(u32, u32)] {
        &self.nodes[node as usize].children
    }

    pub(crate) fn doc_at(&self, node: u32) -> Option<u32> {
        self.nodes[node as usize].doc
    }

    pub(crate) fn doc_id(&self, doc_idx: u32) -> &str {
        &self.doc_ids[doc_idx as usize]
    }

    pub(crate) fn parent(&self, node: u32) -> u32 {
        self.nodes[node as usize].parent
    }

    pub(crate) fn leaf_of(&self, doc_idx: u32) -> u32 {
        self.doc_leaf[doc_idx as usize]
    }

    pub(crate) fn doc_idx(&self, doc_id: &str) -> Option<u32> {
        self.doc_index.get(doc_id).copied()
    }

    /// Valid next tokens after `prefix`: the child tokens of the node at
    /// `prefix`, sorted ascending; empty if the prefix is invalid or complete.
    pub fn valid_next(&self, prefix: &[u32]) -> Vec<u32> {
        match self.node_at(prefix) {
            Some(node) => self.children(node).iter().map(|&(t, _)| t).collect(),
            None => Vec::new(),
        }
    }

    /// True iff some corpus docid starts with `prefix`.
    pub fn is_valid_prefix(&self, prefix: &[u32]) -> bool {
        self.node_at(prefix).is_some()
    }

    /// Doc ids of exactly the documents whose seq_docid extends `prefix`,
    /// in ascending doc_id order.
    pub fn docs_under(&self, prefix: &[u32]) -> Vec<&str> {
        let Some(start) = self.node_at(prefix) else {
            return Vec::new();
        };
        let mut out: Vec<&str> = Vec::new();
        let mut stack = vec![start];
        while let Some(node) = stack.pop() {
            if let Some(doc) = self.doc_at(node) {
                out.push(self.doc_id(doc));
            }
            for &(_, child) in self.children(node) {
                stack.push(child);
            }
        }
        out.sort_unstable();
        out
    }

    pub fn stats(&self) -> TrieStats {
        let node_count = self.nodes.len() as u64;
        let edge_count = node_count - 1;
        TrieStats {
            node_count,
            leaf_count: self.leaf_count as u64,
            edge_count,
            estimated_bytes: node_count * C_NODE + edge_count * C_EDGE,
        }
    }
}

/// Build the prefix tree for a corpus.
pub fn build_trie(corpus: &Corpus) -> Result<DocidTrie> {
    DocidTrie::build(corpus)
}
