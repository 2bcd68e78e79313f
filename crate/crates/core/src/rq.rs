//! Residual-quantization builder for sequential docids.
//!
//! Fits L codebooks of V centroids level-by-level on residuals with seeded
//! k-means (k-means++ initialization, a fixed 25 iterations, empty clusters
//! re-seeded to the farthest point), then assigns each document the index of
//! its nearest centroid per level. Identical token sequences are resolved by
//! a disambiguation pass so the uniqueness invariant always holds.

use std::collections::{BTreeMap, HashSet};

use crate::corpus::SequentialDocid;
use crate::error::{Error, Result};
use crate::rng::{SplitMix64, StableHasher};

const KMEANS_ITERATIONS: usize = 25;

/// Build one sequential docid per document from its feature vector.
/// Deterministic for a fixed seed.
pub fn build_rq_docids(
    vectors: &BTreeMap<String, Vec<f64>>,
    seq_len: usize,
    vocab: u32,
    seed: u64,
) -> Result<BTreeMap<String, SequentialDocid>> {
    if vectors.is_empty() {
        return Err(Error::InvalidArgument("no vectors to quantize".into()));
    }
    if seq_len < 1 || vocab < 1 {
        return Err(Error::InvalidArgument("L and V must be >= 1".into()));
    }
    let dim = vectors.values().next().unwrap().len();
    if dim == 0 {
        return Err(Error::InvalidArgument("vectors must have dimension >= 1".into()));
    }
    for (doc_id, v) in vectors {
        if v.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "vector for '{doc_id}' has dimension {}, expected {dim}",
                v.len()
            )));
        }
    }

    // Ascending doc_id order fixes every downstream tie-break.
    let doc_ids: Vec<&String> = vectors.keys().collect();
    let mut residuals: Vec<Vec<f64>> = doc_ids.iter().map(|id| vectors[*id].clone()).collect();

    let mut codes: Vec<Vec<u32>> = vec![Vec::with_capacity(seq_len); doc_ids.len()];
    let mut last_level_inputs: Vec<Vec<f64>> = Vec::new();
    let mut last_codebook: Vec<Vec<f64>> = Vec::new();
    for level in 0..seq_len {
        let level_seed = {
            let mut h = StableHasher::new();
            h.write_u64(seed).write_u64(level as u64);
            h.finish()
        };
        let codebook = kmeans(&residuals, vocab as usize, SplitMix64::new(level_seed));
        if level == seq_len - 1 {
            last_level_inputs = residuals.clone();
            last_codebook = codebook.clone();
        }
        for (i, r) in residuals.iter_mut().enumerate() {
            let token = nearest(r, &codebook);
            codes[i].push(token as u32);
            for (x, c) in r.iter_mut().zip(&codebook[token]) {
                *x -= c;
            }
        }
    }

    // Disambiguation: in ascending doc_id order, a colliding document first
    // tries the nearest unused centroid index at the final level; when every
    // final token under its prefix is taken, it falls back to the
    // lexicographically smallest unused sequence.
    let mut used: HashSet<Vec<u32>> = HashSet::new();
    let mut out = BTreeMap::new();
    for (i, doc_id) in doc_ids.iter().enumerate() {
        let mut code = codes[i].clone();
        if !used.insert(code.clone()) {
            let mut by_distance: Vec<(f64, u32)> = last_codebook
                .iter()
                .enumerate()
                .map(|(t, c)| (sq_dist(&last_level_inputs[i], c), t as u32))
                .collect();
            by_distance.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let mut resolved = false;
            for &(_, t) in &by_distance {
                code[seq_len - 1] = t;
                if used.insert(code.clone()) {
                    resolved = true;
                    break;
                }
            }
            if !resolved {
                code = smallest_unused(&used, seq_len, vocab).ok_or_else(|| {
                    Error::DocidSpaceExhausted {
                        requested: doc_ids.len(),
                        capacity: (vocab as u128).pow(seq_len as u32),
                    }
                })?;
                used.insert(code.clone());
            }
        }
        out.insert((*doc_id).clone(), SequentialDocid::new(code));
    }
    Ok(out)
}

/// Lexicographically smallest length-L sequence over [0, V) not yet used.
fn smallest_unused(used: &HashSet<Vec<u32>>, seq_len: usize, vocab: u32) -> Option<Vec<u32>> {
    let mut code = vec![0u32; seq_len];
    loop {
        if !used.contains(&code) {
            return Some(code);
        }
        // Increment like an odometer, most significant token first.
        let mut pos = seq_len;
        loop {
            if pos == 0 {
                return None;
            }
            pos -= 1;
            if code[pos] + 1 < vocab {
                code[pos] += 1;
                for c in code[pos + 1..].iter_mut() {
                    *c = 0;
                }
                break;
            }
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid index, ties broken by lowest index.
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Seeded k-means with k-means++ initialization and a fixed iteration count.
fn kmeans(points: &[Vec<f64>], k: usize, mut rng: SplitMix64) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(n as u64) as usize].clone());
    let mut dists: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = dists.iter().sum();
        let idx = if total > 0.0 {
            let threshold = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &d) in dists.iter().enumerate() {
                acc += d;
                if acc >= threshold {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(n as u64) as usize
        };
        let c = points[idx].clone();
        for (i, p) in points.iter().enumerate() {
            dists[i] = dists[i].min(sq_dist(p, &c));
        }
        centroids.push(c);
    }

    let dim = points[0].len();
    let mut assignment = vec![0usize; n];
    for _ in 0..KMEANS_ITERATIONS {
        for (i, p) in points.iter().enumerate() {
            assignment[i] = nearest(p, &centroids);
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            let c = assignment[i];
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(p) {
                *s += x;
            }
        }
        // Empty clusters grab the farthest point, each a distinct one per round.
        let mut claimed: HashSet<usize> = HashSet::new();
        for c in 0..k {
            if counts[c] > 0 {
                for (s, out) in sums[c].iter().zip(centroids[c].iter_mut()) {
                    *out = s / counts[c] as f64;
                }
            } else {
                let mut far_idx = 0;
                let mut far_d = f64::NEG_INFINITY;
                for (i, p) in points.iter().enumerate() {
                    if claimed.contains(&i) {
                        continue;
                    }
                    let d = sq_dist(p, &centroids[assignment[i]]);
                    if d > far_d {
                        far_d = d;
                        far_idx = i;
                    }
                }
                claimed.insert(far_idx);
                centroids[c] = points[far_idx].clone();
            }
        }
    }
    centroids
}
