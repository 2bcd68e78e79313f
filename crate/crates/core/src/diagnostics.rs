//! Plan-drift diagnostics: candidate-set and planner-token stability,
//! planning-only effectiveness deltas, counterfactual plan-swap drops,
//! guided-decoding gains, the plan-collapse criterion, quantile summaries,
//! and the temperature-scaled alignment KL loss.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::PlannerTokenSet;
use crate::scorer::PlannerWeights;

/// Default distillation temperature for [`align_kl_loss`].
pub const DEFAULT_ALIGN_TEMPERATURE: f64 = 2.0;
/// Default per-side top-K truncation for [`align_kl_loss`].
pub const DEFAULT_ALIGN_TOPK: usize = 100;

/// Per-query diagnostics for one (clean, perturbed) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairDiagnostics {
    pub qid: String,
    /// Stability of the top-K planned candidate set, in [0, 1].
    pub cand_overlap: f64,
    /// Stability of the top-l planner-token set, in [0, 1].
    pub tok_jaccard: f64,
    /// Change in planning-only effectiveness; negative = degradation.
    pub delta_simul: f64,
    /// Effect of decoding the perturbed query under its own plan rather
    /// than the clean plan; negative = the clean plan helps.
    pub plan_swap_drop: f64,
    /// Gain of guided decoding over planning-only retrieval, clean query.
    pub seq_gain_clean: f64,
    /// Same gain on the perturbed query.
    pub seq_gain_perturbed: f64,
}

/// Mean, population std, and linear-interpolation quantiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileSummary {
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub p10: f64,
    pub p25: f64,
    pub p75: f64,
    pub p90: f64,
}

/// Summary of one condition (split x kind x seed).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub split: String,
    pub kind: String,
    pub seed: u64,
    /// Per-diagnostic quantile summaries, keyed by diagnostic name.
    pub metrics: std::collections::BTreeMap<String, QuantileSummary>,
    pub collapse_rate: f64,
    pub tau_used: f64,
    pub delta_used: f64,
    pub n_queries: usize,
}

/// Candidate-set overlap between the clean and perturbed top-K planned
/// documents. The denominator is K, capped by the attainable list length so
/// self-comparison is 1.0 even on corpora smaller than K; it equals
/// `|intersection| / K` whenever the corpus holds at least K documents.
pub fn cand_overlap(
    top_clean: &[(String, f64)],
    top_perturbed: &[(String, f64)],
    k: usize,
) -> f64 {
    let clean: BTreeSet<&str> = top_clean.iter().take(k).map(|(d, _)| d.as_str()).collect();
    let pert: BTreeSet<&str> = top_perturbed
        .iter()
        .take(k)
        .map(|(d, _)| d.as_str())
        .collect();
    let denom = k.min(clean.len().max(pert.len()));
    if denom == 0 {
        return 1.0;
    }
    clean.intersection(&pert).count() as f64 / denom as f64
}

/// Token-set Jaccard similarity between two top-l planner-token sets.
/// Two empty sets compare as 1.0 (nothing fired either time).
pub fn tok_jaccard(p_clean: &PlannerTokenSet, p_perturbed: &PlannerTokenSet) -> f64 {
    tok_jaccard_with_empty(p_clean, p_perturbed, 1.0)
}

/// [`tok_jaccard`] with an explicit value for the both-empty case.
pub fn tok_jaccard_with_empty(
    p_clean: &PlannerTokenSet,
    p_perturbed: &PlannerTokenSet,
    empty_value: f64,
) -> f64 {
    let a: BTreeSet<u32> = p_clean.tokens().collect();
    let b: BTreeSet<u32> = p_perturbed.tokens().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return empty_value;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// Metric change under variation: `M(perturbed) - M(clean)`.
pub fn delta_simul(metric_clean: f64, metric_perturbed: f64) -> f64 {
    metric_perturbed - metric_clean
}

/// `M(perturbed; own plan) - M(perturbed; clean plan)`. Negative values mean
/// the clean-query plan improves effectiveness.
pub fn plan_swap_drop(metric_normal: f64, metric_swapped: f64) -> f64 {
    metric_normal - metric_swapped
}

/// Marginal gain of guided decoding over planning-only retrieval.
pub fn seq_gain(metric_pag: f64, metric_simul_only: f64) -> f64 {
    metric_pag - metric_simul_only
}

/// Linear-interpolation quantile (between closest ranks) of sorted values:
/// `h = (n-1) * p`, interpolating between `floor(h)` and `floor(h) + 1`.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

/// Linear-interpolation quantile of an unsorted value list, p in [0, 1].
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("quantile of an empty list".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("quantile p {p} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, p))
}

/// Summarize a nonempty value list. Std uses the population divisor n.
pub fn quantile_summary(values: &[f64]) -> Result<QuantileSummary> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("cannot summarize an empty list".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Ok(QuantileSummary {
        mean,
        std: var.sqrt(),
        median: quantile_sorted(&sorted, 0.50),
        p10: quantile_sorted(&sorted, 0.10),
        p25: quantile_sorted(&sorted, 0.25),
        p75: quantile_sorted(&sorted, 0.75),
        p90: quantile_sorted(&sorted, 0.90),
    })
}

/// Flag collapsed queries: low stability AND a planning-only drop of at
/// least delta. The threshold tau is the given percentile of this
/// condition's CandOverlap distribution and is applied to both overlap
/// diagnostics. `delta = f64::INFINITY` is the "never" sentinel.
pub fn collapse_flags(
    pair_diags: &[PairDiagnostics],
    delta_list: &[f64],
    tau_percentile: f64,
    delta: f64,
) -> Result<(Vec<bool>, f64)> {
    if pair_diags.is_empty() {
        return Err(Error::InvalidArgument("collapse_flags needs at least one pair".into()));
    }
    if pair_diags.len() != delta_list.len() {
        return Err(Error::InvalidArgument(format!(
            "pair list ({}) and delta list ({}) are misaligned",
            pair_diags.len(),
            delta_list.len()
        )));
    }
    if !(0.0..=100.0).contains(&tau_percentile) {
        return Err(Error::InvalidArgument(format!(
            "tau percentile {tau_percentile} outside [0, 100]"
        )));
    }
    let mut overlaps: Vec<f64> = pair_diags.iter().map(|p| p.cand_overlap).collect();
    overlaps.sort_by(f64::total_cmp);
    let tau = quantile_sorted(&overlaps, tau_percentile / 100.0);
    let flags = pair_diags
        .iter()
        .zip(delta_list)
        .map(|(p, &d)| (p.cand_overlap < tau || p.tok_jaccard < tau) && d <= -delta)
        .collect();
    Ok((flags, tau))
}

/// Fraction of flagged queries.
pub fn collapse_rate(flags: &[bool]) -> f64 {
    if flags.is_empty() {
        return 0.0;
    }
    flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64
}

/// Summarize one condition: quantiles per diagnostic plus the collapse rate
/// computed from the pairs' own planning-only deltas.
pub fn summarize_condition(
    split: &str,
    kind: &str,
    seed: u64,
    pairs: &[PairDiagnostics],
    tau_percentile: f64,
    delta: f64,
) -> Result<ConditionSummary> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("cannot summarize an empty condition".into()));
    }
    let deltas: Vec<f64> = pairs.iter().map(|p| p.delta_simul).collect();
    let (flags, tau_used) = collapse_flags(pairs, &deltas, tau_percentile, delta)?;
    let mut metrics = std::collections::BTreeMap::new();
    let column = |getter: fn(&PairDiagnostics) -> f64| -> Vec<f64> {
        pairs.iter().map(getter).collect()
    };
    for (name, values) in [
        ("cand_overlap", column(|p| p.cand_overlap)),
        ("tok_jaccard", column(|p| p.tok_jaccard)),
        ("delta_simul", column(|p| p.delta_simul)),
        ("plan_swap_drop", column(|p| p.plan_swap_drop)),
        ("seq_gain_clean", column(|p| p.seq_gain_clean)),
        ("seq_gain_perturbed", column(|p| p.seq_gain_perturbed)),
    ] {
        metrics.insert(name.to_string(), quantile_summary(&values)?);
    }
    Ok(ConditionSummary {
        split: split.to_string(),
        kind: kind.to_string(),
        seed,
        metrics,
        collapse_rate: collapse_rate(&flags),
        tau_used,
        delta_used: delta,
        n_queries: pairs.len(),
    })
}

/// Temperature-scaled KL alignment loss between teacher and student planner
/// weights: both restricted to the union U of their top-K tokens (absent
/// tokens contribute logit 0), softmaxed at the given temperature, with
/// `tau^2 * KL(teacher || student)` returned.
pub fn align_kl_loss(
    z_teacher: &PlannerWeights,
    z_student: &PlannerWeights,
    temperature: f64,
    topk: usize,
) -> Result<f64> {
    if temperature <= 0.0 || !temperature.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if topk < 1 {
        return Err(Error::InvalidArgument("topk must be >= 1".into()));
    }
    let union: BTreeSet<u32> = top_k_tokens(z_teacher, topk)
        .into_iter()
        .chain(top_k_tokens(z_student, topk))
        .collect();
    if union.is_empty() {
        return Err(Error::InvalidArgument(
            "alignment loss undefined: both inputs are empty".into(),
        ));
    }
    let teacher: Vec<f64> = union.iter().map(|&t| z_teacher.get(t) / temperature).collect();
    let student: Vec<f64> = union.iter().map(|&t| z_student.get(t) / temperature).collect();
    let log_p = log_softmax(&teacher);
    let log_q = log_softmax(&student);
    let kl: f64 = log_p
        .iter()
        .zip(&log_q)
        .map(|(&lp, &lq)| lp.exp() * (lp - lq))
        .sum();
    Ok(temperature * temperature * kl)
}

/// Top-k token ids by (descending weight, ascending id).
fn top_k_tokens(weights: &PlannerWeights, k: usize) -> Vec<u32> {
    let mut entries: Vec<(u32, f64)> = weights.iter().collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    entries.truncate(k);
    entries.into_iter().map(|(t, _)| t).collect()
}

fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    logits.iter().map(|x| x - lse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::top_tokens;
    use crate::rng::SplitMix64;

    fn entries(ids: &[&str]) -> Vec<(String, f64)> {
        ids.iter()
            .enumerate()
            .map(|(i, d)| (d.to_string(), (ids.len() - i) as f64))
            .collect()
    }

    fn token_set(ids: &[u32]) -> PlannerTokenSet {
        let weights: PlannerWeights = ids.iter().map(|&t| (t, 1.0)).collect();
        top_tokens(&weights, ids.len().max(1)).unwrap()
    }

    fn pair(qid: &str, overlap: f64, jaccard: f64, delta: f64) -> PairDiagnostics {
        PairDiagnostics {
            qid: qid.to_string(),
            cand_overlap: overlap,
            tok_jaccard: jaccard,
            delta_simul: delta,
            plan_swap_drop: 0.0,
            seq_gain_clean: 0.0,
            seq_gain_perturbed: 0.0,
        }
    }

    #[test]
    fn cand_overlap_examples() {
        let a = entries(&["d1", "d2", "d3", "d4"]);
        assert_eq!(cand_overlap(&a, &a, 4), 1.0);
        let disjoint = entries(&["x1", "x2", "x3", "x4"]);
        assert_eq!(cand_overlap(&a, &disjoint, 4), 0.0);
        let half = entries(&["d1", "d2", "y1", "y2"]);
        assert_eq!(cand_overlap(&a, &half, 4), 0.5);
    }

    #[test]
    fn cand_overlap_self_is_one_on_small_corpora() {
        let a = entries(&["d1", "d2"]);
        assert_eq!(cand_overlap(&a, &a, 100), 1.0);
    }

    #[test]
    fn tok_jaccard_examples() {
        let abc = token_set(&[1, 2, 3]);
        assert_eq!(tok_jaccard(&abc, &abc), 1.0);
        let bcd = token_set(&[2, 3, 4]);
        assert_eq!(tok_jaccard(&abc, &bcd), 0.5);
        let empty = token_set(&[]);
        assert_eq!(tok_jaccard(&empty, &empty), 1.0);
        assert_eq!(tok_jaccard_with_empty(&empty, &empty, 0.0), 0.0);
    }

    #[test]
    fn overlap_metrics_are_symmetric_and_bounded() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..200 {
            let a: Vec<u32> = (0..rng.gen_range(20)).map(|_| rng.gen_range(30) as u32).collect();
            let b: Vec<u32> = (0..rng.gen_range(20)).map(|_| rng.gen_range(30) as u32).collect();
            let sa = token_set(&a);
            let sb = token_set(&b);
            let ab = tok_jaccard(&sa, &sb);
            assert_eq!(ab, tok_jaccard(&sb, &sa));
            assert!((0.0..=1.0).contains(&ab));
            let ea: Vec<(String, f64)> = a.iter().enumerate().map(|(i, v)| (format!("d{v}"), (99 - i) as f64)).collect();
            let eb: Vec<(String, f64)> = b.iter().enumerate().map(|(i, v)| (format!("d{v}"), (99 - i) as f64)).collect();
            let o = cand_overlap(&ea, &eb, 10);
            let o_rev = cand_overlap(&eb, &ea, 10);
            assert_eq!(o, o_rev);
            assert!((0.0..=1.0).contains(&o));
        }
    }

    #[test]
    fn tok_jaccard_matches_independent_set_ops() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..100 {
            let a: Vec<u32> = (0..100).map(|_| rng.gen_range(400) as u32).collect();
            let b: Vec<u32> = (0..100).map(|_| rng.gen_range(400) as u32).collect();
            let sa = token_set(&a);
            let sb = token_set(&b);
            // Brute force over raw id sets.
            let set_a: BTreeSet<u32> = sa.tokens().collect();
            let set_b: BTreeSet<u32> = sb.tokens().collect();
            let inter = set_a.iter().filter(|t| set_b.contains(t)).count();
            let union = set_a.len() + set_b.len() - inter;
            assert_eq!(tok_jaccard(&sa, &sb), inter as f64 / union as f64);
        }
    }

    #[test]
    fn difference_diagnostics_are_plain_subtractions() {
        assert_eq!(delta_simul(0.5, 0.5), 0.0);
        assert!((delta_simul(0.5, 0.3) + 0.2).abs() < 1e-15);
        assert_eq!(plan_swap_drop(0.4, 0.5), 0.4 - 0.5);
        assert_eq!(plan_swap_drop(0.5, 0.5), 0.0);
        assert_eq!(seq_gain(0.4, 0.3), 0.4 - 0.3);
        assert_eq!(seq_gain(0.3, 0.3), 0.0);
    }

    #[test]
    fn quantile_summary_examples() {
        let s = quantile_summary(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.median, 2.0);
        assert_eq!(s.mean, 2.0);
        let c = quantile_summary(&[4.0; 10]).unwrap();
        assert_eq!(c.std, 0.0);
        assert_eq!(c.p10, 4.0);
        assert_eq!(c.p90, 4.0);
        assert!(quantile_summary(&[]).is_err());
    }

    #[test]
    fn quantiles_match_sort_based_oracle() {
        let mut rng = SplitMix64::new(9);
        let values: Vec<f64> = (0..1000).map(|_| rng.next_f64()).collect();
        let s = quantile_summary(&values).unwrap();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        for (p, got) in [
            (0.10, s.p10),
            (0.25, s.p25),
            (0.50, s.median),
            (0.75, s.p75),
            (0.90, s.p90),
        ] {
            let h = (sorted.len() - 1) as f64 * p;
            let lo = h.floor() as usize;
            let want = sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo]);
            assert!((got - want).abs() < 1e-12, "p{p}: {got} vs {want}");
        }
    }

    #[test]
    fn stable_conditions_never_collapse() {
        let pairs: Vec<PairDiagnostics> =
            (0..50).map(|i| pair(&format!("q{i}"), 1.0, 1.0, 0.0)).collect();
        let deltas = vec![0.0; 50];
        let (flags, _) = collapse_flags(&pairs, &deltas, 10.0, 0.05).unwrap();
        assert!(flags.iter().all(|&f| !f));
    }

    #[test]
    fn low_stability_with_drop_is_flagged() {
        let mut pairs: Vec<PairDiagnostics> = (0..99)
            .map(|i| pair(&format!("q{i}"), 0.5 + (i as f64) * 0.005, 0.9, 0.0))
            .collect();
        pairs.push(pair("q99", 0.01, 0.02, -0.06));
        let deltas: Vec<f64> = pairs.iter().map(|p| p.delta_simul).collect();
        let (flags, tau) = collapse_flags(&pairs, &deltas, 10.0, 0.05).unwrap();
        assert!(tau > 0.02);
        assert!(flags[99]);
        assert_eq!(flags.iter().filter(|&&f| f).count(), 1);
    }

    #[test]
    fn infinite_delta_sentinel_never_collapses() {
        let pairs: Vec<PairDiagnostics> =
            (0..40).map(|i| pair(&format!("q{i}"), 0.0, 0.0, -0.5)).collect();
        let deltas = vec![-0.5; 40];
        let (flags, _) = collapse_flags(&pairs, &deltas, 10.0, f64::INFINITY).unwrap();
        assert!(flags.iter().all(|&f| !f));
    }

    #[test]
    fn percentile_100_and_zero_delta_reduce_to_delta_condition() {
        // All jaccards sit below the p100 overlap threshold, so the
        // stability disjunct holds everywhere and flags equal the delta test.
        let mut rng = SplitMix64::new(5);
        let pairs: Vec<PairDiagnostics> = (0..200)
            .map(|i| {
                let overlap = 0.5 + 0.5 * rng.next_f64();
                let jaccard = 0.4 * rng.next_f64();
                let delta = if i % 3 == 0 { -0.1 } else { 0.2 };
                pair(&format!("q{i}"), overlap, jaccard, delta)
            })
            .collect();
        let deltas: Vec<f64> = pairs.iter().map(|p| p.delta_simul).collect();
        let (flags, _) = collapse_flags(&pairs, &deltas, 100.0, 0.0).unwrap();
        for (f, p) in flags.iter().zip(&pairs) {
            assert_eq!(*f, p.delta_simul <= 0.0, "qid {}", p.qid);
        }
    }

    #[test]
    fn planted_seven_percent_collapse_is_recovered() {
        let mut rng = SplitMix64::new(2024);
        let n = 1000;
        let planted = 70;
        let mut pairs = Vec::with_capacity(n);
        for i in 0..n {
            if i < planted {
                // Unstable and degraded.
                let o = 0.02 * rng.next_f64();
                pairs.push(pair(&format!("q{i:04}"), o, o, -0.06 - 0.1 * rng.next_f64()));
            } else {
                let o = 0.5 + 0.5 * rng.next_f64();
                pairs.push(pair(&format!("q{i:04}"), o, o, 0.0));
            }
        }
        let deltas: Vec<f64> = pairs.iter().map(|p| p.delta_simul).collect();
        let (flags, tau) = collapse_flags(&pairs, &deltas, 10.0, 0.05).unwrap();
        let rate = collapse_rate(&flags);
        assert!((rate - 0.07).abs() <= 0.005, "rate {rate}, tau {tau}");
        // Brute-force re-evaluation of the criterion.
        for (i, p) in pairs.iter().enumerate() {
            let expect = (p.cand_overlap < tau || p.tok_jaccard < tau)
                && p.delta_simul <= -0.05;
            assert_eq!(flags[i], expect);
        }
    }

    #[test]
    fn summarize_condition_orders_quantiles() {
        let mut rng = SplitMix64::new(8);
        let pairs: Vec<PairDiagnostics> = (0..100)
            .map(|i| {
                pair(
                    &format!("q{i}"),
                    rng.next_f64(),
                    rng.next_f64(),
                    rng.next_f64() - 0.5,
                )
            })
            .collect();
        let summary = summarize_condition("dev", "misspelling", 1999, &pairs, 10.0, 0.05).unwrap();
        for (name, s) in &summary.metrics {
            assert!(
                s.p10 <= s.p25 && s.p25 <= s.median && s.median <= s.p75 && s.p75 <= s.p90,
                "{name}: disordered quantiles"
            );
        }
        assert_eq!(summary.n_queries, 100);
    }

    #[test]
    fn kl_loss_zero_on_identical_inputs() {
        let z: PlannerWeights = [(1, 0.5), (2, 1.5), (3, 0.1)].into_iter().collect();
        let loss = align_kl_loss(&z, &z, 2.0, 100).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn kl_loss_matches_closed_form_three_token_case() {
        let teacher: PlannerWeights = [(0, 1.0), (1, 0.0), (2, 0.0)].into_iter().collect();
        let student: PlannerWeights = [(0, 0.0), (1, 1.0), (2, 0.0)].into_iter().collect();
        let loss = align_kl_loss(&teacher, &student, 1.0, 3).unwrap();
        // Hand-derived: KL(softmax([1,0,0]) || softmax([0,1,0])) = (e-1)/(e+2).
        let e = std::f64::consts::E;
        assert!((loss - (e - 1.0) / (e + 2.0)).abs() < 1e-9, "loss {loss}");
    }

    #[test]
    fn kl_loss_nonnegative_on_random_pairs() {
        let mut rng = SplitMix64::new(123);
        for _ in 0..2000 {
            let teacher: PlannerWeights = (0..12)
                .map(|t| (t, 4.0 * rng.next_f64() - 2.0))
                .collect();
            let student: PlannerWeights = (0..12)
                .map(|t| (t, 4.0 * rng.next_f64() - 2.0))
                .collect();
            let loss = align_kl_loss(&teacher, &student, 2.0, 8).unwrap();
            assert!(loss >= -1e-12, "negative loss {loss}");
        }
    }

    #[test]
    fn kl_loss_shift_invariant_over_dense_inputs() {
        let mut rng = SplitMix64::new(55);
        let teacher: PlannerWeights = (0..10).map(|t| (t, rng.next_f64())).collect();
        let student: PlannerWeights = (0..10).map(|t| (t, rng.next_f64())).collect();
        let base = align_kl_loss(&teacher, &student, 2.0, 10).unwrap();
        let c = 3.7;
        let teacher_shift: PlannerWeights = teacher.iter().map(|(t, w)| (t, w + c)).collect();
        let student_shift: PlannerWeights = student.iter().map(|(t, w)| (t, w + c)).collect();
        let shifted = align_kl_loss(&teacher_shift, &student_shift, 2.0, 10).unwrap();
        assert!((base - shifted).abs() < 1e-9);
    }

    #[test]
    fn kl_temperature_scaling_law() {
        let mut rng = SplitMix64::new(56);
        let teacher: PlannerWeights = (0..8).map(|t| (t, rng.next_f64())).collect();
        let student: PlannerWeights = (0..8).map(|t| (t, rng.next_f64())).collect();
        let tau = 2.0;
        let teacher_scaled: PlannerWeights = teacher.iter().map(|(t, w)| (t, w * tau)).collect();
        let student_scaled: PlannerWeights = student.iter().map(|(t, w)| (t, w * tau)).collect();
        let scaled = align_kl_loss(&teacher_scaled, &student_scaled, tau, 8).unwrap();
        let base = align_kl_loss(&teacher, &student, 1.0, 8).unwrap();
        assert!((scaled - tau * tau * base).abs() < 1e-9);
    }

    #[test]
    fn kl_loss_rejects_empty_union() {
        let empty = PlannerWeights::new();
        assert!(align_kl_loss(&empty, &empty, 2.0, 100).is_err());
    }
}
