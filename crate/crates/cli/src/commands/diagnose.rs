//! `plangr diagnose`: per-pair plan-drift diagnostics and per-condition
//! summaries over the variation sets, or overlap diagnostics of an
//! alternate query file against the reference queries.
//!
//! The variation mode expects the perturbed query files produced by
//! `plangr perturb` next to the originals and recomputes planning, guided
//! decoding and the counterfactual swap in-process; every run it scores is
//! also written out so the numbers can be re-checked with `plangr evaluate`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use plangr_core::corpus::{Qrels, Query};
use plangr_core::decode::{decode, swap_decode, DecodeOptions};
use plangr_core::diagnostics::{
    cand_overlap, quantile_summary, summarize_condition, tok_jaccard_with_empty, ConditionSummary,
    PairDiagnostics,
};
use plangr_core::error::{Error, Result};
use plangr_core::metrics::{per_query_metric, read_qrels, write_run};
use plangr_core::planner::{plan, top_tokens, PlannerTokenSet, PlanningSet};
use plangr_core::run::RunList;
use plangr_core::scorer::Scorer;
use plangr_core::trie::DocidTrie;
use plangr_core::variations::variation_file_name;

use crate::config::ExperimentConfig;
use crate::manifest::ManifestWriter;
use crate::pipeline::{apply_weights_override, load_artifacts, load_queries_from, par_map_queries};

#[derive(Debug, Default)]
pub struct DiagnoseArgs {
    /// Switch to cross-query overlap diagnostics against this file.
    pub alt_queries: Option<PathBuf>,
    /// Label for the alternate condition (default: alt file stem).
    pub label: Option<String>,
    /// Planner-weights override (JSONL), applied to the alternate queries.
    pub weights_from: Option<PathBuf>,
}

/// Everything computed once per query on one side of a comparison.
struct SidePerQuery {
    planning: PlanningSet,
    tokens: PlannerTokenSet,
    simul_run: RunList,
    pag_run: Option<RunList>,
}

fn compute_side(
    config: &ExperimentConfig,
    queries: &[Query],
    corpus: &plangr_core::corpus::Corpus,
    trie: &DocidTrie,
    scorer: &dyn Scorer,
    with_decode: bool,
) -> Result<Vec<SidePerQuery>> {
    let depth = config.run_depth.min(config.n);
    let options = DecodeOptions {
        beam_size: config.k,
        use_bonus: true,
        plan_override: None,
        output_depth: config.run_depth.min(config.k),
        final_score: config.final_score,
    };
    par_map_queries(config, queries, |q| {
        let h_q = scorer.planner_weights(q)?;
        let planning = plan(q, corpus, &scorer, config.n)?;
        let tokens = top_tokens(&h_q, config.ell)?;
        let simul_run = RunList::from_ranked(q.qid.clone(), planning.top_k(depth).to_vec())?;
        let pag_run = if with_decode {
            Some(decode(q, trie, &scorer, &planning, &options)?)
        } else {
            None
        };
        Ok(SidePerQuery {
            planning,
            tokens,
            simul_run,
            pag_run,
        })
    })
}

fn metric_of(config: &ExperimentConfig, run: &RunList, qrels: &Qrels) -> Option<f64> {
    per_query_metric(config.metric, run, qrels, config.cutoff, config.rel_threshold)
}

pub fn run(config: &ExperimentConfig, args: &DiagnoseArgs) -> Result<()> {
    match &args.alt_queries {
        Some(alt) => crosslingual(config, args, alt),
        None => variation_conditions(config, args),
    }
}

fn variation_conditions(config: &ExperimentConfig, args: &DiagnoseArgs) -> Result<()> {
    let mut manifest =
        ManifestWriter::begin(&config.output_dir, "diagnose", &config.canonical_json())?;
    let artifacts = manifest.time("load", || load_artifacts(config))?;
    let scorer = apply_weights_override(artifacts.scorer, args.weights_from.as_deref())?;
    let corpus = &artifacts.corpus;
    let trie = &artifacts.trie;
    let qrels = read_qrels(config.qrels()?)?;
    let queries_path = config.queries()?;
    let mut clean_queries = load_queries_from(queries_path)?;
    clean_queries.sort_by(|a, b| a.qid.cmp(&b.qid));
    let split = config.split_label();
    let queries_dir = queries_path
        .parent()
        .ok_or_else(|| Error::InvalidArgument("queries path has no parent directory".into()))?;

    let runs_dir = config.output_dir.join("runs");
    let diag_dir = config.output_dir.join("diagnostics");
    std::fs::create_dir_all(&runs_dir)?;
    std::fs::create_dir_all(&diag_dir)?;

    let clean = manifest.time("clean_side", || {
        compute_side(config, &clean_queries, corpus, trie, &scorer, true)
    })?;
    let clean_simul: Vec<RunList> = clean.iter().map(|s| s.simul_run.clone()).collect();
    let clean_pag: Vec<RunList> = clean.iter().map(|s| s.pag_run.clone().unwrap()).collect();
    for (name, runs, tag) in [
        (format!("{split}.clean.simul.trec"), &clean_simul, "simulonly"),
        (format!("{split}.clean.pag.trec"), &clean_pag, "pag"),
    ] {
        let path = runs_dir.join(name);
        write_run(&path, runs, tag)?;
        manifest.record_output(&path);
    }

    // Per-query clean metrics, None for unjudged qids.
    let m_simul_clean: Vec<Option<f64>> = clean_simul
        .iter()
        .map(|r| metric_of(config, r, &qrels))
        .collect();
    let m_pag_clean: Vec<Option<f64>> = clean_pag
        .iter()
        .map(|r| metric_of(config, r, &qrels))
        .collect();

    let swap_options = DecodeOptions {
        beam_size: config.k,
        use_bonus: true,
        plan_override: None,
        output_depth: config.run_depth.min(config.k),
        final_score: config.final_score,
    };

    let mut summaries: Vec<ConditionSummary> = Vec::new();
    let mut condition_metrics: Vec<String> = Vec::new();
    for &kind in &config.kinds {
        for &seed in &config.seeds {
            let stage = format!("{kind}.seed{seed}");
            let file = queries_dir.join(variation_file_name(&split, kind, seed));
            if !file.exists() {
                return Err(Error::InvalidArgument(format!(
                    "missing variation file '{}'; run `plangr perturb` first",
                    file.display()
                )));
            }
            let perturbed_by_qid: BTreeMap<String, Query> = load_queries_from(&file)?
                .into_iter()
                .map(|q| (q.qid.clone(), q))
                .collect();
            let perturbed_queries: Vec<Query> = clean_queries
                .iter()
                .map(|q| {
                    perturbed_by_qid.get(&q.qid).cloned().ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "qid '{}' missing from variation file '{}'",
                            q.qid,
                            file.display()
                        ))
                    })
                })
                .collect::<Result<_>>()?;

            let pert = manifest.time(&stage, || {
                compute_side(config, &perturbed_queries, corpus, trie, &scorer, true)
            })?;
            // Swapped arm: perturbed query decoded under the clean plan.
            let swapped: Vec<RunList> = par_map_queries(
                config,
                &perturbed_queries,
                |q| {
                    let idx = clean_queries
                        .binary_search_by(|c| c.qid.cmp(&q.qid))
                        .expect("aligned qids");
                    swap_decode(q, &clean[idx].planning, trie, &scorer, &swap_options)
                },
            )?;

            let pert_simul: Vec<RunList> = pert.iter().map(|s| s.simul_run.clone()).collect();
            let pert_pag: Vec<RunList> = pert.iter().map(|s| s.pag_run.clone().unwrap()).collect();
            for (suffix, runs, tag) in [
                ("simul", &pert_simul, "simulonly"),
                ("pag", &pert_pag, "pag"),
                ("swapped", &swapped, "swapped"),
            ] {
                let path = runs_dir.join(format!("{split}.{kind}.seed{seed}.{suffix}.trec"));
                write_run(&path, runs, tag)?;
                manifest.record_output(&path);
            }

            let mut pairs: Vec<PairDiagnostics> = Vec::new();
            let mut unjudged = 0usize;
            let mut sums = [0.0f64; 4]; // simul clean, simul pert, pag clean, pag pert
            for (i, q) in clean_queries.iter().enumerate() {
                let overlap = cand_overlap(
                    clean[i].planning.top_k(config.overlap_k),
                    pert[i].planning.top_k(config.overlap_k),
                    config.overlap_k,
                );
                let jaccard = tok_jaccard_with_empty(
                    &clean[i].tokens,
                    &pert[i].tokens,
                    config.empty_jaccard,
                );
                let (Some(msc), Some(mpc)) = (m_simul_clean[i], m_pag_clean[i]) else {
                    unjudged += 1;
                    continue;
                };
                let msp = metric_of(config, &pert_simul[i], &qrels).unwrap_or(0.0);
                let mpp = metric_of(config, &pert_pag[i], &qrels).unwrap_or(0.0);
                let mps = metric_of(config, &swapped[i], &qrels).unwrap_or(0.0);
                sums[0] += msc;
                sums[1] += msp;
                sums[2] += mpc;
                sums[3] += mpp;
                pairs.push(PairDiagnostics {
                    qid: q.qid.clone(),
                    cand_overlap: overlap,
                    tok_jaccard: jaccard,
                    delta_simul: msp - msc,
                    plan_swap_drop: mpp - mps,
                    seq_gain_clean: mpc - msc,
                    seq_gain_perturbed: mpp - msp,
                });
            }
            if unjudged > 0 {
                log::warn!("{split}.{kind}.seed{seed}: skipped {unjudged} unjudged queries");
            }
            if pairs.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "condition {split}.{kind}.seed{seed} has no judged queries"
                )));
            }

            let pairs_path = diag_dir.join(format!("{split}.{kind}.seed{seed}.pairs.csv"));
            write_pairs_csv(&pairs_path, &pairs)?;
            manifest.record_output(&pairs_path);

            summaries.push(summarize_condition(
                &split,
                kind.as_str(),
                seed,
                &pairs,
                config.tau_percentile,
                config.delta,
            )?);
            let n = pairs.len() as f64;
            condition_metrics.push(format!(
                "{split},{kind},{seed},{},{:.6},{:.6},{:.6},{:.6},{}\n",
                config.metric,
                sums[0] / n,
                sums[1] / n,
                sums[2] / n,
                sums[3] / n,
                pairs.len()
            ));
        }
    }

    let summary_csv = diag_dir.join("summary.csv");
    write_summary_csv(&summary_csv, &summaries)?;
    manifest.record_output(&summary_csv);
    let summary_json = diag_dir.join("summary.json");
    std::fs::write(&summary_json, serde_json::to_string_pretty(&summaries)? + "\n")?;
    manifest.record_output(&summary_json);

    let metrics_csv = diag_dir.join("conditions_metrics.csv");
    let mut text = String::from(
        "split,kind,seed,metric,m_simul_clean,m_simul_perturbed,m_pag_clean,m_pag_perturbed,n\n",
    );
    for row in &condition_metrics {
        text.push_str(row);
    }
    std::fs::write(&metrics_csv, text)?;
    manifest.record_output(&metrics_csv);

    manifest.finalize()?;
    println!(
        "diagnosed {} conditions over {} queries -> {}",
        summaries.len(),
        clean_queries.len(),
        summary_csv.display()
    );
    Ok(())
}

fn crosslingual(config: &ExperimentConfig, args: &DiagnoseArgs, alt_path: &Path) -> Result<()> {
    let mut manifest =
        ManifestWriter::begin(&config.output_dir, "diagnose", &config.canonical_json())?;
    let artifacts = manifest.time("load", || load_artifacts(config))?;
    let corpus = &artifacts.corpus;
    let trie = &artifacts.trie;
    let mut reference = load_queries_from(config.queries()?)?;
    reference.sort_by(|a, b| a.qid.cmp(&b.qid));
    let alt_by_qid: BTreeMap<String, Query> = load_queries_from(alt_path)?
        .into_iter()
        .map(|q| (q.qid.clone(), q))
        .collect();
    let shared: Vec<Query> = reference
        .iter()
        .filter(|q| alt_by_qid.contains_key(&q.qid))
        .cloned()
        .collect();
    if shared.is_empty() {
        return Err(Error::InvalidArgument(
            "no shared qids between reference and alternate query files".into(),
        ));
    }
    let alt_queries: Vec<Query> = shared
        .iter()
        .map(|q| alt_by_qid[&q.qid].clone())
        .collect();
    let label = args.label.clone().unwrap_or_else(|| {
        alt_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "alt".to_string())
    });

    // Reference side scores with the plain scorer; the alternate side gets
    // the optional planner-weights override.
    let base_scorer = artifacts.scorer;
    let ref_side = manifest.time("reference_side", || {
        compute_side(config, &shared, corpus, trie, &base_scorer, false)
    })?;
    let alt_scorer = apply_weights_override(base_scorer, args.weights_from.as_deref())?;
    let alt_side = manifest.time("alt_side", || {
        compute_side(config, &alt_queries, corpus, trie, &alt_scorer, false)
    })?;

    let diag_dir = config.output_dir.join("diagnostics");
    std::fs::create_dir_all(&diag_dir)?;
    let mut overlaps = Vec::with_capacity(shared.len());
    let mut jaccards = Vec::with_capacity(shared.len());
    let mut csv = String::from("qid,cand_overlap,tok_jaccard\n");
    for (i, q) in shared.iter().enumerate() {
        let o = cand_overlap(
            ref_side[i].planning.top_k(config.overlap_k),
            alt_side[i].planning.top_k(config.overlap_k),
            config.overlap_k,
        );
        let j = tok_jaccard_with_empty(&ref_side[i].tokens, &alt_side[i].tokens, config.empty_jaccard);
        overlaps.push(o);
        jaccards.push(j);
        csv.push_str(&format!("{},{o:.6},{j:.6}\n", q.qid));
    }
    let pairs_path = diag_dir.join(format!("crosslingual.{label}.pairs.csv"));
    std::fs::write(&pairs_path, csv)?;
    manifest.record_output(&pairs_path);

    let mut summary = String::from("label,metric,mean,std,p10,p25,median,p75,p90,n\n");
    for (name, values) in [("cand_overlap", &overlaps), ("tok_jaccard", &jaccards)] {
        let s = quantile_summary(values)?;
        summary.push_str(&format!(
            "{label},{name},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
            s.mean,
            s.std,
            s.p10,
            s.p25,
            s.median,
            s.p75,
            s.p90,
            values.len()
        ));
    }
    let summary_path = diag_dir.join(format!("crosslingual.{label}.summary.csv"));
    std::fs::write(&summary_path, summary)?;
    manifest.record_output(&summary_path);
    manifest.finalize()?;
    println!(
        "compared {} shared queries against '{label}' -> {}",
        shared.len(),
        summary_path.display()
    );
    Ok(())
}

fn write_pairs_csv(path: &Path, pairs: &[PairDiagnostics]) -> Result<()> {
    let mut csv = String::from(
        "qid,cand_overlap,tok_jaccard,delta_simul,plan_swap_drop,seq_gain_clean,seq_gain_perturbed\n",
    );
    for p in pairs {
        csv.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            p.qid,
            p.cand_overlap,
            p.tok_jaccard,
            p.delta_simul,
            p.plan_swap_drop,
            p.seq_gain_clean,
            p.seq_gain_perturbed
        ));
    }
    std::fs::write(path, csv)?;
    Ok(())
}

fn write_summary_csv(path: &Path, summaries: &[ConditionSummary]) -> Result<()> {
    let mut csv = String::from(
        "split,kind,seed,metric,mean,std,p10,p25,median,p75,p90,collapse_rate,tau,delta,n\n",
    );
    for s in summaries {
        for (metric, q) in &s.metrics {
            csv.push_str(&format!(
                "{},{},{},{metric},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
                s.split,
                s.kind,
                s.seed,
                q.mean,
                q.std,
                q.p10,
                q.p25,
                q.median,
                q.p75,
                q.p90,
                s.collapse_rate,
                s.tau_used,
                s.delta_used,
                s.n_queries
            ));
        }
    }
    std::fs::write(path, csv)?;
    Ok(())
}
