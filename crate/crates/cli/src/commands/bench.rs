//! `plangr bench`: per-query planning (simultaneous) and decoding
//! (sequential) latency across beam sizes, plus the trie memory estimate.
//!
//! Latency is wall time around the pure plan/decode calls, excluding I/O.
//! Queries run serially so timings do not contend; a warm-up pass per beam
//! size is excluded from the statistics.

use std::path::PathBuf;
use std::time::Instant;

use plangr_core::diagnostics::quantile;
use plangr_core::error::{Error, Result};
use plangr_core::metrics::write_run;
use plangr_core::planner::plan;
use plangr_core::run::RunList;
use plangr_core::{decode::decode, decode::DecodeOptions};

use crate::config::ExperimentConfig;
use crate::manifest::ManifestWriter;
use crate::pipeline::{load_artifacts, load_queries_from};

pub struct BenchArgs {
    pub k_list: Vec<usize>,
    pub repetitions: usize,
    pub queries: Option<PathBuf>,
    pub num_queries: Option<usize>,
}

/// Latency statistics for one beam size.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub k: usize,
    pub repetitions: usize,
    pub queries: usize,
    pub simul_mean_ms: f64,
    pub simul_p50_ms: f64,
    pub simul_p95_ms: f64,
    pub seq_mean_ms: f64,
    pub seq_p50_ms: f64,
    pub seq_p95_ms: f64,
    pub trie_nodes: u64,
    pub trie_leaves: u64,
    pub trie_est_bytes: u64,
}

pub fn run(config: &ExperimentConfig, args: &BenchArgs) -> Result<Vec<BenchRow>> {
    if args.repetitions < 1 {
        return Err(Error::InvalidArgument("repetitions must be >= 1".into()));
    }
    if args.k_list.is_empty() {
        return Err(Error::InvalidArgument("k list must be nonempty".into()));
    }
    let mut manifest =
        ManifestWriter::begin(&config.output_dir, "bench", &config.canonical_json())?;
    let artifacts = manifest.time("load", || load_artifacts(config))?;
    let queries_path = args.queries.as_deref().unwrap_or(config.queries()?);
    let mut queries = load_queries_from(queries_path)?;
    if let Some(n) = args.num_queries {
        queries.truncate(n);
    }
    if queries.is_empty() {
        return Err(Error::InvalidArgument("no queries to benchmark".into()));
    }

    let stats = artifacts.trie.stats();
    let runs_dir = config.output_dir.join("runs");
    std::fs::create_dir_all(&runs_dir)?;
    let mut rows = Vec::with_capacity(args.k_list.len());
    for &k in &args.k_list {
        let options = DecodeOptions {
            beam_size: k,
            use_bonus: true,
            plan_override: None,
            output_depth: config.run_depth.min(k),
            final_score: config.final_score,
        };
        // Warm-up pass, excluded from the statistics.
        for q in &queries {
            let planning = plan(q, &artifacts.corpus, &artifacts.scorer, config.n)?;
            decode(q, &artifacts.trie, &artifacts.scorer, &planning, &options)?;
        }
        let mut simul_ms = Vec::with_capacity(queries.len() * args.repetitions);
        let mut seq_ms = Vec::with_capacity(queries.len() * args.repetitions);
        let mut last_runs: Vec<RunList> = Vec::new();
        for rep in 0..args.repetitions {
            let mut rep_runs = Vec::with_capacity(queries.len());
            for q in &queries {
                let t0 = Instant::now();
                let planning = plan(q, &artifacts.corpus, &artifacts.scorer, config.n)?;
                simul_ms.push(t0.elapsed().as_secs_f64() * 1e3);
                let t1 = Instant::now();
                let run = decode(q, &artifacts.trie, &artifacts.scorer, &planning, &options)?;
                seq_ms.push(t1.elapsed().as_secs_f64() * 1e3);
                rep_runs.push(run);
            }
            if rep + 1 == args.repetitions {
                last_runs = rep_runs;
            }
        }
        let run_path = runs_dir.join(format!("bench.k{k}.trec"));
        write_run(&run_path, &last_runs, &format!("bench-k{k}"))?;
        manifest.record_output(&run_path);
        rows.push(BenchRow {
            k,
            repetitions: args.repetitions,
            queries: queries.len(),
            simul_mean_ms: mean(&simul_ms),
            simul_p50_ms: quantile(&simul_ms, 0.50)?,
            simul_p95_ms: quantile(&simul_ms, 0.95)?,
            seq_mean_ms: mean(&seq_ms),
            seq_p50_ms: quantile(&seq_ms, 0.50)?,
            seq_p95_ms: quantile(&seq_ms, 0.95)?,
            trie_nodes: stats.node_count,
            trie_leaves: stats.leaf_count,
            trie_est_bytes: stats.estimated_bytes,
        });
    }

    let csv_path = config.output_dir.join("bench.csv");
    let mut csv = String::from(
        "k,repetitions,queries,simul_mean_ms,simul_p50_ms,simul_p95_ms,\
         seq_mean_ms,seq_p50_ms,seq_p95_ms,trie_nodes,trie_leaves,trie_est_bytes\n",
    );
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{},{},{}\n",
            row.k,
            row.repetitions,
            row.queries,
            row.simul_mean_ms,
            row.simul_p50_ms,
            row.simul_p95_ms,
            row.seq_mean_ms,
            row.seq_p50_ms,
            row.seq_p95_ms,
            row.trie_nodes,
            row.trie_leaves,
            row.trie_est_bytes
        ));
    }
    std::fs::write(&csv_path, csv)?;
    manifest.record_output(&csv_path);
    manifest.finalize()?;
    for row in &rows {
        println!(
            "k={:>4}: simul {:.3} ms/q, seq {:.3} ms/q (mean over {} samples)",
            row.k,
            row.simul_mean_ms,
            row.seq_mean_ms,
            row.queries * row.repetitions
        );
    }
    Ok(rows)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
