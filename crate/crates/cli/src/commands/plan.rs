//! `plangr plan`: planning sets and planning-only (SimulOnly) runs.

use std::path::{Path, PathBuf};

use plangr_core::error::Result;
use plangr_core::metrics::write_run;
use plangr_core::planner::plan;
use plangr_core::run::RunList;

use crate::config::ExperimentConfig;
use crate::manifest::ManifestWriter;
use crate::pipeline::{load_artifacts, load_queries_from, par_map_queries};

pub struct PlanArgs {
    pub queries: Option<PathBuf>,
    pub depth: Option<usize>,
}

pub fn run(config: &ExperimentConfig, args: &PlanArgs) -> Result<()> {
    let mut manifest = ManifestWriter::begin(&config.output_dir, "plan", &config.canonical_json())?;
    let artifacts = manifest.time("load", || load_artifacts(config))?;
    let queries_path: &Path = args.queries.as_deref().unwrap_or(config.queries()?);
    let queries = load_queries_from(queries_path)?;
    let depth = args.depth.unwrap_or(config.run_depth);
    if depth > config.n {
        return Err(plangr_core::Error::InvalidArgument(format!(
            "run depth {depth} exceeds planning pool n = {}",
            config.n
        )));
    }

    let (planning_runs, simul_runs) = manifest.time("plan", || {
        let pairs = par_map_queries(config, &queries, |q| {
            let set = plan(q, &artifacts.corpus, &artifacts.scorer, config.n)?;
            let planning = RunList::from_ranked(q.qid.clone(), set.entries().to_vec())?;
            let simul = RunList::from_ranked(q.qid.clone(), set.top_k(depth).to_vec())?;
            Ok((planning, simul))
        })?;
        Ok(pairs.into_iter().unzip::<_, _, Vec<_>, Vec<_>>())
    })?;

    let runs_dir = config.output_dir.join("runs");
    std::fs::create_dir_all(&runs_dir)?;
    let planning_path = runs_dir.join("planning.trec");
    write_run(&planning_path, &planning_runs, "planning")?;
    manifest.record_output(&planning_path);
    let simul_path = runs_dir.join("simul.trec");
    write_run(&simul_path, &simul_runs, "simulonly")?;
    manifest.record_output(&simul_path);
    manifest.finalize()?;
    println!(
        "planned {} queries (n={}, run depth {depth}) -> {}",
        queries.len(),
        config.n,
        simul_path.display()
    );
    Ok(())
}
