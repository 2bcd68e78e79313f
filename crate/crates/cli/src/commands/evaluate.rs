//! `plangr evaluate`: score a TREC run against qrels, printing the
//! MetricReport JSON and optionally writing it to a file.

use std::path::PathBuf;

use plangr_core::error::Result;
use plangr_core::metrics::{evaluate, read_qrels, read_run, Metric, MetricReport};

use crate::manifest::ManifestWriter;

pub struct EvaluateArgs {
    pub run: PathBuf,
    pub qrels: PathBuf,
    pub metric: Metric,
    pub cutoff: usize,
    pub rel_threshold: u32,
    pub out: Option<PathBuf>,
}

pub fn run(args: &EvaluateArgs) -> Result<MetricReport> {
    let (runs, _tag) = read_run(&args.run)?;
    let qrels = read_qrels(&args.qrels)?;
    let report = evaluate(args.metric, &runs, &qrels, args.cutoff, args.rel_threshold);
    let json = serde_json::to_string_pretty(&report)?;
    // Tolerate a closed pipe (e.g. `plangr evaluate ... | head`).
    use std::io::Write;
    if let Err(e) = writeln!(std::io::stdout(), "{json}") {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            return Err(e.into());
        }
    }
    if let Some(out) = &args.out {
        let dir = out.parent().filter(|p| !p.as_os_str().is_empty());
        if let Some(dir) = dir {
            std::fs::create_dir_all(dir)?;
        }
        let mut manifest = ManifestWriter::begin(
            dir.unwrap_or_else(|| std::path::Path::new(".")),
            "evaluate",
            "{}",
        )?;
        std::fs::write(out, json + "\n")?;
        manifest.record_output(out);
        manifest.finalize()?;
    }
    Ok(report)
}
