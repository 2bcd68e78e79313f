//! `plangr report`: consolidate diagnostics and bench outputs in an output
//! directory into one Markdown report with per-variation tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use plangr_core::error::{Error, Result};

use crate::manifest::ManifestWriter;

/// One summary.csv row.
#[derive(Debug, Clone)]
struct SummaryRow {
    split: String,
    kind: String,
    metric: String,
    mean: f64,
    collapse_rate: f64,
    tau: f64,
    n: usize,
}

/// One conditions_metrics.csv row.
#[derive(Debug, Clone)]
struct MetricsRow {
    split: String,
    kind: String,
    metric: String,
    m_simul_clean: f64,
    m_simul_perturbed: f64,
    m_pag_clean: f64,
    m_pag_perturbed: f64,
}

const KIND_ORDER: [&str; 5] = ["misspelling", "reordering", "synonym", "paraphrase", "naturality"];

pub fn run(output_dir: &Path) -> Result<()> {
    let diag_dir = output_dir.join("diagnostics");
    let summary_path = diag_dir.join("summary.csv");
    let metrics_path = diag_dir.join("conditions_metrics.csv");
    let bench_path = output_dir.join("bench.csv");
    if !summary_path.exists() && !bench_path.exists() {
        return Err(Error::InvalidArgument(format!(
            "nothing to report in '{}': expected {} or {}",
            output_dir.display(),
            summary_path.display(),
            bench_path.display()
        )));
    }
    let mut manifest = ManifestWriter::begin(output_dir, "report", "{}")?;

    let mut md = String::from("# plangr report\n");
    if summary_path.exists() {
        let summaries = read_summary(&summary_path)?;
        let metrics = if metrics_path.exists() {
            read_metrics(&metrics_path)?
        } else {
            Vec::new()
        };
        render_retrieval_table(&mut md, &metrics);
        render_stability_table(&mut md, &summaries);
        render_collapse_table(&mut md, &summaries);
    }
    if bench_path.exists() {
        render_bench_table(&mut md, &bench_path)?;
    }

    let report_path = output_dir.join("report.md");
    std::fs::write(&report_path, md)?;
    manifest.record_output(&report_path);
    manifest.finalize()?;
    println!("wrote {}", report_path.display());
    Ok(())
}

fn read_lines(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect())
}

fn parse_f64(path: &Path, field: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad number '{field}' in {}", path.display())))
}

fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    for fields in read_lines(path)? {
        if fields.len() != 15 {
            return Err(Error::InvalidArgument(format!(
                "bad summary row in {} ({} fields)",
                path.display(),
                fields.len()
            )));
        }
        rows.push(SummaryRow {
            split: fields[0].clone(),
            kind: fields[1].clone(),
            metric: fields[3].clone(),
            mean: parse_f64(path, &fields[4])?,
            collapse_rate: parse_f64(path, &fields[11])?,
            tau: parse_f64(path, &fields[12])?,
            n: fields[14].parse().unwrap_or(0),
        });
    }
    Ok(rows)
}

fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut rows = Vec::new();
    for fields in read_lines(path)? {
        if fields.len() != 9 {
            return Err(Error::InvalidArgument(format!(
                "bad metrics row in {} ({} fields)",
                path.display(),
                fields.len()
            )));
        }
        rows.push(MetricsRow {
            split: fields[0].clone(),
            kind: fields[1].clone(),
            metric: fields[3].clone(),
            m_simul_clean: parse_f64(path, &fields[4])?,
            m_simul_perturbed: parse_f64(path, &fields[5])?,
            m_pag_clean: parse_f64(path, &fields[6])?,
            m_pag_perturbed: parse_f64(path, &fields[7])?,
        });
    }
    Ok(rows)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn kinds_in_order<'a>(present: impl Iterator<Item = &'a str>) -> Vec<String> {
    let set: std::collections::BTreeSet<&str> = present.collect();
    let mut out: Vec<String> = KIND_ORDER
        .iter()
        .filter(|k| set.contains(**k))
        .map(|k| k.to_string())
        .collect();
    for k in set {
        if !KIND_ORDER.contains(&k) {
            out.push(k.to_string());
        }
    }
    out
}

fn render_retrieval_table(md: &mut String, rows: &[MetricsRow]) {
    if rows.is_empty() {
        return;
    }
    let metric = rows[0].metric.clone();
    writeln!(md, "\n## Retrieval under query variation\n").unwrap();
    writeln!(
        md,
        "Values are mean +/- std across seeds; deltas are perturbed minus clean.\n"
    )
    .unwrap();
    writeln!(
        md,
        "| split | variation | SimulOnly {metric}@10 | delta | PAG {metric}@10 | delta |"
    )
    .unwrap();
    writeln!(md, "|---|---|---|---|---|---|").unwrap();
    let mut by_split: BTreeMap<&str, Vec<&MetricsRow>> = BTreeMap::new();
    for r in rows {
        by_split.entry(&r.split).or_default().push(r);
    }
    for (split, rows) in by_split {
        let clean = rows[0];
        writeln!(
            md,
            "| {split} | clean | {:.3} | - | {:.3} | - |",
            clean.m_simul_clean, clean.m_pag_clean
        )
        .unwrap();
        for kind in kinds_in_order(rows.iter().map(|r| r.kind.as_str())) {
            let seeds: Vec<&&MetricsRow> = rows.iter().filter(|r| r.kind == kind).collect();
            let (sm, ss) = mean_std(&seeds.iter().map(|r| r.m_simul_perturbed).collect::<Vec<_>>());
            let (pm, ps) = mean_std(&seeds.iter().map(|r| r.m_pag_perturbed).collect::<Vec<_>>());
            writeln!(
                md,
                "| {split} | {kind} | {sm:.3} +/- {ss:.3} | {:+.3} | {pm:.3} +/- {ps:.3} | {:+.3} |",
                sm - clean.m_simul_clean,
                pm - clean.m_pag_clean
            )
            .unwrap();
        }
    }
}

fn render_stability_table(md: &mut String, rows: &[SummaryRow]) {
    if rows.is_empty() {
        return;
    }
    writeln!(md, "\n## Planner stability and plan swapping\n").unwrap();
    writeln!(
        md,
        "| split | variation | CandOverlap | TokJaccard | SeqGain | PlanSwapDrop |"
    )
    .unwrap();
    writeln!(md, "|---|---|---|---|---|---|").unwrap();
    let mut by_split: BTreeMap<&str, Vec<&SummaryRow>> = BTreeMap::new();
    for r in rows {
        by_split.entry(&r.split).or_default().push(r);
    }
    for (split, rows) in by_split {
        for kind in kinds_in_order(rows.iter().map(|r| r.kind.as_str())) {
            let of = |metric: &str| -> (f64, f64) {
                let values: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.kind == kind && r.metric == metric)
                    .map(|r| r.mean)
                    .collect();
                mean_std(&values)
            };
            let (om, os) = of("cand_overlap");
            let (jm, js) = of("tok_jaccard");
            let (gm, gs) = of("seq_gain_perturbed");
            let (dm, ds) = of("plan_swap_drop");
            writeln!(
                md,
                "| {split} | {kind} | {om:.3} +/- {os:.3} | {jm:.3} +/- {js:.3} | \
                 {gm:+.3} +/- {gs:.3} | {dm:+.3} +/- {ds:.3} |"
            )
            .unwrap();
        }
    }
}

fn render_collapse_table(md: &mut String, rows: &[SummaryRow]) {
    if rows.is_empty() {
        return;
    }
    writeln!(md, "\n## Plan collapse\n").unwrap();
    writeln!(md, "| split | variation | collapse rate (%) | mean tau | queries |").unwrap();
    writeln!(md, "|---|---|---|---|---|").unwrap();
    let mut by_split: BTreeMap<&str, Vec<&SummaryRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.metric == "cand_overlap") {
        by_split.entry(&r.split).or_default().push(r);
    }
    for (split, rows) in by_split {
        for kind in kinds_in_order(rows.iter().map(|r| r.kind.as_str())) {
            let conditions: Vec<&&SummaryRow> = rows.iter().filter(|r| r.kind == kind).collect();
            let (rm, rs) =
                mean_std(&conditions.iter().map(|r| r.collapse_rate * 100.0).collect::<Vec<_>>());
            let (tm, _) = mean_std(&conditions.iter().map(|r| r.tau).collect::<Vec<_>>());
            let n = conditions.first().map(|r| r.n).unwrap_or(0);
            writeln!(md, "| {split} | {kind} | {rm:.1} +/- {rs:.1} | {tm:.3} | {n} |").unwrap();
        }
    }
}

fn render_bench_table(md: &mut String, bench_path: &Path) -> Result<()> {
    let rows = read_lines(bench_path)?;
    if rows.is_empty() {
        return Ok(());
    }
    writeln!(md, "\n## Beam size / latency trade-off\n").unwrap();
    writeln!(
        md,
        "| k | simul mean (ms) | simul p95 (ms) | seq mean (ms) | seq p95 (ms) | est. index bytes |"
    )
    .unwrap();
    writeln!(md, "|---|---|---|---|---|---|").unwrap();
    for f in rows {
        if f.len() != 12 {
            continue;
        }
        writeln!(
            md,
            "| {} | {} | {} | {} | {} | {} |",
            f[0], f[3], f[5], f[6], f[8], f[11]
        )
        .unwrap();
    }
    Ok(())
}
