use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};

use plangr::commands::{bench, build, decode, diagnose, evaluate, perturb, plan, report, truncate_m};
use plangr::config::ExperimentConfig;
use plangr::exit_code;
use plangr_core::decode::FinalScore;
use plangr_core::error::{Error, Result};
use plangr_core::metrics::Metric;

#[derive(Parser)]
#[command(
    name = "plangr",
    version,
    about = "Trie-constrained guided decoding with plan-drift diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate the corpus, build the trie, emit a report.
    Build {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compute planning sets and planning-only (SimulOnly) runs.
    Plan {
        #[arg(long)]
        config: PathBuf,
        /// Query file overriding the config.
        #[arg(long)]
        queries: Option<PathBuf>,
        /// Run depth for the SimulOnly run (default: run_depth).
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Guided decoding to a TREC run.
    Decode {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        queries: Option<PathBuf>,
        /// Disable the look-ahead bonus (unguided ablation).
        #[arg(long)]
        no_bonus: bool,
        /// Decode under plans computed from this query file (by qid).
        #[arg(long, conflicts_with = "no_bonus")]
        plan_from: Option<PathBuf>,
        /// Rank final results by `seq` or `combined` score.
        #[arg(long)]
        final_score: Option<String>,
        #[arg(long)]
        tag: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Planner-weights override file (JSONL).
        #[arg(long)]
        weights_from: Option<PathBuf>,
    },
    /// Generate the fixed perturbed query sets.
    Perturb {
        #[arg(long)]
        config: PathBuf,
    },
    /// Score a run against qrels.
    Evaluate {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        qrels: PathBuf,
        /// mrr, ndcg, or recall.
        #[arg(long, default_value = "mrr")]
        metric: String,
        #[arg(long, default_value_t = 10)]
        cutoff: usize,
        #[arg(long, default_value_t = 1)]
        rel_threshold: u32,
        /// Also write the report JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan-drift diagnostics across the variation conditions, or overlap
    /// diagnostics of an alternate query file against the reference.
    Diagnose {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        alt_queries: Option<PathBuf>,
        #[arg(long, requires = "alt_queries")]
        label: Option<String>,
        /// Planner-weights override file (JSONL).
        #[arg(long)]
        weights_from: Option<PathBuf>,
    },
    /// Planning/decoding latency across beam sizes.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated beam sizes, e.g. 10,100.
        #[arg(long, default_value = "10,100")]
        k_list: String,
        #[arg(long, default_value_t = 3)]
        repetitions: usize,
        #[arg(long)]
        queries: Option<PathBuf>,
        /// Benchmark only the first N queries.
        #[arg(long)]
        num_queries: Option<usize>,
    },
    /// Truncate set docids to their top-m' highest-weight entries.
    #[command(name = "truncate-m")]
    TruncateM {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        m_prime: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Consolidate diagnostics and bench outputs into a Markdown report.
    Report {
        #[arg(long)]
        output_dir: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build { config } => build::run(&ExperimentConfig::load(&config)?),
        Command::Plan {
            config,
            queries,
            depth,
        } => plan::run(
            &ExperimentConfig::load(&config)?,
            &plan::PlanArgs { queries, depth },
        ),
        Command::Decode {
            config,
            queries,
            no_bonus,
            plan_from,
            final_score,
            tag,
            out,
            weights_from,
        } => {
            let final_score = final_score.map(|s| FinalScore::from_str(&s)).transpose()?;
            decode::run(
                &ExperimentConfig::load(&config)?,
                &decode::DecodeArgs {
                    queries,
                    no_bonus,
                    plan_from,
                    final_score,
                    tag,
                    out,
                    weights_from,
                },
            )
        }
        Command::Perturb { config } => perturb::run(&ExperimentConfig::load(&config)?),
        Command::Evaluate {
            run,
            qrels,
            metric,
            cutoff,
            rel_threshold,
            out,
        } => {
            let metric = Metric::from_str(&metric)?;
            evaluate::run(&evaluate::EvaluateArgs {
                run,
                qrels,
                metric,
                cutoff,
                rel_threshold,
                out,
            })
            .map(|_| ())
        }
        Command::Diagnose {
            config,
            alt_queries,
            label,
            weights_from,
        } => diagnose::run(
            &ExperimentConfig::load(&config)?,
            &diagnose::DiagnoseArgs {
                alt_queries,
                label,
                weights_from,
            },
        ),
        Command::Bench {
            config,
            k_list,
            repetitions,
            queries,
            num_queries,
        } => {
            let k_list = parse_k_list(&k_list)?;
            bench::run(
                &ExperimentConfig::load(&config)?,
                &bench::BenchArgs {
                    k_list,
                    repetitions,
                    queries,
                    num_queries,
                },
            )
            .map(|_| ())
        }
        Command::TruncateM {
            config,
            m_prime,
            out,
        } => truncate_m::run(
            &ExperimentConfig::load(&config)?,
            &truncate_m::TruncateArgs { m_prime, out },
        ),
        Command::Report { output_dir } => report::run(&output_dir),
    }
}

fn parse_k_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad beam size '{part}'")))
        })
        .collect()
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version print and exit 0; argument errors are validation.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
