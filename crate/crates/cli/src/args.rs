//! Command-line surface and its translation into a [`RunConfig`].

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use loopscan::evaluation::Granularity;

use crate::commands::{self, ReportFormat, Status};
use crate::config::{parse_categories, EndpointFile, FileConfig, Mode, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "loopscan", version, about = "Find loop vulnerabilities in Python code with rules or a local model")]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads (default: all cores for scan, 1 for llm-scan).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the rule engine over a corpus.
    Scan {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Ask a chat-completion model about every loop in a corpus.
    LlmScan {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
        /// Lines of context around each outermost loop.
        #[arg(long)]
        context_lines: Option<usize>,
        /// Send each sample as one block instead of one block per outermost loop.
        #[arg(long)]
        whole_file: bool,
        /// Python version stated in the prompts.
        #[arg(long)]
        python_version: Option<String>,
        /// Findings a single answer may contain.
        #[arg(long)]
        max_findings: Option<usize>,
        /// Append every exchange to this run log.
        #[arg(long, value_name = "FILE")]
        record: Option<PathBuf>,
        /// Answer from a recorded run log instead of a live endpoint.
        #[arg(long, value_name = "FILE")]
        replay: Option<PathBuf>,
        /// Write each rendered prompt to this directory.
        #[arg(long, value_name = "DIR")]
        dump_prompts: Option<PathBuf>,
    },
    /// Score a findings file against the corpus annotations.
    Eval {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Findings file produced by scan or llm-scan.
        #[arg(long, value_name = "FILE")]
        findings: PathBuf,
        #[arg(long)]
        line_tolerance: Option<usize>,
        /// pattern_kind or category.
        #[arg(long)]
        granularity: Option<Granularity>,
        /// Write only this format (default: both json and md).
        #[arg(long)]
        format: Option<ReportFormat>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Generate the annotated seed corpus.
    GenCorpus {
        /// Comma-separated category ids, or `all`.
        #[arg(long, value_delimiter = ',')]
        categories: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Corpus file to write.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Render a JSON evaluation report as Markdown or JSON.
    Report {
        /// report.json written by eval.
        #[arg(long, value_name = "FILE")]
        report: PathBuf,
        #[arg(long, default_value = "md")]
        format: ReportFormat,
        /// Output file (default: stdout).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Corpus JSON file.
    #[arg(long, value_name = "FILE")]
    pub corpus: Option<PathBuf>,
    /// Comma-separated category ids, or `all`.
    #[arg(long, value_delimiter = ',')]
    pub categories: Vec<String>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Base URL of an OpenAI-compatible server.
    #[arg(long, env = "LOOPSCAN_ENDPOINT_URL")]
    pub endpoint_url: Option<String>,
    #[arg(long, env = "LOOPSCAN_MODEL")]
    pub model: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub max_tokens: Option<u32>,
    #[arg(long)]
    pub timeout_ms: Option<u64>,
    #[arg(long)]
    pub retries: Option<u32>,
    /// Concurrent requests allowed to the endpoint.
    #[arg(long)]
    pub max_in_flight: Option<usize>,
}

fn base_config(cli: &Cli, mode: Mode) -> Result<RunConfig> {
    let mut cfg = RunConfig::new(mode);
    if let Some(path) = &cli.config {
        cfg = cfg.with_file(FileConfig::load(path)?)?;
    }
    if cli.jobs.is_some() {
        cfg.jobs = cli.jobs;
    }
    Ok(cfg)
}

fn apply_corpus(cfg: &mut RunConfig, args: &CorpusArgs) -> Result<()> {
    if let Some(p) = &args.corpus {
        cfg.corpus_path = Some(p.clone());
    }
    if !args.categories.is_empty() {
        cfg.categories = parse_categories(&args.categories)?;
    }
    Ok(())
}

fn apply_out(cfg: &mut RunConfig, args: &OutArgs) {
    if let Some(p) = &args.out {
        cfg.output_dir = p.clone();
    }
}

/// Runs the parsed command line.
pub fn run(cli: Cli) -> Result<Status> {
    match &cli.command {
        Command::Scan { corpus, out } => {
            let mut cfg = base_config(&cli, Mode::RuleScan)?;
            apply_corpus(&mut cfg, corpus)?;
            apply_out(&mut cfg, out);
            cfg.validate()?;
            commands::cmd_scan(&cfg)
        }
        Command::LlmScan {
            corpus,
            model,
            out,
            context_lines,
            whole_file,
            python_version,
            max_findings,
            record,
            replay,
            dump_prompts,
        } => {
            let mut cfg = base_config(&cli, Mode::LlmScan)?;
            apply_corpus(&mut cfg, corpus)?;
            apply_out(&mut cfg, out);
            cfg.apply_endpoint(&EndpointFile {
                url: model.endpoint_url.clone(),
                model: model.model.clone(),
                temperature: model.temperature,
                max_tokens: model.max_tokens,
                timeout_ms: model.timeout_ms,
                retries: model.retries,
                max_in_flight: model.max_in_flight,
            });
            if let Some(v) = context_lines {
                cfg.context_lines = *v;
            }
            cfg.whole_file |= *whole_file;
            if let Some(v) = python_version {
                cfg.python_version = v.clone();
            }
            if let Some(v) = max_findings {
                cfg.max_findings = *v;
            }
            if record.is_some() {
                cfg.record_path = record.clone();
            }
            if replay.is_some() {
                cfg.replay_path = replay.clone();
            }
            cfg.dump_prompts = dump_prompts.clone();
            cfg.validate()?;
            commands::cmd_llm_scan(&cfg)
        }
        Command::Eval {
            corpus,
            findings,
            line_tolerance,
            granularity,
            format,
            out,
        } => {
            let mut cfg = base_config(&cli, Mode::Eval)?;
            apply_corpus(&mut cfg, corpus)?;
            apply_out(&mut cfg, out);
            cfg.apply_policy(*line_tolerance, *granularity)?;
            cfg.validate()?;
            commands::cmd_eval(&cfg, findings, *format)?;
            Ok(Status::Clean)
        }
        Command::GenCorpus { categories, seed, out } => {
            let mut cfg = base_config(&cli, Mode::GenCorpus)?;
            if !categories.is_empty() {
                cfg.categories = parse_categories(categories)?;
            }
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            let n = commands::cmd_gen_corpus(&cfg, out)
                .with_context(|| format!("generating corpus into {}", out.display()))?;
            log::info!("wrote {n} samples to {}", out.display());
            Ok(Status::Clean)
        }
        Command::Report { report, format, out } => {
            if let Some(text) = commands::cmd_report(report, *format, out.as_ref())? {
                print!("{text}");
            }
            Ok(Status::Clean)
        }
    }
}
