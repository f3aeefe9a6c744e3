//! The five subcommands. Each returns a [`Status`] that maps to the exit code.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use loopscan::corpus::{generate_seed_corpus, load_corpus, save_corpus};
use loopscan::detectors::{kinds_of, scan_sample};
use loopscan::evaluation::{
    evaluate_corpus, merge_findings, read_findings, report_markdown, write_findings, EvalReport, FindingsFile,
};
use loopscan::extractor::{extract_loops, parse_source, slice_code_block, whole_file_block, CodeBlock};
use loopscan::llm_client::{read_run, record_run, ChatExchange, LlmClient, ModelEndpoint, ReplayBackend};
use loopscan::prompt::{render, PromptSpec};
use loopscan::response_parser::{parse_findings, Rejection};
use loopscan::{CodeSample, Finding};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{chain_fingerprint, RunConfig};

pub const FINDINGS_FILE: &str = "findings.json";
pub const REJECTIONS_FILE: &str = "rejections.json";
pub const RUN_LOG_FILE: &str = "run_log.jsonl";
pub const REPORT_JSON_FILE: &str = "report.json";
pub const REPORT_MD_FILE: &str = "report.md";
pub const REJECTIONS_FORMAT_VERSION: u32 = 1;

/// Outcome of a command, following the linter convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Clean,
    Findings,
    Error,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Clean => 0,
            Status::Error => 1,
            Status::Findings => 2,
        }
    }

    /// Errors outrank findings.
    fn from_run(failures: usize, findings: usize) -> Self {
        if failures > 0 {
            Status::Error
        } else if findings > 0 {
            Status::Findings
        } else {
            Status::Clean
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Md,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "md" | "markdown" => Ok(ReportFormat::Md),
            other => Err(format!("unknown format `{other}` (expected json or md)")),
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    text
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

fn load(cfg: &RunConfig) -> Result<Vec<CodeSample>> {
    let path = cfg.corpus_path.as_ref().context("--corpus is required")?;
    Ok(load_corpus(path)?)
}

fn report_failures(failures: &[String]) {
    if !failures.is_empty() {
        log::error!("{} failure(s):", failures.len());
        for f in failures {
            log::error!("  {f}");
        }
    }
}

/// Rule scan over the whole corpus; writes `findings.json`.
pub fn cmd_scan(cfg: &RunConfig) -> Result<Status> {
    let samples = load(cfg)?;
    let enabled = kinds_of(&cfg.categories);
    let results: Vec<_> = pool(cfg.jobs.unwrap_or(0))?.install(|| {
        samples
            .par_iter()
            .map(|s| scan_sample(s, &enabled, &cfg.detectors))
            .collect()
    });

    let mut findings = Vec::new();
    let mut failures = Vec::new();
    for (sample, result) in samples.iter().zip(results) {
        match result {
            Ok(f) => findings.extend(f),
            Err(e) => failures.push(format!("{}: {e}", sample.sample_id)),
        }
    }
    let findings = merge_findings(findings);
    ensure_dir(&cfg.output_dir)?;
    write_findings(
        &FindingsFile::new(cfg.fingerprint(None), findings.clone()),
        cfg.output_dir.join(FINDINGS_FILE),
    )?;
    report_failures(&failures);
    let flagged: BTreeSet<&str> = findings.iter().map(|f| f.sample_id.as_str()).collect();
    log::info!(
        "scanned {} samples: {} findings in {} samples",
        samples.len(),
        findings.len(),
        flagged.len()
    );
    Ok(Status::from_run(failures.len(), findings.len()))
}

/// Rejected model records, written next to the findings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionsFile {
    pub version: u32,
    pub config_fingerprint: String,
    pub rejections: Vec<Rejection>,
}

/// Counts from one model scan.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LlmScanOutcome {
    pub blocks: usize,
    pub requests: usize,
    pub findings: Vec<Finding>,
    pub rejections: Vec<Rejection>,
    pub failures: Vec<String>,
    pub missing_sentinels: usize,
}

impl LlmScanOutcome {
    pub fn status(&self) -> Status {
        Status::from_run(self.failures.len(), self.findings.len())
    }
}

#[derive(Default)]
struct SampleRun {
    blocks: usize,
    findings: Vec<Finding>,
    rejections: Vec<Rejection>,
    exchanges: Vec<ChatExchange>,
    failures: Vec<String>,
    missing_sentinels: usize,
}

/// Analysis units of one sample: one block per outermost loop, or the
/// whole file. Identical blocks are sent once.
fn blocks_for(sample: &CodeSample, cfg: &RunConfig) -> Result<Vec<CodeBlock>, String> {
    if cfg.whole_file {
        return Ok(vec![whole_file_block(sample)]);
    }
    let module = parse_source(sample).map_err(|e| e.to_string())?;
    let mut blocks: Vec<CodeBlock> = extract_loops(&module)
        .iter()
        .filter(|r| r.nesting_depth == 0)
        .map(|r| slice_code_block(sample, r, cfg.context_lines))
        .collect();
    blocks.dedup();
    Ok(blocks)
}

fn file_safe(text: &str) -> String {
    text.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.') { c } else { '_' })
        .collect()
}

fn scan_one(
    sample: &CodeSample,
    cfg: &RunConfig,
    specs: &[PromptSpec],
    client: &LlmClient,
) -> SampleRun {
    let mut run = SampleRun::default();
    let blocks = match blocks_for(sample, cfg) {
        Ok(b) => b,
        Err(e) => {
            run.failures.push(format!("{}: {e}", sample.sample_id));
            return run;
        }
    };
    run.blocks = blocks.len();
    let model = &client.endpoint().model_name;
    for block in &blocks {
        for spec in specs {
            let prompt = render(spec, block);
            if let Some(dir) = &cfg.dump_prompts {
                let name = format!(
                    "{}_L{}-{}_{}.txt",
                    file_safe(&block.sample_id),
                    block.first_line,
                    block.last_line(),
                    spec.category().id()
                );
                let text = format!("{}\n{}", prompt.system_text, prompt.user_text);
                if let Err(e) = fs::write(dir.join(&name), text) {
                    run.failures.push(format!("dumping prompt {name}: {e}"));
                }
            }
            match client.complete(&prompt.system_text, &prompt.user_text) {
                Ok(exchange) => {
                    let parsed = parse_findings(&exchange.raw_response, block, spec, model);
                    if !parsed.sentinel_seen {
                        run.missing_sentinels += 1;
                    }
                    run.findings.extend(parsed.findings);
                    run.rejections.extend(parsed.rejections);
                    run.exchanges.push(exchange);
                }
                Err(e) => run.failures.push(format!(
                    "{} lines {}..{} [{}]: {e}",
                    block.sample_id,
                    block.first_line,
                    block.last_line(),
                    spec.category().id()
                )),
            }
        }
    }
    run
}

/// Model name a replayed run reports: the configured one, else the one in the log.
fn replay_model_name(cfg: &RunConfig, exchanges: &[ChatExchange]) -> String {
    cfg.endpoint
        .as_ref()
        .map(|e| e.model_name.clone())
        .filter(|m| !m.is_empty())
        .or_else(|| exchanges.first().map(|e| e.model_name.clone()))
        .unwrap_or_else(|| "replay".to_string())
}

/// Client for `cfg`: replaying a log when `--replay` is set, HTTP otherwise.
pub fn client_for(cfg: &RunConfig) -> Result<LlmClient> {
    if let Some(path) = &cfg.replay_path {
        let exchanges = read_run(path).with_context(|| format!("reading replay log {}", path.display()))?;
        let mut endpoint = cfg.endpoint.clone().unwrap_or_else(|| ModelEndpoint::new("", ""));
        endpoint.base_url = format!("replay:{}", path.display());
        endpoint.model_name = replay_model_name(cfg, &exchanges);
        endpoint.retries = 0;
        let backend = ReplayBackend::from_exchanges(exchanges);
        return Ok(LlmClient::new(endpoint, Box::new(backend))?);
    }
    let endpoint = cfg.endpoint.clone().context("no endpoint configured")?;
    Ok(LlmClient::http(endpoint)?)
}

pub fn cmd_llm_scan(cfg: &RunConfig) -> Result<Status> {
    let client = client_for(cfg)?;
    Ok(llm_scan_with(cfg, &client)?.status())
}

/// Model scan with a caller-supplied client. Writes `findings.json` and
/// `rejections.json`. The run log is written unless replaying without `--record`.
pub fn llm_scan_with(cfg: &RunConfig, client: &LlmClient) -> Result<LlmScanOutcome> {
    let samples = load(cfg)?;
    let specs: Vec<PromptSpec> = cfg
        .categories
        .iter()
        .map(|&c| PromptSpec::new(c, c.kinds(), cfg.python_version.clone(), cfg.max_findings))
        .collect::<Result<_, _>>()?;
    ensure_dir(&cfg.output_dir)?;
    if let Some(dir) = &cfg.dump_prompts {
        ensure_dir(dir)?;
    }

    let runs: Vec<SampleRun> = pool(cfg.jobs.unwrap_or(1))?
        .install(|| samples.par_iter().map(|s| scan_one(s, cfg, &specs, client)).collect());

    let fingerprint = cfg.fingerprint(Some(client.endpoint()));
    let mut outcome = LlmScanOutcome::default();
    let mut exchanges = Vec::new();
    for run in runs {
        outcome.blocks += run.blocks;
        outcome.requests += run.exchanges.len();
        outcome.findings.extend(run.findings);
        outcome.rejections.extend(run.rejections);
        outcome.failures.extend(run.failures);
        outcome.missing_sentinels += run.missing_sentinels;
        exchanges.extend(run.exchanges);
    }
    outcome.findings = merge_findings(std::mem::take(&mut outcome.findings));

    write_findings(
        &FindingsFile::new(fingerprint.clone(), outcome.findings.clone()),
        cfg.output_dir.join(FINDINGS_FILE),
    )?;
    let sidecar = RejectionsFile {
        version: REJECTIONS_FORMAT_VERSION,
        config_fingerprint: fingerprint,
        rejections: outcome.rejections.clone(),
    };
    write_text(&cfg.output_dir.join(REJECTIONS_FILE), &to_pretty_json(&sidecar))?;

    let log_path = match (&cfg.record_path, &cfg.replay_path) {
        (Some(p), _) => Some(p.clone()),
        (None, None) => Some(cfg.output_dir.join(RUN_LOG_FILE)),
        (None, Some(_)) => None,
    };
    if let Some(path) = log_path {
        record_run(&exchanges, &path).with_context(|| format!("writing run log {}", path.display()))?;
    }

    report_failures(&outcome.failures);
    if outcome.missing_sentinels > 0 {
        log::warn!("{} completions lacked the end sentinel", outcome.missing_sentinels);
    }
    log::info!(
        "{} samples, {} blocks, {} requests: {} findings, {} rejections",
        samples.len(),
        outcome.blocks,
        outcome.requests,
        outcome.findings.len(),
        outcome.rejections.len()
    );
    Ok(outcome)
}

/// Scores a findings file against the corpus annotations.
pub fn cmd_eval(cfg: &RunConfig, findings_path: &Path, format: Option<ReportFormat>) -> Result<EvalReport> {
    let samples = load(cfg)?;
    let file = read_findings(findings_path)?;
    let mut report = evaluate_corpus(&samples, file.findings, &cfg.categories, cfg.policy)?;
    report.config_fingerprint = Some(chain_fingerprint(&[&file.config_fingerprint, &cfg.fingerprint(None)]));
    ensure_dir(&cfg.output_dir)?;
    if format != Some(ReportFormat::Md) {
        write_text(&cfg.output_dir.join(REPORT_JSON_FILE), &to_pretty_json(&report))?;
    }
    if format != Some(ReportFormat::Json) {
        write_text(&cfg.output_dir.join(REPORT_MD_FILE), &report_markdown(&report))?;
    }
    for cat in &report.categories {
        match &cat.average {
            Some(m) => log::info!(
                "{}: precision {:.2} recall {:.2} f1 {:.2}",
                cat.category.id(),
                loopscan::evaluation::round2(m.precision),
                loopscan::evaluation::round2(m.recall),
                loopscan::evaluation::round2(m.f1)
            ),
            None => log::info!("{}: no scored samples", cat.category.id()),
        }
    }
    Ok(report)
}

/// Writes the generated seed corpus to `path`.
pub fn cmd_gen_corpus(cfg: &RunConfig, path: &Path) -> Result<usize> {
    let samples = generate_seed_corpus(&cfg.categories, cfg.seed);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    save_corpus(&samples, path)?;
    Ok(samples.len())
}

/// Re-renders a JSON report. Returns the text when no output path is given.
pub fn cmd_report(report_path: &Path, format: ReportFormat, out: Option<&PathBuf>) -> Result<Option<String>> {
    let text = fs::read_to_string(report_path).with_context(|| format!("reading {}", report_path.display()))?;
    let report: EvalReport =
        serde_json::from_str(&text).with_context(|| format!("parsing report {}", report_path.display()))?;
    let rendered = match format {
        ReportFormat::Json => to_pretty_json(&report),
        ReportFormat::Md => report_markdown(&report),
    };
    match out {
        Some(path) => {
            write_text(path, &rendered)?;
            Ok(None)
        }
        None => Ok(Some(rendered)),
    }
}
