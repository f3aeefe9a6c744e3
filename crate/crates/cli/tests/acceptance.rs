//! Acceptance suite: one `[PASS]` or `[FAIL]` line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the output.

mod common;

#[path = "../../core/tests/fixtures/snippets.rs"]
mod snippets;

use std::collections::BTreeSet;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use loopscan::corpus::{generate_seed_corpus, load_corpus, save_corpus};
use loopscan::detectors::{scan_sample, DetectorConfig};
use loopscan::evaluation::{
    build_report, compute_metrics, evaluate_corpus, match_findings, optimal_match_count, round2, EvalCounts,
    Granularity, MatchPolicy, RowScore, RunRow,
};
use loopscan::llm_client::{ChatRequest, FnBackend, LlmClient, ModelEndpoint};
use loopscan::prompt::{build_system_prompt, PromptSpec, SAFEGUARDS};
use loopscan::response_parser::RejectionReason;
use loopscan::{Category, CodeSample, Finding, GroundTruthAnnotation, Metrics, PatternKind};
use loopscan_cli::commands::{llm_scan_with, LlmScanOutcome};
use loopscan_cli::{Mode, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_ms: u128) -> Result<(), String> {
    ensure(
        elapsed.as_millis() < limit_ms,
        format!("took {} ms, limit {limit_ms} ms", elapsed.as_millis()),
    )
}

fn displayed(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let m: Metrics = compute_metrics(EvalCounts::new(tp, fp, fn_));
    let r = m.rounded();
    (r.precision, r.recall, r.f1)
}

fn c1_metric_goldens() -> Check {
    let a = displayed(6, 2, 1);
    let b = displayed(14, 1, 2);
    ensure(a == (0.75, 0.86, 0.80), format!("(6,2,1) gave {a:?}"))?;
    ensure(b == (0.93, 0.88, 0.90), format!("(14,1,2) gave {b:?}"))?;
    Ok(format!("(6,2,1) -> {a:?}; (14,1,2) -> {b:?}"))
}

fn c2_macro_average() -> Check {
    let row = |id: &str, p: f64, f: f64| RunRow {
        sample_id: id.into(),
        category: Category::LoopControlLogic,
        score: RowScore::Metrics(Metrics { precision: p, recall: 1.0, f1: f }),
    };
    let report = build_report(
        vec![row("code1", 0.75, 0.84), row("code2", 0.75, 0.84), row("code3", 0.88, 0.92)],
        MatchPolicy::default(),
    )
    .map_err(|e| e.to_string())?;
    let avg = report.categories[0].average.ok_or("no average")?;
    ensure(round2(avg.precision) == 0.79, format!("precision average {}", avg.precision))?;
    ensure(round2(avg.f1) == 0.87, format!("f1 average {}", avg.f1))?;
    Ok(format!(
        "mean{{0.75,0.75,0.88}} = {:.4} -> {:.2}; mean{{0.84,0.84,0.92}} = {:.4} -> {:.2}",
        avg.precision,
        round2(avg.precision),
        avg.f1,
        round2(avg.f1)
    ))
}

fn c3_seed_corpus_soundness(dir: &Path) -> Check {
    let started = Instant::now();
    let corpus = dir.join("seed.json");
    let out = run(bin().args(["gen-corpus", "--categories", "all", "--seed", "1", "--out"]).arg(&corpus));
    ensure(code(&out) == 0, "gen-corpus failed")?;
    let out = run(bin().args(["scan", "--corpus"]).arg(&corpus).arg("--out").arg(dir.join("scan")));
    ensure(code(&out) == 2, format!("scan exit {}", code(&out)))?;
    let out = run(bin()
        .args(["eval", "--corpus"])
        .arg(&corpus)
        .arg("--findings")
        .arg(dir.join("scan/findings.json"))
        .arg("--out")
        .arg(dir.join("eval")));
    ensure(code(&out) == 0, format!("eval exit {}", code(&out)))?;
    let elapsed = started.elapsed();

    let samples = load_corpus(&corpus).map_err(|e| e.to_string())?;
    ensure(samples.len() == 50, format!("{} samples", samples.len()))?;
    let report = read_json(&dir.join("eval/report.json"));
    let mut parts = Vec::new();
    for cat in report["categories"].as_array().ok_or("no categories")? {
        let avg = &cat["average"];
        for metric in ["precision", "recall", "f1"] {
            let v = avg[metric].as_f64().ok_or(format!("{} has no {metric}", cat["category"]))?;
            ensure(round2(v) == 1.0, format!("{} {metric} = {v}", cat["category"]))?;
        }
        parts.push(format!("{} 1.00/1.00/1.00", cat["category"].as_str().unwrap_or("?")));
    }
    ensure(parts.len() == 3, "expected three categories")?;
    within(elapsed, 5_000)?;
    Ok(format!("{} ({} ms)", parts.join(", "), elapsed.as_millis()))
}

fn c4_taxonomy_coverage() -> Check {
    let started = Instant::now();
    let all: BTreeSet<PatternKind> = PatternKind::ALL.into_iter().collect();
    let covered: BTreeSet<PatternKind> = snippets::SNIPPETS.iter().map(|s| s.kind).collect();
    ensure(covered == all, "snippets do not cover all 25 kinds")?;
    let mut problems = Vec::new();
    for s in snippets::SNIPPETS {
        let config = snippets::snippet_config(s.kind);
        let scan = |src: &str| -> Result<Vec<(usize, PatternKind)>, String> {
            let found = scan_sample(&CodeSample::new(s.kind.id(), src), &all, &config).map_err(|e| e.to_string())?;
            Ok(found.into_iter().map(|f| (f.line, f.kind)).collect())
        };
        let got = scan(s.source)?;
        if got != [(s.line, s.kind)] {
            problems.push(format!("{}: expected [({}, {})], got {got:?}", s.kind.id(), s.line, s.kind.id()));
        }
        let clean = scan(s.clean)?;
        if !clean.is_empty() {
            problems.push(format!("{} corrected variant: {clean:?}", s.kind.id()));
        }
    }
    ensure(problems.is_empty(), problems.join("; "))?;
    within(started.elapsed(), 5_000)?;
    Ok(format!("25/25 snippets exact, 25/25 corrected variants silent ({} ms)", started.elapsed().as_millis()))
}

fn c5_prompt_isolation() -> Check {
    for category in Category::ALL {
        let text = build_system_prompt(&PromptSpec::for_category(category));
        for kind in PatternKind::ALL {
            let present = text.contains(kind.id());
            ensure(
                present == (kind.category() == category),
                format!("{} prompt: `{}` present = {present}", category.id(), kind.id()),
            )?;
        }
        for phrase in SAFEGUARDS {
            let n = text.matches(phrase).count();
            ensure(n == 1, format!("{} prompt: `{phrase}` appears {n} times", category.id()))?;
        }
        let headers = text.lines().filter(|l| l.starts_with("=== S")).count();
        ensure(headers == 5, format!("{} prompt has {headers} blocks", category.id()))?;
    }
    Ok("3 categories: own kinds only, 4 safeguards once each, 5 blocks".into())
}

fn scripted_scan(
    corpus: &Path,
    out: PathBuf,
    answer: fn(&str, &str) -> String,
) -> Result<LlmScanOutcome, String> {
    let mut cfg = RunConfig::new(Mode::LlmScan);
    cfg.corpus_path = Some(corpus.to_path_buf());
    cfg.output_dir = out;
    cfg.context_lines = 0;
    let backend = FnBackend(move |r: &ChatRequest<'_>| Ok(answer(r.system_text, r.user_text)));
    let client = LlmClient::new(ModelEndpoint::new("scripted", "scripted-4b"), Box::new(backend)).map_err(|e| e.to_string())?;
    llm_scan_with(&cfg, &client).map_err(|e| format!("{e:#}"))
}

fn c6_hallucination_guard(dir: &Path) -> Check {
    let corpus = dir.join("guard.json");
    let samples = generate_seed_corpus(&Category::ALL.into_iter().collect(), 1);
    save_corpus(&samples, &corpus).map_err(|e| e.to_string())?;

    let mixed = scripted_scan(&corpus, dir.join("mixed"), in_and_out_of_range_answer)?;
    let clean = scripted_scan(&corpus, dir.join("clean"), in_range_answer)?;
    let requests = mixed.blocks * Category::ALL.len();
    ensure(mixed.failures.is_empty(), format!("failures: {:?}", mixed.failures))?;
    ensure(mixed.requests == requests, format!("{} requests for {} block prompts", mixed.requests, requests))?;
    ensure(mixed.findings.len() == requests, format!("{} findings for {requests} block prompts", mixed.findings.len()))?;
    let out_of_range = mixed.rejections.iter().filter(|r| r.reason == RejectionReason::LineOutOfRange).count();
    ensure(
        out_of_range == requests && mixed.rejections.len() == requests,
        format!("{out_of_range} LineOutOfRange of {} rejections for {requests} block prompts", mixed.rejections.len()),
    )?;
    let sidecar = read_json(&dir.join("mixed/rejections.json"));
    let sidecar_len = sidecar["rejections"].as_array().map_or(0, Vec::len);
    ensure(sidecar_len == requests, format!("sidecar holds {sidecar_len} rejections"))?;
    ensure(mixed.findings == clean.findings, "rejected records changed the accepted findings")?;

    let categories: BTreeSet<Category> = Category::ALL.into_iter().collect();
    let eval = |f: Vec<Finding>| evaluate_corpus(&samples, f, &categories, MatchPolicy::default()).map_err(|e| e.to_string());
    let with_rejects = eval(mixed.findings.clone())?;
    let without = eval(clean.findings.clone())?;
    let fp = |r: &loopscan::evaluation::EvalReport| -> usize {
        r.categories.iter().flat_map(|c| &c.rows).filter_map(|row| row.counts).map(|c| c.fp).sum()
    };
    ensure(fp(&with_rejects) == fp(&without), "rejected records changed FP counts")?;
    ensure(with_rejects == without, "rejected records changed the report")?;
    Ok(format!(
        "{} blocks x 3 categories: {requests} findings, {requests} LineOutOfRange, FP {} with and without rejected records",
        mixed.blocks,
        fp(&with_rejects)
    ))
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<Finding>, Vec<GroundTruthAnnotation>, MatchPolicy) {
    const KINDS: [PatternKind; 4] = [
        PatternKind::InfiniteLoop,
        PatternKind::OffByOne,
        PatternKind::HardcodedSecret,
        PatternKind::RangeLenAntipattern,
    ];
    let nf = rng.gen_range(0..=6);
    let nt = rng.gen_range(0..=6);
    let findings = (0..nf)
        .map(|_| Finding::rule("r", rng.gen_range(1..=15), KINDS[rng.gen_range(0..4)], String::new()))
        .collect();
    let truth = (0..nt)
        .map(|_| {
            let kind = KINDS[rng.gen_range(0..4)];
            let start = rng.gen_range(1..=15);
            GroundTruthAnnotation {
                sample_id: "r".into(),
                line_start: start,
                line_end: start + rng.gen_range(0..=4),
                category: kind.category(),
                kind,
                note: String::new(),
            }
        })
        .collect();
    let granularity = if rng.gen_bool(0.3) { Granularity::Category } else { Granularity::PatternKind };
    let policy = MatchPolicy::new(rng.gen_range(0..=2), granularity).expect("valid policy");
    (findings, truth, policy)
}

/// Perturbs rule findings the way a noisy model might.
fn perturb(findings: &[Finding], sample: &CodeSample, rng: &mut ChaCha8Rng) -> Vec<Finding> {
    let mut out: Vec<Finding> = Vec::new();
    for f in findings {
        if rng.gen_bool(0.2) {
            continue;
        }
        let mut g = f.clone();
        g.line = (g.line as i64 + rng.gen_range(-2..=2)).clamp(1, sample.line_count().max(1) as i64) as usize;
        if rng.gen_bool(0.2) {
            let kinds: Vec<PatternKind> = g.category.kinds().collect();
            g.kind = kinds[rng.gen_range(0..kinds.len())];
        }
        out.push(g);
    }
    for _ in 0..rng.gen_range(0..=2) {
        let kind = PatternKind::ALL[rng.gen_range(0..PatternKind::ALL.len())];
        out.push(Finding::rule(&sample.sample_id, rng.gen_range(1..=sample.line_count().max(1)), kind, String::new()));
    }
    out
}

fn c7_matcher_oracle() -> Check {
    let started = Instant::now();
    let config = DetectorConfig::default();
    let all: BTreeSet<PatternKind> = PatternKind::ALL.into_iter().collect();
    let policies = [
        MatchPolicy::default(),
        MatchPolicy::new(0, Granularity::PatternKind).expect("valid"),
        MatchPolicy::new(2, Granularity::Category).expect("valid"),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut divergent = Vec::new();
    let mut check = |f: &[Finding], t: &[GroundTruthAnnotation], p: &MatchPolicy, label: String| -> Result<(), String> {
        let greedy = match_findings(f, t, p).map_err(|e| e.to_string())?.counts;
        let best = optimal_match_count(f, t, p);
        let optimal = EvalCounts::new(best, f.len() - best, t.len() - best);
        if greedy != optimal {
            divergent.push(format!("{label}: greedy {greedy:?} optimal {optimal:?} findings {f:?} truth {t:?} policy {p:?}"));
        }
        Ok(())
    };

    let mut seed_instances = 0;
    for seed in 1..=10u64 {
        for sample in generate_seed_corpus(&Category::ALL.into_iter().collect(), seed) {
            let rule = scan_sample(&sample, &all, &config).map_err(|e| e.to_string())?;
            let truth: Vec<GroundTruthAnnotation> = sample
                .annotations
                .iter()
                .map(|a| GroundTruthAnnotation { sample_id: sample.sample_id.clone(), ..a.clone() })
                .collect();
            let noisy = perturb(&rule, &sample, &mut rng);
            for p in &policies {
                check(&rule, &truth, p, format!("seed {seed} {}", sample.sample_id))?;
                check(&noisy, &truth, p, format!("seed {seed} {} perturbed", sample.sample_id))?;
                seed_instances += 2;
            }
        }
    }
    let mut random_rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..1000 {
        let (f, t, p) = random_instance(&mut random_rng);
        check(&f, &t, &p, format!("random #{i}"))?;
    }
    for d in &divergent {
        println!("  divergent instance for fixture review: {d}");
    }
    ensure(divergent.is_empty(), format!("{} divergent instances", divergent.len()))?;
    within(started.elapsed(), 30_000)?;
    Ok(format!(
        "{seed_instances} seed-corpus and 1000 random instances, greedy == optimal on all ({} ms)",
        started.elapsed().as_millis()
    ))
}

fn c8_replay_determinism(dir: &Path) -> Check {
    let corpus = dir.join("replay-corpus.json");
    let samples = generate_seed_corpus(&Category::ALL.into_iter().collect(), 1);
    save_corpus(&samples, &corpus).map_err(|e| e.to_string())?;
    let base = start_mock_server(Arc::new(move |s: &str, u: &str| oracle_answer(&samples, s, u)));
    let log = dir.join("run.jsonl");

    let out = run(bin()
        .args(["llm-scan", "--model", "llama-3b", "--endpoint-url", &base, "--corpus"])
        .arg(&corpus)
        .arg("--record")
        .arg(&log)
        .arg("--out")
        .arg(dir.join("live")));
    ensure(code(&out) == 2, format!("recording run exit {}: {}", code(&out), String::from_utf8_lossy(&out.stderr)))?;

    let started = Instant::now();
    for name in ["replay1", "replay2"] {
        let out = run(bin().args(["llm-scan", "--corpus"]).arg(&corpus).arg("--replay").arg(&log).arg("--out").arg(dir.join(name)));
        ensure(code(&out) == 2, format!("{name} exit {}: {}", code(&out), String::from_utf8_lossy(&out.stderr)))?;
        let out = run(bin()
            .args(["eval", "--corpus"])
            .arg(&corpus)
            .arg("--findings")
            .arg(dir.join(name).join("findings.json"))
            .arg("--out")
            .arg(dir.join(name)));
        ensure(code(&out) == 0, format!("{name} eval exit {}", code(&out)))?;
    }
    let elapsed = started.elapsed();
    for file in ["findings.json", "rejections.json", "report.json", "report.md"] {
        let a = fs::read(dir.join("replay1").join(file)).map_err(|e| e.to_string())?;
        let b = fs::read(dir.join("replay2").join(file)).map_err(|e| e.to_string())?;
        ensure(a == b, format!("{file} differs between replays"))?;
    }
    let live = fs::read(dir.join("live/findings.json")).map_err(|e| e.to_string())?;
    let replayed = fs::read(dir.join("replay1/findings.json")).map_err(|e| e.to_string())?;
    ensure(live == replayed, "replayed findings differ from the recorded run")?;
    let n = read_json(&dir.join("replay1/findings.json"))["findings"].as_array().map_or(0, Vec::len);
    within(elapsed, 10_000)?;
    Ok(format!(
        "two replays byte-identical in findings, rejections and reports ({n} findings, {} ms)",
        elapsed.as_millis()
    ))
}

const NON_REPRODUCIBILITY: &str = "Comparative scores of specific small language models are not reproduced";

fn c9_non_reproducibility_statement() -> Check {
    let readme = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md");
    let text = fs::read_to_string(&readme).map_err(|e| format!("{}: {e}", readme.display()))?;
    ensure(text.contains(NON_REPRODUCIBILITY), "README lacks the non-reproducibility statement")?;
    Ok(format!(
        "{NON_REPRODUCIBILITY}: live model output is nondeterministic and the original evaluation samples are unpublished, so criteria 1-8 substitute arithmetic goldens, properties and oracle checks"
    ))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let d = dir.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Check>)> = vec![
        ("1 metric goldens", Box::new(c1_metric_goldens)),
        ("2 macro-average golden", Box::new(c2_macro_average)),
        ("3 seed-corpus soundness", Box::new(|| c3_seed_corpus_soundness(d))),
        ("4 taxonomy coverage", Box::new(c4_taxonomy_coverage)),
        ("5 prompt isolation", Box::new(c5_prompt_isolation)),
        ("6 hallucination guard", Box::new(|| c6_hallucination_guard(d))),
        ("7 matcher oracle equivalence", Box::new(c7_matcher_oracle)),
        ("8 end-to-end replay determinism", Box::new(|| c8_replay_determinism(d))),
        ("9 non-reproducibility statement", Box::new(c9_non_reproducibility_statement)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("[PASS] criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
