//! Matching findings against ground truth and scoring them per category.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::corpus::{Category, CodeSample, GroundTruthAnnotation};
use crate::detectors::Finding;

pub const MAX_LINE_TOLERANCE: usize = 10;
pub const FINDINGS_FORMAT_VERSION: u32 = 1;
pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("line tolerance {0} exceeds the maximum of {MAX_LINE_TOLERANCE}")]
    ToleranceTooLarge(usize),
    #[error("matching mixes samples `{expected}` and `{found}`")]
    MixedSamples { expected: String, found: String },
    #[error("sample `{sample_id}` appears more than once in category `{category}`")]
    DuplicateRow { sample_id: String, category: Category },
    #[error("findings refer to unknown sample `{0}`")]
    UnknownSample(String),
    #[error("unsupported findings format version {found} (expected {FINDINGS_FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

/// Level at which a finding's kind must agree with an annotation's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    #[default]
    PatternKind,
    Category,
}

impl std::str::FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pattern_kind" | "kind" => Ok(Granularity::PatternKind),
            "category" => Ok(Granularity::Category),
            other => Err(format!("unknown granularity `{other}` (expected pattern_kind or category)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchPolicy {
    line_tolerance: usize,
    granularity: Granularity,
}

impl Default for MatchPolicy {
    fn default() -> Self {
        MatchPolicy {
            line_tolerance: 1,
            granularity: Granularity::PatternKind,
        }
    }
}

impl MatchPolicy {
    pub fn new(line_tolerance: usize, granularity: Granularity) -> Result<Self, EvalError> {
        if line_tolerance > MAX_LINE_TOLERANCE {
            return Err(EvalError::ToleranceTooLarge(line_tolerance));
        }
        Ok(MatchPolicy {
            line_tolerance,
            granularity,
        })
    }

    pub fn line_tolerance(&self) -> usize {
        self.line_tolerance
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    /// Kinds agree at the policy granularity and the line lies within the
    /// annotation span widened by the tolerance.
    pub fn admits(&self, finding: &Finding, annotation: &GroundTruthAnnotation) -> bool {
        let kinds_agree = match self.granularity {
            Granularity::PatternKind => finding.kind == annotation.kind,
            Granularity::Category => finding.kind.category() == annotation.kind.category(),
        };
        kinds_agree
            && finding.line + self.line_tolerance >= annotation.line_start
            && finding.line <= annotation.line_end + self.line_tolerance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EvalCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl EvalCounts {
    pub fn new(tp: usize, fp: usize, fn_: usize) -> Self {
        EvalCounts { tp, fp, fn_ }
    }

    /// Nothing predicted and nothing to find.
    pub fn is_vacuous(&self) -> bool {
        self.tp == 0 && self.fp == 0 && self.fn_ == 0
    }
}

impl std::ops::Add for EvalCounts {
    type Output = EvalCounts;

    fn add(self, o: EvalCounts) -> EvalCounts {
        EvalCounts::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_)
    }
}

/// Detection quality metrics, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
}

fn ratio<T: Float>(num: usize, den: usize) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::from(num).expect("count fits") / T::from(den).expect("count fits")
    }
}

/// Harmonic mean, zero when both inputs are zero.
pub fn f1_score<T: Float>(precision: T, recall: T) -> T {
    let sum = precision + recall;
    if sum == T::zero() {
        T::zero()
    } else {
        (T::one() + T::one()) * precision * recall / sum
    }
}

/// Rounds half up to two decimals; the small bias absorbs binary
/// representation error such as 0.875 stored as 0.87499999...
pub fn round2<T: Float>(x: T) -> T {
    let hundred = T::from(100.0).expect("constant");
    let bias = T::from(0.5 + 1e-9).expect("constant");
    (x * hundred + bias).floor() / hundred
}

impl<T: Float> EvalMetrics<T> {
    pub fn rounded(&self) -> Self {
        EvalMetrics {
            precision: round2(self.precision),
            recall: round2(self.recall),
            f1: round2(self.f1),
        }
    }

    /// Component-wise arithmetic mean; `None` for an empty input.
    pub fn mean<'a>(items: impl IntoIterator<Item = &'a Self>) -> Option<Self>
    where
        T: 'a,
    {
        let mut n = 0usize;
        let mut acc = EvalMetrics {
            precision: T::zero(),
            recall: T::zero(),
            f1: T::zero(),
        };
        for m in items {
            acc.precision = acc.precision + m.precision;
            acc.recall = acc.recall + m.recall;
            acc.f1 = acc.f1 + m.f1;
            n += 1;
        }
        let n = T::from(n).expect("count fits");
        (n > T::zero()).then(|| EvalMetrics {
            precision: acc.precision / n,
            recall: acc.recall / n,
            f1: acc.f1 / n,
        })
    }
}

/// precision = tp/(tp+fp), recall = tp/(tp+fn), 0/0 taken as 0.
pub fn compute_metrics<T: Float>(counts: EvalCounts) -> EvalMetrics<T> {
    let precision = ratio(counts.tp, counts.tp + counts.fp);
    let recall = ratio(counts.tp, counts.tp + counts.fn_);
    EvalMetrics {
        precision,
        recall,
        f1: f1_score(precision, recall),
    }
}

/// Result of matching one sample's findings to its annotations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchOutcome {
    /// `(finding index, annotation index)` into the inputs.
    pub pairs: Vec<(usize, usize)>,
    pub counts: EvalCounts,
}

fn check_single_sample(findings: &[Finding], truth: &[GroundTruthAnnotation]) -> Result<(), EvalError> {
    let mut ids = findings
        .iter()
        .map(|f| f.sample_id.as_str())
        .chain(truth.iter().map(|a| a.sample_id.as_str()));
    if let Some(first) = ids.next() {
        if let Some(other) = ids.find(|id| *id != first) {
            return Err(EvalError::MixedSamples {
                expected: first.to_string(),
                found: other.to_string(),
            });
        }
    }
    Ok(())
}

/// One-to-one greedy matching.
///
/// Findings are visited in `(line, kind)` order; each takes the unused
/// admissible annotation with the smallest `line_end`, then smallest
/// `line_start`. Since the admissible lines for an annotation form an
/// interval, this earliest-deadline rule yields a maximum matching.
pub fn match_findings(
    findings: &[Finding],
    truth: &[GroundTruthAnnotation],
    policy: &MatchPolicy,
) -> Result<MatchOutcome, EvalError> {
    check_single_sample(findings, truth)?;
    let mut order: Vec<usize> = (0..findings.len()).collect();
    order.sort_by_key(|&i| (findings[i].line, findings[i].kind, i));

    let mut used = vec![false; truth.len()];
    let mut pairs = Vec::new();
    for fi in order {
        let best = (0..truth.len())
            .filter(|&ai| !used[ai] && policy.admits(&findings[fi], &truth[ai]))
            .min_by_key(|&ai| (truth[ai].line_end, truth[ai].line_start, ai));
        if let Some(ai) = best {
            used[ai] = true;
            pairs.push((fi, ai));
        }
    }
    let tp = pairs.len();
    Ok(MatchOutcome {
        pairs,
        counts: EvalCounts::new(tp, findings.len() - tp, truth.len() - tp),
    })
}

/// Size of a maximum one-to-one matching, by exhaustive search.
/// Exponential; meant as a test oracle for small instances.
pub fn optimal_match_count(findings: &[Finding], truth: &[GroundTruthAnnotation], policy: &MatchPolicy) -> usize {
    fn search(
        fi: usize,
        findings: &[Finding],
        truth: &[GroundTruthAnnotation],
        policy: &MatchPolicy,
        used: &mut Vec<bool>,
    ) -> usize {
        if fi == findings.len() {
            return 0;
        }
        let mut best = search(fi + 1, findings, truth, policy, used);
        for ai in 0..truth.len() {
            if !used[ai] && policy.admits(&findings[fi], &truth[ai]) {
                used[ai] = true;
                best = best.max(1 + search(fi + 1, findings, truth, policy, used));
                used[ai] = false;
            }
        }
        best
    }
    search(0, findings, truth, policy, &mut vec![false; truth.len()])
}

/// Sorts by `(sample_id, line, kind)` and drops repeats of that key,
/// keeping the first occurrence in input order.
pub fn merge_findings(mut findings: Vec<Finding>) -> Vec<Finding> {
    findings.sort_by(|a, b| (&a.sample_id, a.line, a.kind).cmp(&(&b.sample_id, b.line, b.kind)));
    findings.dedup_by(|b, a| a.sample_id == b.sample_id && a.line == b.line && a.kind == b.kind);
    findings
}

/// Per-sample input to [`build_report`].
#[derive(Debug, Clone, PartialEq)]
pub enum RowScore {
    Counts(EvalCounts),
    Metrics(EvalMetrics<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub sample_id: String,
    pub category: Category,
    pub score: RowScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub sample_id: String,
    #[serde(flatten)]
    pub counts: Option<EvalCounts>,
    /// Full precision.
    #[serde(flatten)]
    pub metrics: EvalMetrics<f64>,
    /// No findings and no annotations; excluded from the average.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    pub category: Category,
    pub rows: Vec<ReportRow>,
    /// Mean of the two-decimal per-sample metrics over non-vacuous rows.
    pub average: Option<EvalMetrics<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_fingerprint: Option<String>,
    pub policy: MatchPolicy,
    pub categories: Vec<CategoryReport>,
}

/// Groups rows by category (catalog order) and sample id, and averages
/// the displayed per-sample metrics.
pub fn build_report(runs: Vec<RunRow>, policy: MatchPolicy) -> Result<EvalReport, EvalError> {
    let mut grouped: BTreeMap<Category, BTreeMap<String, ReportRow>> = BTreeMap::new();
    for run in runs {
        let (counts, metrics) = match run.score {
            RowScore::Counts(c) => (Some(c), compute_metrics(c)),
            RowScore::Metrics(m) => (None, m),
        };
        let row = ReportRow {
            sample_id: run.sample_id.clone(),
            vacuous: counts.is_some_and(|c| c.is_vacuous()),
            counts,
            metrics,
        };
        if grouped.entry(run.category).or_default().insert(run.sample_id.clone(), row).is_some() {
            return Err(EvalError::DuplicateRow {
                sample_id: run.sample_id,
                category: run.category,
            });
        }
    }
    let categories = grouped
        .into_iter()
        .map(|(category, rows)| {
            let rows: Vec<ReportRow> = rows.into_values().collect();
            let displayed: Vec<EvalMetrics<f64>> =
                rows.iter().filter(|r| !r.vacuous).map(|r| r.metrics.rounded()).collect();
            CategoryReport {
                category,
                average: EvalMetrics::mean(&displayed),
                rows,
            }
        })
        .collect();
    Ok(EvalReport {
        version: REPORT_FORMAT_VERSION,
        config_fingerprint: None,
        policy,
        categories,
    })
}

/// Scores `findings` against the annotations of `samples`.
///
/// Findings are merged per sample first. A row is produced for each
/// (sample, category) pair with at least one annotation or finding.
pub fn evaluate_corpus(
    samples: &[CodeSample],
    findings: Vec<Finding>,
    categories: &BTreeSet<Category>,
    policy: MatchPolicy,
) -> Result<EvalReport, EvalError> {
    let known: HashMap<&str, &CodeSample> = samples.iter().map(|s| (s.sample_id.as_str(), s)).collect();
    let mut by_sample: HashMap<String, Vec<Finding>> = HashMap::new();
    for f in merge_findings(findings) {
        if !known.contains_key(f.sample_id.as_str()) {
            return Err(EvalError::UnknownSample(f.sample_id));
        }
        by_sample.entry(f.sample_id.clone()).or_default().push(f);
    }

    let mut rows = Vec::new();
    for sample in samples {
        let sample_findings = by_sample.remove(&sample.sample_id).unwrap_or_default();
        for &category in categories {
            let f: Vec<Finding> = sample_findings.iter().filter(|f| f.category == category).cloned().collect();
            let t: Vec<GroundTruthAnnotation> = sample
                .annotations
                .iter()
                .filter(|a| a.category == category)
                .map(|a| GroundTruthAnnotation {
                    sample_id: sample.sample_id.clone(),
                    ..a.clone()
                })
                .collect();
            if f.is_empty() && t.is_empty() {
                continue;
            }
            let outcome = match_findings(&f, &t, &policy)?;
            rows.push(RunRow {
                sample_id: sample.sample_id.clone(),
                category,
                score: RowScore::Counts(outcome.counts),
            });
        }
    }
    let mut report = build_report(rows, policy)?;
    for &category in categories {
        if !report.categories.iter().any(|c| c.category == category) {
            report.categories.push(CategoryReport {
                category,
                rows: Vec::new(),
                average: None,
            });
        }
    }
    report.categories.sort_by_key(|c| c.category);
    Ok(report)
}

fn fmt2(x: f64) -> String {
    format!("{:.2}", round2(x))
}

fn granularity_id(g: Granularity) -> &'static str {
    match g {
        Granularity::PatternKind => "pattern_kind",
        Granularity::Category => "category",
    }
}

/// One Markdown table per category with two-decimal metrics.
pub fn report_markdown(report: &EvalReport) -> String {
    let mut out = String::from("# Evaluation report\n\n");
    let _ = writeln!(
        out,
        "Match policy: line tolerance {}, granularity {}.",
        report.policy.line_tolerance,
        granularity_id(report.policy.granularity)
    );
    if let Some(fp) = &report.config_fingerprint {
        let _ = writeln!(out, "Config fingerprint: `{fp}`.");
    }
    for cat in &report.categories {
        let _ = write!(
            out,
            "\n## {}\n\n| Sample | TP | FP | FN | Precision | Recall | F1 |\n|---|---:|---:|---:|---:|---:|---:|\n",
            cat.category.title()
        );
        for row in &cat.rows {
            let (tp, fp, fn_) = match row.counts {
                Some(c) => (c.tp.to_string(), c.fp.to_string(), c.fn_.to_string()),
                None => ("".into(), "".into(), "".into()),
            };
            let m = &row.metrics;
            let _ = writeln!(
                out,
                "| {} | {tp} | {fp} | {fn_} | {} | {} | {} |",
                row.sample_id,
                fmt2(m.precision),
                fmt2(m.recall),
                fmt2(m.f1)
            );
        }
        match &cat.average {
            Some(m) => {
                let _ = writeln!(
                    out,
                    "| **Average** | | | | {} | {} | {} |",
                    fmt2(m.precision),
                    fmt2(m.recall),
                    fmt2(m.f1)
                );
            }
            None => out.push_str("| **Average** | | | | n/a | n/a | n/a |\n"),
        }
    }
    out
}

/// On-disk findings document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FindingsFile {
    pub version: u32,
    pub config_fingerprint: String,
    pub findings: Vec<Finding>,
}

impl FindingsFile {
    pub fn new(config_fingerprint: impl Into<String>, findings: Vec<Finding>) -> Self {
        FindingsFile {
            version: FINDINGS_FORMAT_VERSION,
            config_fingerprint: config_fingerprint.into(),
            findings,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("findings serialize");
        text.push('\n');
        text
    }
}

pub fn write_findings(file: &FindingsFile, path: impl AsRef<Path>) -> Result<(), EvalError> {
    let path = path.as_ref();
    fs::write(path, file.to_json()).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_findings(path: impl AsRef<Path>) -> Result<FindingsFile, EvalError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|source| EvalError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let found = value.get("version").and_then(|v| v.as_u64()).unwrap_or(0);
    if found != u64::from(FINDINGS_FORMAT_VERSION) {
        return Err(EvalError::Version {
            found: found.try_into().unwrap_or(u32::MAX),
        });
    }
    serde_json::from_value(value).map_err(|source| EvalError::Json {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PatternKind;

    fn finding(line: usize, kind: PatternKind) -> Finding {
        Finding::rule("s", line, kind, String::new())
    }

    fn ann(start: usize, end: usize, kind: PatternKind) -> GroundTruthAnnotation {
        GroundTruthAnnotation {
            sample_id: "s".into(),
            line_start: start,
            line_end: end,
            category: kind.category(),
            kind,
            note: String::new(),
        }
    }

    fn display(c: (usize, usize, usize)) -> (f64, f64, f64) {
        let m: EvalMetrics<f64> = compute_metrics(EvalCounts::new(c.0, c.1, c.2)).rounded();
        (m.precision, m.recall, m.f1)
    }

    #[test]
    fn metric_goldens() {
        assert_eq!(display((6, 2, 1)), (0.75, 0.86, 0.80));
        assert_eq!(display((14, 1, 2)), (0.93, 0.88, 0.90));
        assert_eq!(display((0, 0, 0)), (0.0, 0.0, 0.0));
        let m: EvalMetrics<f32> = compute_metrics(EvalCounts::new(6, 2, 1));
        assert!((m.precision - 0.75).abs() < 1e-6);
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(round2(0.875_f64), 0.88);
        assert_eq!(round2(0.785_f64), 0.79);
        assert_eq!(round2(0.8666_f64), 0.87);
        assert_eq!(round2(1.0_f64), 1.0);
    }

    #[test]
    fn exact_and_mismatched_matches() {
        let policy = MatchPolicy::default();
        let out = match_findings(&[finding(5, PatternKind::InfiniteLoop)], &[ann(5, 5, PatternKind::InfiniteLoop)], &policy).unwrap();
        assert_eq!(out.counts, EvalCounts::new(1, 0, 0));
        let out = match_findings(&[finding(5, PatternKind::StringConcatInLoop)], &[ann(5, 5, PatternKind::InfiniteLoop)], &policy).unwrap();
        assert_eq!(out.counts, EvalCounts::new(0, 1, 1));
        let coarse = MatchPolicy::new(0, Granularity::Category).unwrap();
        let out = match_findings(&[finding(5, PatternKind::OffByOne)], &[ann(5, 5, PatternKind::InfiniteLoop)], &coarse).unwrap();
        assert_eq!(out.counts.tp, 1);
    }

    #[test]
    fn earliest_deadline_tie_break_is_optimal() {
        // Preferring the smallest line_start would give A to line 3 and leave line 5 unmatched.
        let policy = MatchPolicy::new(0, Granularity::PatternKind).unwrap();
        let k = PatternKind::OffByOne;
        let findings = [finding(3, k), finding(5, k)];
        let truth = [ann(1, 10, k), ann(3, 3, k)];
        let out = match_findings(&findings, &truth, &policy).unwrap();
        assert_eq!(out.counts.tp, 2);
        assert_eq!(optimal_match_count(&findings, &truth, &policy), 2);
    }

    #[test]
    fn mixed_samples_rejected() {
        let mut other = finding(1, PatternKind::OffByOne);
        other.sample_id = "t".into();
        let err = match_findings(&[other], &[ann(1, 1, PatternKind::OffByOne)], &MatchPolicy::default());
        assert!(matches!(err, Err(EvalError::MixedSamples { .. })));
        assert!(matches!(MatchPolicy::new(11, Granularity::Category), Err(EvalError::ToleranceTooLarge(11))));
    }

    fn metrics_row(id: &str, p: f64, r: f64, f: f64) -> RunRow {
        RunRow {
            sample_id: id.into(),
            category: Category::LoopControlLogic,
            score: RowScore::Metrics(EvalMetrics { precision: p, recall: r, f1: f }),
        }
    }

    #[test]
    fn macro_average_of_displayed_metrics() {
        let rows = vec![
            metrics_row("c1", 0.75, 0.86, 0.84),
            metrics_row("c2", 0.75, 0.86, 0.84),
            metrics_row("c3", 0.88, 1.0, 0.92),
        ];
        let report = build_report(rows, MatchPolicy::default()).unwrap();
        let avg = report.categories[0].average.unwrap();
        assert_eq!(round2(avg.precision), 0.79);
        assert_eq!(round2(avg.f1), 0.87);
        assert!((avg.f1 - 0.8666666666666667).abs() < 1e-12);
    }

    #[test]
    fn report_rows_and_duplicates() {
        let single = build_report(vec![metrics_row("c1", 0.5, 0.25, 1.0 / 3.0)], MatchPolicy::default()).unwrap();
        let avg = single.categories[0].average.unwrap();
        assert_eq!((avg.precision, avg.recall, avg.f1), (0.5, 0.25, 0.33));
        let dup = build_report(vec![metrics_row("c1", 1.0, 1.0, 1.0), metrics_row("c1", 1.0, 1.0, 1.0)], MatchPolicy::default());
        assert!(matches!(dup, Err(EvalError::DuplicateRow { .. })));
    }

    #[test]
    fn vacuous_rows_do_not_dilute_the_average() {
        let rows = vec![
            RunRow { sample_id: "a".into(), category: Category::SecurityInLoop, score: RowScore::Counts(EvalCounts::new(2, 0, 0)) },
            RunRow { sample_id: "b".into(), category: Category::SecurityInLoop, score: RowScore::Counts(EvalCounts::default()) },
        ];
        let report = build_report(rows, MatchPolicy::default()).unwrap();
        assert_eq!(report.categories[0].average.unwrap().f1, 1.0);
        let json = serde_json::to_value(&report).unwrap();
        let row = &json["categories"][0]["rows"][0];
        assert_eq!((row["tp"].as_u64(), row["fn"].as_u64(), row["f1"].as_f64()), (Some(2), Some(0), Some(1.0)));
        assert!(report_markdown(&report).contains("| **Average** | | | | 1.00 | 1.00 | 1.00 |"));
    }

    #[test]
    fn merge_dedups_by_line_and_kind() {
        let merged = merge_findings(vec![
            finding(4, PatternKind::OffByOne),
            finding(2, PatternKind::InfiniteLoop),
            finding(4, PatternKind::OffByOne),
        ]);
        assert_eq!(merged.iter().map(|f| f.line).collect::<Vec<_>>(), [2, 4]);
    }
}
