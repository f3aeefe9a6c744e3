//! Deterministic rule engine for the 25 loop patterns.
//!
//! Every rule is a syntactic heuristic over one parsed module. Rules only
//! see the module they are given; there is no inter-procedural analysis.

pub(crate) mod analysis;
mod control;
mod criteria;
mod efficiency;
mod security;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{Category, CodeSample, PatternKind};
use crate::extractor::{extract_loops, parse_source, LoopRegion, ParseError, ParsedModule, Pragmas};
use analysis::Layout;

pub use criteria::{detector_criteria, RuleCriteria};

/// Who produced a finding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Rule,
    Model(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Rule => f.write_str("rule"),
            Origin::Model(name) => write!(f, "model:{name}"),
        }
    }
}

impl Serialize for Origin {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Origin {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if text == "rule" {
            Ok(Origin::Rule)
        } else if let Some(name) = text.strip_prefix("model:") {
            Ok(Origin::Model(name.to_string()))
        } else {
            Err(serde::de::Error::custom(format!(
                "origin must be `rule` or `model:<name>`, got `{text}`"
            )))
        }
    }
}

/// One detected issue.
///
/// Invariants:
/// - `kind.category() == category`
/// - `line` lies within the sample
/// - `confidence` is in [0, 1] and is 1.0 for rule findings
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Finding {
    pub sample_id: String,
    pub line: usize,
    pub category: Category,
    pub kind: PatternKind,
    pub message: String,
    pub origin: Origin,
    pub confidence: f64,
}

impl Finding {
    pub fn rule(sample_id: &str, line: usize, kind: PatternKind, message: String) -> Self {
        Finding {
            sample_id: sample_id.to_string(),
            line,
            category: kind.category(),
            kind,
            message,
            origin: Origin::Rule,
            confidence: 1.0,
        }
    }
}

fn words(list: &[&str]) -> Vec<String> {
    list.iter().map(|w| w.to_string()).collect()
}

/// Lexicons and thresholds used by the rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub secret_words: Vec<String>,
    pub destructive_words: Vec<String>,
    pub authorization_words: Vec<String>,
    pub auth_call_words: Vec<String>,
    pub user_input_words: Vec<String>,
    pub validation_words: Vec<String>,
    pub protection_words: Vec<String>,
    /// Minimum constant iteration count treated as a large collection.
    pub large_collection_threshold: u64,
    /// How many lines above a loop an intent comment may sit.
    pub intent_window: usize,
    /// Treat every sample as exception-prone (otherwise only samples with
    /// the `# loopscan: exception-prone` pragma).
    pub exception_prone: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            secret_words: words(&["password", "passwd", "secret", "token", "key", "ssn", "credential"]),
            destructive_words: words(&["delete", "drop", "remove", "purge"]),
            authorization_words: words(&["authorize", "check_permission", "is_admin", "has_permission"]),
            auth_call_words: words(&["authenticate", "login", "auth"]),
            user_input_words: words(&[
                "request", "req", "user", "username", "input", "attempt", "payload", "params",
                "form", "supplied", "submitted", "uploaded", "untrusted", "incoming",
            ]),
            validation_words: words(&[
                "validate", "allowed", "allowlist", "whitelist", "is_safe", "check", "verify",
            ]),
            protection_words: words(&["encrypt", "hash", "mask", "redact", "hmac", "digest"]),
            large_collection_threshold: 100_000,
            intent_window: 10,
            exception_prone: false,
        }
    }
}

/// A rule hit before it is turned into a [`Finding`].
pub(crate) struct Hit {
    pub line: usize,
    pub message: String,
}

/// Everything a rule may look at.
pub(crate) struct Ctx<'a> {
    pub module: &'a ParsedModule,
    pub config: &'a DetectorConfig,
    pub layout: Layout<'a>,
    pub pragmas: Pragmas,
}

impl Ctx<'_> {
    pub fn exception_prone(&self) -> bool {
        self.config.exception_prone || self.pragmas.exception_prone
    }

    pub fn user_controlled(&self, name: &str) -> bool {
        self.pragmas.user_controlled.iter().any(|n| n == name)
            || analysis::matches_lexicon(name, &self.config.user_input_words)
    }
}

type RuleFn = fn(&Ctx<'_>) -> Vec<Hit>;

fn rule_for(kind: PatternKind) -> RuleFn {
    use PatternKind::*;
    match kind {
        InfiniteLoop => control::infinite_loop,
        OffByOne => control::off_by_one,
        ControlFlowMisuse => control::control_flow_misuse,
        LoopVarReassignment => control::loop_var_reassignment,
        DeadUnreachableCode => control::dead_unreachable_code,
        SensitiveDataLogging => security::sensitive_data_logging,
        TimingSideChannel => security::timing_side_channel,
        MissingAuthorization => security::missing_authorization,
        InsecureEvalInjection => security::insecure_eval_injection,
        UnvalidatedLoopBound => security::unvalidated_loop_bound,
        ResourceExhaustion => security::resource_exhaustion,
        UnencryptedSensitiveStorage => security::unencrypted_sensitive_storage,
        HardcodedSecret => security::hardcoded_secret,
        UnsafeNetworkFileOp => security::unsafe_network_file_op,
        MissingExceptionHandling => security::missing_exception_handling,
        InvariantRecompute => efficiency::invariant_recompute,
        RedundantObjectCreation => efficiency::redundant_object_creation,
        StringConcatInLoop => efficiency::string_concat_in_loop,
        MissingLazyEvaluation => efficiency::missing_lazy_evaluation,
        AvoidableNestedLoop => efficiency::avoidable_nested_loop,
        InefficientMembershipCheck => efficiency::inefficient_membership_check,
        MissingBuiltinComprehension => efficiency::missing_builtin_comprehension,
        RedundantIOInLoop => efficiency::redundant_io_in_loop,
        UnusedAccumulation => efficiency::unused_accumulation,
        RangeLenAntipattern => efficiency::range_len_antipattern,
    }
}

/// Runs the enabled rules over one parsed module.
///
/// `regions` must come from [`extract_loops`] on the same module. The
/// result is sorted by (line, kind) with at most one finding per pair.
pub fn run_detectors(
    module: &ParsedModule,
    regions: &[LoopRegion],
    enabled: &BTreeSet<PatternKind>,
    config: &DetectorConfig,
) -> Vec<Finding> {
    let ctx = Ctx {
        module,
        config,
        layout: Layout::build(module, regions),
        pragmas: module.pragmas(),
    };
    let mut seen = HashSet::new();
    let mut findings = Vec::new();
    for &kind in enabled {
        for hit in rule_for(kind)(&ctx) {
            if hit.line >= 1 && hit.line <= module.line_count() && seen.insert((hit.line, kind)) {
                findings.push(Finding::rule(&module.sample_id, hit.line, kind, hit.message));
            }
        }
    }
    findings.sort_by(|a, b| (a.line, a.kind).cmp(&(b.line, b.kind)));
    findings
}

/// Parses a sample, extracts its loops and runs the enabled rules.
pub fn scan_sample(
    sample: &CodeSample,
    enabled: &BTreeSet<PatternKind>,
    config: &DetectorConfig,
) -> Result<Vec<Finding>, ParseError> {
    let module = parse_source(sample)?;
    let regions = extract_loops(&module);
    Ok(run_detectors(&module, &regions, enabled, config))
}

/// Every pattern kind of the given categories.
pub fn kinds_of(categories: &BTreeSet<Category>) -> BTreeSet<PatternKind> {
    PatternKind::ALL
        .iter()
        .copied()
        .filter(|k| categories.contains(&k.category()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan(src: &str) -> Vec<(usize, PatternKind)> {
        let all: BTreeSet<_> = PatternKind::ALL.iter().copied().collect();
        scan_sample(&CodeSample::new("t", src), &all, &DetectorConfig::default())
            .unwrap()
            .into_iter()
            .map(|f| (f.line, f.kind))
            .collect()
    }

    #[test]
    fn origin_serializes_as_string() {
        assert_eq!(serde_json::to_string(&Origin::Rule).unwrap(), "\"rule\"");
        let m = Origin::Model("phi".into());
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, "\"model:phi\"");
        assert_eq!(serde_json::from_str::<Origin>(&text).unwrap(), m);
        assert!(serde_json::from_str::<Origin>("\"human\"").is_err());
    }

    #[test]
    fn findings_are_sorted_and_respect_enabled_set() {
        let src = "i = 0\nwhile i < 5:\n    x = eval(data)\n";
        assert_eq!(
            scan(src),
            vec![(2, PatternKind::InfiniteLoop), (3, PatternKind::InsecureEvalInjection)]
        );
        let only: BTreeSet<_> = [PatternKind::InsecureEvalInjection].into();
        let f = scan_sample(&CodeSample::new("t", src), &only, &DetectorConfig::default()).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].confidence, 1.0);
        assert_eq!(f[0].category, Category::SecurityInLoop);
    }

    #[test]
    fn loopless_source_has_no_loop_findings() {
        assert!(scan("x = 1\nprint(x)\n").is_empty());
    }
}
