//! Property tests over the library invariants.

use std::collections::BTreeSet;

use loopscan::corpus::{corpus_to_string, generate_seed_corpus, parse_corpus};
use loopscan::detectors::{run_detectors, DetectorConfig};
use loopscan::evaluation::{
    compute_metrics, match_findings, optimal_match_count, EvalCounts, Granularity, MatchPolicy,
};
use loopscan::extractor::{extract_loops, parse_source, CodeBlock};
use loopscan::prompt::{build_system_prompt, PromptSpec, SAFEGUARDS};
use loopscan::response_parser::parse_findings;
use loopscan::{Category, Finding, GroundTruthAnnotation, Metrics, PatternKind};
use proptest::prelude::*;

fn kind_strategy() -> impl Strategy<Value = PatternKind> {
    (0..PatternKind::ALL.len()).prop_map(|i| PatternKind::ALL[i])
}

/// Kinds drawn from a small pool so that collisions are common.
fn near_kind() -> impl Strategy<Value = PatternKind> {
    prop_oneof![
        Just(PatternKind::InfiniteLoop),
        Just(PatternKind::OffByOne),
        Just(PatternKind::HardcodedSecret),
    ]
}

fn findings_strategy() -> impl Strategy<Value = Vec<Finding>> {
    prop::collection::vec((1usize..20, near_kind()), 0..=6).prop_map(|v| {
        v.into_iter()
            .map(|(line, kind)| Finding::rule("s", line, kind, String::new()))
            .collect()
    })
}

fn truth_strategy() -> impl Strategy<Value = Vec<GroundTruthAnnotation>> {
    prop::collection::vec((1usize..20, 0usize..5, near_kind()), 0..=6).prop_map(|v| {
        v.into_iter()
            .map(|(start, len, kind)| GroundTruthAnnotation {
                sample_id: "s".into(),
                line_start: start,
                line_end: start + len,
                category: kind.category(),
                kind,
                note: String::new(),
            })
            .collect()
    })
}

fn policy_strategy() -> impl Strategy<Value = MatchPolicy> {
    (0usize..=3, prop::bool::ANY).prop_map(|(tol, coarse)| {
        let g = if coarse { Granularity::Category } else { Granularity::PatternKind };
        MatchPolicy::new(tol, g).unwrap()
    })
}

proptest! {
    #[test]
    fn counts_account_for_every_item(f in findings_strategy(), t in truth_strategy(), p in policy_strategy()) {
        let out = match_findings(&f, &t, &p).unwrap();
        prop_assert_eq!(out.counts.tp + out.counts.fn_, t.len());
        prop_assert_eq!(out.counts.tp + out.counts.fp, f.len());
        let mut fi: Vec<usize> = out.pairs.iter().map(|p| p.0).collect();
        let mut ai: Vec<usize> = out.pairs.iter().map(|p| p.1).collect();
        fi.sort(); fi.dedup(); ai.sort(); ai.dedup();
        prop_assert_eq!(fi.len(), out.pairs.len());
        prop_assert_eq!(ai.len(), out.pairs.len());
        for &(x, y) in &out.pairs {
            prop_assert!(p.admits(&f[x], &t[y]));
        }
    }

    #[test]
    fn greedy_equals_optimal(f in findings_strategy(), t in truth_strategy(), p in policy_strategy()) {
        let out = match_findings(&f, &t, &p).unwrap();
        prop_assert_eq!(out.counts.tp, optimal_match_count(&f, &t, &p));
    }

    #[test]
    fn finding_order_does_not_matter(f in findings_strategy(), t in truth_strategy(), p in policy_strategy()) {
        let mut reversed = f.clone();
        reversed.reverse();
        prop_assert_eq!(match_findings(&f, &t, &p).unwrap().counts, match_findings(&reversed, &t, &p).unwrap().counts);
    }

    #[test]
    fn wider_tolerance_never_loses_matches(f in findings_strategy(), t in truth_strategy(), tol in 0usize..10) {
        let narrow = MatchPolicy::new(tol, Granularity::PatternKind).unwrap();
        let wide = MatchPolicy::new(tol + 1, Granularity::PatternKind).unwrap();
        prop_assert!(match_findings(&f, &t, &wide).unwrap().counts.tp >= match_findings(&f, &t, &narrow).unwrap().counts.tp);
    }

    #[test]
    fn metric_ranges_and_harmonic_identity(tp in 0usize..50, fp in 0usize..50, fn_ in 0usize..50) {
        let m: Metrics = compute_metrics(EvalCounts::new(tp, fp, fn_));
        prop_assert!((0.0..=1.0).contains(&m.precision));
        prop_assert!((0.0..=1.0).contains(&m.recall));
        prop_assert!(m.f1 >= 0.0 && m.f1 <= m.precision.max(m.recall) + 1e-12);
        if m.precision + m.recall == 0.0 {
            prop_assert_eq!(m.f1, 0.0);
        } else {
            prop_assert!((m.f1 - 2.0 * m.precision * m.recall / (m.precision + m.recall)).abs() < 1e-9);
        }
    }

    #[test]
    fn prompt_names_only_its_own_kinds(mask in 1u32..(1 << 10), cat in 0usize..3) {
        let category = Category::ALL[cat];
        let own: Vec<PatternKind> = category.kinds().collect();
        let kinds: Vec<PatternKind> = own.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, k)| *k).collect();
        prop_assume!(!kinds.is_empty());
        let text = build_system_prompt(&PromptSpec::new(category, kinds.clone(), "3.8", 20).unwrap());
        for kind in PatternKind::ALL {
            prop_assert_eq!(text.contains(kind.id()), kinds.contains(&kind), "{}", kind.id());
        }
        for phrase in SAFEGUARDS {
            prop_assert_eq!(text.matches(phrase).count(), 1);
        }
    }

    #[test]
    fn parser_accounts_for_every_json_record(
        records in prop::collection::vec((0usize..30, kind_strategy(), prop::bool::ANY), 0..12),
        prose in prop::collection::vec("[a-zA-Z ,.!]{0,30}", 0..4),
    ) {
        let block = CodeBlock {
            sample_id: "s".into(),
            first_line: 5,
            text: vec!["pass"; 10].join("\n"),
            line_count: 10,
        };
        let mut raw = prose.join("\n");
        raw.push('\n');
        let mut valid_json = 0;
        for (line, kind, broken) in &records {
            if *broken {
                raw.push_str(&format!("{{\"line\": {line}, \"kind\": \"{}\"\n", kind.id()));
            } else {
                valid_json += 1;
                raw.push_str(&format!("{{\"line\": {line}, \"kind\": \"{}\", \"explanation\": \"x\"}}\n", kind.id()));
            }
        }
        let spec = PromptSpec::for_category(Category::LoopControlLogic);
        let parsed = parse_findings(&raw, &block, &spec, "m");
        prop_assert!(parsed.findings.len() + parsed.rejections.len() >= valid_json);
        for f in &parsed.findings {
            prop_assert!(block.contains_line(f.line));
            prop_assert_eq!(f.category, Category::LoopControlLogic);
        }
        prop_assert_eq!(parse_findings(&raw, &block, &spec, "m"), parsed);
    }

    #[test]
    fn corpus_text_round_trips(seed in 0u64..1000, cat in 0usize..3) {
        let samples = generate_seed_corpus(&BTreeSet::from([Category::ALL[cat]]), seed);
        prop_assert_eq!(parse_corpus(&corpus_to_string(&samples)).unwrap(), samples);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn detectors_are_deterministic_and_monotone_in_enabled_kinds(seed in 0u64..500, mask in 0u32..(1 << 25)) {
        let config = DetectorConfig::default();
        let all: BTreeSet<PatternKind> = PatternKind::ALL.into_iter().collect();
        let subset: BTreeSet<PatternKind> = PatternKind::ALL
            .into_iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, k)| k)
            .collect();
        for sample in generate_seed_corpus(&Category::ALL.into_iter().collect(), seed) {
            let module = parse_source(&sample).unwrap();
            let regions = extract_loops(&module);
            let full = run_detectors(&module, &regions, &all, &config);
            prop_assert_eq!(&run_detectors(&module, &regions, &all, &config), &full);
            let part = run_detectors(&module, &regions, &subset, &config);
            let expected: Vec<Finding> = full.iter().filter(|f| subset.contains(&f.kind)).cloned().collect();
            prop_assert_eq!(part, expected);
        }
    }
}
