use std::collections::BTreeSet;

use loopscan::corpus::{corpus_to_string, generate_seed_corpus, parse_corpus, Category, PatternKind};
use loopscan::detectors::{scan_sample, DetectorConfig};
use loopscan::extractor::{extract_loops, parse_source};

fn all_categories() -> BTreeSet<Category> {
    Category::ALL.iter().copied().collect()
}

fn all_kinds() -> BTreeSet<PatternKind> {
    PatternKind::ALL.iter().copied().collect()
}

#[test]
fn rules_reproduce_annotations_exactly_for_many_seeds() {
    let cfg = DetectorConfig::default();
    let mut failures = Vec::new();
    for seed in 0..40 {
        for sample in generate_seed_corpus(&all_categories(), seed) {
            let found: Vec<_> = scan_sample(&sample, &all_kinds(), &cfg)
                .unwrap_or_else(|e| panic!("seed {seed} {}: {e}\n{}", sample.sample_id, sample.source))
                .into_iter()
                .map(|f| (f.line, f.kind))
                .collect();
            let expected: Vec<_> = sample.annotations.iter().map(|a| (a.line_start, a.kind)).collect();
            if found != expected {
                failures.push(format!(
                    "seed {seed} {}: expected {expected:?} got {found:?}\n{}",
                    sample.sample_id, sample.source
                ));
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn every_sample_has_a_loop_and_annotations_sit_inside_one() {
    for seed in [1, 2, 99] {
        for sample in generate_seed_corpus(&all_categories(), seed) {
            let module = parse_source(&sample).expect("seed samples parse");
            let regions = extract_loops(&module);
            assert!(!regions.is_empty(), "{} has no loop", sample.sample_id);
            for ann in &sample.annotations {
                assert!(
                    regions.iter().any(|r| r.header_line <= ann.line_start && ann.line_end <= r.body_end),
                    "{} annotation at {} outside every loop",
                    sample.sample_id,
                    ann.line_start
                );
            }
        }
    }
}

#[test]
fn seed_corpus_round_trips_through_the_file_format() {
    let samples = generate_seed_corpus(&all_categories(), 1);
    let text = corpus_to_string(&samples);
    assert_eq!(parse_corpus(&text).unwrap(), samples);
    assert_eq!(corpus_to_string(&generate_seed_corpus(&all_categories(), 1)), text);
}
