//! Structured system prompt (blocks S1..S5) and per-block user prompt.
//!
//! Rendering is pure: the same spec and block always give the same text.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::corpus::{Category, PatternKind};
use crate::detectors::detector_criteria;
use crate::extractor::CodeBlock;

pub const OUTPUT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_MAX_FINDINGS: usize = 20;
pub const DEFAULT_PYTHON_VERSION: &str = "3.7";
/// Last line of every well-formed answer.
pub const END_SENTINEL: &str = "END_OF_FINDINGS";
/// Answer line for a block with nothing to report.
pub const NO_FINDINGS: &str = "NO FINDINGS";

/// The four safeguard directives stated in S3.
pub const SAFEGUARDS: [&str; 4] = [
    "language-specific awareness",
    "code-aware grounding",
    "version sensitivity",
    "hallucination prevention",
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("a prompt needs at least one pattern kind")]
    EmptyKinds,
    #[error("kind `{kind}` belongs to `{actual}`, not to the prompt category `{category}`")]
    KindOutsideCategory {
        kind: PatternKind,
        actual: Category,
        category: Category,
    },
    #[error("max_findings must be positive")]
    ZeroMaxFindings,
}

/// What one system prompt asks for. Kinds are kept in catalog order so
/// equal sets render and fingerprint identically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptSpec {
    category: Category,
    kinds: Vec<PatternKind>,
    python_version: String,
    output_schema_version: u32,
    max_findings: usize,
}

impl PromptSpec {
    pub fn new(
        category: Category,
        kinds: impl IntoIterator<Item = PatternKind>,
        python_version: impl Into<String>,
        max_findings: usize,
    ) -> Result<Self, PromptError> {
        let mut kinds: Vec<PatternKind> = kinds.into_iter().collect();
        kinds.sort();
        kinds.dedup();
        if kinds.is_empty() {
            return Err(PromptError::EmptyKinds);
        }
        if let Some(&kind) = kinds.iter().find(|k| k.category() != category) {
            return Err(PromptError::KindOutsideCategory {
                kind,
                actual: kind.category(),
                category,
            });
        }
        if max_findings == 0 {
            return Err(PromptError::ZeroMaxFindings);
        }
        Ok(PromptSpec {
            category,
            kinds,
            python_version: python_version.into(),
            output_schema_version: OUTPUT_SCHEMA_VERSION,
            max_findings,
        })
    }

    /// Every kind of `category`, default version and limits.
    pub fn for_category(category: Category) -> Self {
        Self::new(category, category.kinds(), DEFAULT_PYTHON_VERSION, DEFAULT_MAX_FINDINGS)
            .expect("a category's own kinds form a valid spec")
    }

    pub fn category(&self) -> Category {
        self.category
    }

    pub fn kinds(&self) -> &[PatternKind] {
        &self.kinds
    }

    pub fn python_version(&self) -> &str {
        &self.python_version
    }

    pub fn output_schema_version(&self) -> u32 {
        self.output_schema_version
    }

    pub fn max_findings(&self) -> usize {
        self.max_findings
    }

    pub fn with_python_version(mut self, version: impl Into<String>) -> Self {
        self.python_version = version.into();
        self
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("spec serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenderedPrompt {
    pub system_text: String,
    pub user_text: String,
    pub spec_fingerprint: String,
}

pub fn render(spec: &PromptSpec, block: &CodeBlock) -> RenderedPrompt {
    RenderedPrompt {
        system_text: build_system_prompt(spec),
        user_text: build_user_prompt(block),
        spec_fingerprint: spec.fingerprint(),
    }
}

fn block_header(index: usize, title: &str) -> String {
    format!("=== S{index}: {title} ===\n")
}

pub fn build_system_prompt(spec: &PromptSpec) -> String {
    let version = &spec.python_version;
    let category = spec.category.title();
    let mut out = String::new();

    out.push_str(&block_header(1, "SYSTEM IDENTITY AND CAPABILITIES"));
    out.push_str(&format!(
        "You are a code-optimization reviewer for Python {version} source code. \
         You read one code block at a time and identify loop-related defects.\n\n"
    ));

    out.push_str(&block_header(2, "CORE RESPONSIBILITIES"));
    out.push_str(&format!(
        "Review the code block for the category \"{category}\" only. Report an issue only if it is one of:\n"
    ));
    for kind in &spec.kinds {
        out.push_str(&format!("- {}: {}\n", kind.id(), kind.title()));
    }
    out.push_str("Ignore every other kind of issue.\n\n");

    out.push_str(&block_header(3, "CONSTRAINTS AND GUARDRAILS"));
    out.push_str(&format!(
        "- Apply {}: reason about Python semantics and idioms, not those of other languages.\n",
        SAFEGUARDS[0]
    ));
    out.push_str(&format!(
        "- Apply {}: cite only line numbers that are present in the given block and never invent variables, calls or constructs that do not appear in it.\n",
        SAFEGUARDS[1]
    ));
    out.push_str(&format!(
        "- Apply {}: respect Python {version}; do not report or suggest anything that depends on features unavailable in that version.\n",
        SAFEGUARDS[2]
    ));
    out.push_str(&format!(
        "- Apply {}: if none of the listed issues is present, answer exactly \"{NO_FINDINGS}\" instead of guessing.\n\n",
        SAFEGUARDS[3]
    ));

    out.push_str(&block_header(4, "TARGET DETECTION CATEGORY"));
    out.push_str(&format!("Category: {category}\n"));
    for kind in &spec.kinds {
        out.push_str(&format!("- {}: {}\n", kind.id(), detector_criteria(*kind).criterion));
    }
    out.push('\n');

    out.push_str(&block_header(5, "OUTPUT FORMAT"));
    out.push_str(&format!(
        "Write one JSON object per finding, each on its own line, with exactly the fields \
         \"line\" (integer source line number), \"kind\" (one identifier from the list above) and \
         \"explanation\" (one sentence).\n\
         Example: {{\"line\": 12, \"kind\": \"{example}\", \"explanation\": \"Why this line is a problem.\"}}\n\
         Report at most {max} findings. Do not add other text.\n\
         After the last finding write a line containing only {END_SENTINEL}.\n\
         If there is nothing to report, write {NO_FINDINGS} on one line and then {END_SENTINEL}.\n",
        example = spec.kinds[0].id(),
        max = spec.max_findings,
    ));
    out
}

/// A backtick fence longer than any backtick run inside `text`.
fn fence_for(text: &str) -> String {
    let mut longest = 0;
    let mut run = 0;
    for ch in text.chars() {
        if ch == '`' {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    "`".repeat((longest + 1).max(3))
}

pub fn build_user_prompt(block: &CodeBlock) -> String {
    let fence = fence_for(&block.text);
    format!(
        "Analyze lines {first}..{last} of sample {sample}. The first line of the block below is line {first}.\n\n\
         {fence}python\n{text}\n{fence}\n\n\
         Report the listed loop issues found in this block using the output format, then stop.\n",
        first = block.first_line,
        last = block.last_line(),
        sample = block.sample_id,
        text = block.text,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(text: &str, first_line: usize) -> CodeBlock {
        CodeBlock {
            sample_id: "s".into(),
            first_line,
            text: text.into(),
            line_count: text.split('\n').count(),
        }
    }

    #[test]
    fn five_blocks_in_order() {
        let text = build_system_prompt(&PromptSpec::for_category(Category::LoopControlLogic));
        let headers: Vec<&str> = text.lines().filter(|l| l.starts_with("=== S")).collect();
        assert_eq!(headers.len(), 5);
        for (i, h) in headers.iter().enumerate() {
            assert!(h.starts_with(&format!("=== S{}:", i + 1)));
        }
        assert!(text.contains("infinite"));
        assert!(!text.contains("hardcoded_secret"));
    }

    #[test]
    fn spec_validation() {
        assert_eq!(
            PromptSpec::new(Category::LoopControlLogic, [], "3.7", 5),
            Err(PromptError::EmptyKinds)
        );
        assert!(matches!(
            PromptSpec::new(Category::LoopControlLogic, [PatternKind::HardcodedSecret], "3.7", 5),
            Err(PromptError::KindOutsideCategory { .. })
        ));
        assert_eq!(
            PromptSpec::new(Category::LoopControlLogic, [PatternKind::OffByOne], "3.7", 0),
            Err(PromptError::ZeroMaxFindings)
        );
    }

    #[test]
    fn fingerprint_ignores_kind_order() {
        let a = PromptSpec::new(
            Category::ResourceEfficiency,
            [PatternKind::RangeLenAntipattern, PatternKind::InvariantRecompute],
            "3.9",
            20,
        )
        .unwrap();
        let b = PromptSpec::new(
            Category::ResourceEfficiency,
            [PatternKind::InvariantRecompute, PatternKind::RangeLenAntipattern],
            "3.9",
            20,
        )
        .unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert_eq!(build_system_prompt(&a), build_system_prompt(&b));
        assert_ne!(a.fingerprint(), a.clone().with_python_version("3.12").fingerprint());
    }

    #[test]
    fn user_prompt_declares_lines_and_fences_verbatim() {
        let text = build_user_prompt(&block("a = 1\nfor x in y:\n    pass", 3));
        assert!(text.contains("lines 3..5 of sample s"));
        assert!(text.contains("```python\na = 1\nfor x in y:\n    pass\n```"));
    }

    #[test]
    fn fence_is_lengthened_past_embedded_backticks() {
        let text = build_user_prompt(&block("s = \"```\"\nfor c in s:\n    pass", 1));
        assert!(text.contains("````python\n"));
        assert!(text.contains("\n````\n"));
    }

    #[test]
    fn degenerate_block_still_has_instruction() {
        let text = build_user_prompt(&block("for x in y: pass", 7));
        assert!(text.contains("lines 7..7"));
        assert!(text.contains("output format"));
    }
}
