//! Turns raw model output into validated findings.
//!
//! Every JSON object record in the output ends up either as a finding or
//! as a rejection. Surrounding prose is ignored.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::PatternKind;
use crate::detectors::{Finding, Origin};
use crate::extractor::CodeBlock;
use crate::prompt::{PromptSpec, END_SENTINEL, NO_FINDINGS};

/// Longest `raw_fragment` kept on a rejection, in characters.
pub const FRAGMENT_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RejectionReason {
    LineOutOfRange,
    UnknownPatternKind,
    CategoryMismatch,
    UnparseableRecord,
    DuplicateFinding,
    ExceedsMaxFindings,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub reason: RejectionReason,
    pub raw_fragment: String,
    pub sample_id: String,
}

impl Rejection {
    fn new(reason: RejectionReason, fragment: &str, sample_id: &str) -> Self {
        Rejection {
            reason,
            raw_fragment: fragment.chars().take(FRAGMENT_LIMIT).collect(),
            sample_id: sample_id.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedResponse {
    /// Accepted findings in output order.
    pub findings: Vec<Finding>,
    pub rejections: Vec<Rejection>,
    pub sentinel_seen: bool,
    pub declared_no_findings: bool,
}

/// Lowercases and maps `-` and spaces to `_`, so `Off-By-One` reads as `off_by_one`.
fn normalize_kind(text: &str) -> String {
    text.trim()
        .chars()
        .map(|c| match c {
            '-' | ' ' => '_',
            c => c.to_ascii_lowercase(),
        })
        .collect()
}

fn line_number(value: &Value) -> Option<usize> {
    match value {
        Value::Number(n) => n.as_u64().and_then(|v| usize::try_from(v).ok()),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

/// Strips a list bullet (`-` or `3.` style) that small models put before records.
fn strip_bullet(line: &str) -> &str {
    let t = line.trim_start();
    if let Some(rest) = t.strip_prefix("- ").or_else(|| t.strip_prefix("* ")) {
        return rest.trim_start();
    }
    let digits = t.bytes().take_while(u8::is_ascii_digit).count();
    if digits > 0 {
        if let Some(rest) = t[digits..].strip_prefix(". ").or_else(|| t[digits..].strip_prefix(") ")) {
            return rest.trim_start();
        }
    }
    t
}

struct Validator<'a> {
    block: &'a CodeBlock,
    spec: &'a PromptSpec,
    origin: Origin,
    seen: HashSet<(usize, PatternKind)>,
    out: ParsedResponse,
}

impl Validator<'_> {
    fn reject(&mut self, reason: RejectionReason, fragment: &str) {
        self.out
            .rejections
            .push(Rejection::new(reason, fragment, &self.block.sample_id));
    }

    fn record(&mut self, value: &Value, fragment: &str) {
        use RejectionReason::*;
        let Some(obj) = value.as_object() else {
            return self.reject(UnparseableRecord, fragment);
        };
        let line = obj.get("line").and_then(line_number);
        let kind_text = obj.get("kind").and_then(Value::as_str);
        let (Some(line), Some(kind_text)) = (line, kind_text) else {
            return self.reject(UnparseableRecord, fragment);
        };
        let explanation = match obj.get("explanation") {
            None | Some(Value::Null) => String::new(),
            Some(Value::String(s)) => s.clone(),
            Some(_) => return self.reject(UnparseableRecord, fragment),
        };
        let Ok(kind) = normalize_kind(kind_text).parse::<PatternKind>() else {
            return self.reject(UnknownPatternKind, fragment);
        };
        if kind.category() != self.spec.category() {
            return self.reject(CategoryMismatch, fragment);
        }
        if !self.spec.kinds().contains(&kind) {
            return self.reject(UnknownPatternKind, fragment);
        }
        if !self.block.contains_line(line) {
            return self.reject(LineOutOfRange, fragment);
        }
        if !self.seen.insert((line, kind)) {
            return self.reject(DuplicateFinding, fragment);
        }
        if self.out.findings.len() >= self.spec.max_findings() {
            return self.reject(ExceedsMaxFindings, fragment);
        }
        self.out.findings.push(Finding {
            sample_id: self.block.sample_id.clone(),
            line,
            category: kind.category(),
            kind,
            message: explanation,
            origin: self.origin.clone(),
            confidence: 1.0,
        });
    }
}

/// Parses the completion for one block and one prompt spec.
///
/// A record starts on a line whose first non-bullet character is `{` and may
/// span several lines. Output after the end sentinel is ignored.
pub fn parse_findings(raw: &str, block: &CodeBlock, spec: &PromptSpec, model_name: &str) -> ParsedResponse {
    let mut v = Validator {
        block,
        spec,
        origin: Origin::Model(model_name.to_string()),
        seen: HashSet::new(),
        out: ParsedResponse::default(),
    };

    let mut pos = 0;
    while pos < raw.len() {
        let line_end = raw[pos..].find('\n').map_or(raw.len(), |i| pos + i);
        let line = &raw[pos..line_end];
        let next = (line_end + 1).min(raw.len());
        let body = strip_bullet(line);
        let trimmed = line.trim();

        if trimmed == END_SENTINEL {
            v.out.sentinel_seen = true;
            break;
        }
        if trimmed.trim_matches(|c: char| c == '"' || c == '.' || c == '*').eq_ignore_ascii_case(NO_FINDINGS) {
            v.out.declared_no_findings = true;
            pos = next;
            continue;
        }
        if !body.starts_with('{') {
            pos = next;
            continue;
        }

        let start = line_end - body.len();
        let mut stream = serde_json::Deserializer::from_str(&raw[start..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(value)) => {
                let end = start + stream.byte_offset();
                v.record(&value, raw[start..end].trim());
                // Resume at the line after the record.
                pos = raw[end..].find('\n').map_or(raw.len(), |i| end + i + 1);
            }
            _ => {
                v.reject(RejectionReason::UnparseableRecord, body.trim_end());
                pos = next;
            }
        }
    }

    if !v.out.sentinel_seen {
        log::warn!(
            "completion for {} lines {}..{} has no {END_SENTINEL} line",
            block.sample_id,
            block.first_line,
            block.last_line()
        );
    }
    v.out
}
