//! Code samples, ground-truth annotations and the corpus file format.

mod seed;
mod taxonomy;

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use seed::generate_seed_corpus;
pub use taxonomy::{catalog, CatalogEntry, Category, PatternKind, UnknownIdentifier};

pub const CORPUS_FORMAT_VERSION: u32 = 1;

/// One validated baseline issue inside a sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthAnnotation {
    /// Owning sample. Not stored in the corpus file; filled in on load.
    #[serde(skip)]
    pub sample_id: String,
    pub line_start: usize,
    pub line_end: usize,
    pub category: Category,
    pub kind: PatternKind,
    pub note: String,
}

fn default_python_version() -> String {
    "3.7".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSample {
    pub sample_id: String,
    #[serde(default = "default_python_version")]
    pub min_python_version: String,
    pub source: String,
    #[serde(default)]
    pub annotations: Vec<GroundTruthAnnotation>,
}

impl CodeSample {
    pub fn new(sample_id: impl Into<String>, source: impl Into<String>) -> Self {
        CodeSample {
            sample_id: sample_id.into(),
            min_python_version: default_python_version(),
            source: source.into(),
            annotations: Vec::new(),
        }
    }

    pub fn line_count(&self) -> usize {
        source_lines(&self.source).len()
    }
}

/// Splits source into lines the way editors number them: a trailing newline
/// does not start an extra line.
pub fn source_lines(source: &str) -> Vec<&str> {
    source.split_terminator('\n').collect()
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read corpus file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write corpus file {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed corpus document: {0}")]
    Malformed(String),
    #[error("malformed record {index} (field `{field}`): {message}")]
    MalformedRecord {
        index: usize,
        field: String,
        message: String,
    },
    #[error("unsupported corpus version {found} (expected {CORPUS_FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("duplicate sample_id `{0}`")]
    DuplicateSample(String),
    #[error("sample `{sample_id}`: annotation {index} spans lines {line_start}-{line_end} but the source has {line_count} lines")]
    SpanOutOfRange {
        sample_id: String,
        index: usize,
        line_start: usize,
        line_end: usize,
        line_count: usize,
    },
    #[error("sample `{sample_id}`: annotation {index} has kind `{kind}` which belongs to `{expected}`, not `{found}`")]
    CategoryMismatch {
        sample_id: String,
        index: usize,
        kind: PatternKind,
        expected: Category,
        found: Category,
    },
}

#[derive(Serialize)]
struct CorpusDocRef<'a> {
    version: u32,
    samples: &'a [CodeSample],
}

/// Checks every sample and annotation invariant that does not need a parser.
///
/// Syntax validity is left to the extractor so a scan can report a broken
/// sample and keep going with the rest.
pub fn validate_samples(samples: &[CodeSample]) -> Result<(), CorpusError> {
    let mut ids = HashSet::new();
    for sample in samples {
        if !ids.insert(sample.sample_id.as_str()) {
            return Err(CorpusError::DuplicateSample(sample.sample_id.clone()));
        }
        let line_count = sample.line_count();
        for (index, ann) in sample.annotations.iter().enumerate() {
            if ann.line_start == 0 || ann.line_end < ann.line_start || ann.line_end > line_count {
                return Err(CorpusError::SpanOutOfRange {
                    sample_id: sample.sample_id.clone(),
                    index,
                    line_start: ann.line_start,
                    line_end: ann.line_end,
                    line_count,
                });
            }
            if ann.kind.category() != ann.category {
                return Err(CorpusError::CategoryMismatch {
                    sample_id: sample.sample_id.clone(),
                    index,
                    kind: ann.kind,
                    expected: ann.kind.category(),
                    found: ann.category,
                });
            }
        }
    }
    Ok(())
}

/// Parses a corpus document from a string.
pub fn parse_corpus(text: &str) -> Result<Vec<CodeSample>, CorpusError> {
    let doc: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CorpusError::Malformed(e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| CorpusError::Malformed("top level must be an object".into()))?;
    for key in obj.keys() {
        if key != "version" && key != "samples" {
            return Err(CorpusError::Malformed(format!("unknown field `{key}`")));
        }
    }
    let version = obj
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| CorpusError::Malformed("missing integer field `version`".into()))?;
    if version != u64::from(CORPUS_FORMAT_VERSION) {
        return Err(CorpusError::Version {
            found: version as u32,
        });
    }
    let records = obj
        .get("samples")
        .and_then(|v| v.as_array())
        .ok_or_else(|| CorpusError::Malformed("missing array field `samples`".into()))?;

    let mut samples = Vec::with_capacity(records.len());
    for (index, record) in records.iter().enumerate() {
        let mut sample: CodeSample =
            serde_json::from_value(record.clone()).map_err(|e| CorpusError::MalformedRecord {
                index,
                field: offending_field(&e.to_string()),
                message: e.to_string(),
            })?;
        for ann in &mut sample.annotations {
            ann.sample_id = sample.sample_id.clone();
        }
        samples.push(sample);
    }
    validate_samples(&samples)?;
    Ok(samples)
}

// serde_json messages name the field in backticks ("missing field `source`").
fn offending_field(message: &str) -> String {
    message
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "<record>".to_string())
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<CodeSample>, CorpusError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_corpus(&text)
}

pub fn corpus_to_string(samples: &[CodeSample]) -> String {
    let doc = CorpusDocRef {
        version: CORPUS_FORMAT_VERSION,
        samples,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("corpus serializes");
    text.push('\n');
    text
}

pub fn save_corpus(samples: &[CodeSample], path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    fs::write(path, corpus_to_string(samples)).map_err(|source| CorpusError::Write {
        path: path.to_path_buf(),
        source,
    })
}
