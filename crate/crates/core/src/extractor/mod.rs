//! Parsing Python sources and extracting loop regions and prompt blocks.

pub mod ast;
mod lower;

use serde::{Deserialize, Serialize};

use crate::corpus::{source_lines, CodeSample};
use ast::{walk_stmts, Comment, ComprehensionKind, Expr, ExprKind, Stmt, StmtKind};

pub const DEFAULT_MAX_SOURCE_BYTES: usize = 1 << 20;
pub const DEFAULT_CONTEXT_LINES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub max_source_bytes: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            max_source_bytes: DEFAULT_MAX_SOURCE_BYTES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{sample_id}:{line}:{column}: syntax error: {message}")]
    Syntax {
        sample_id: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{sample_id}: source is {size} bytes, over the {limit} byte limit")]
    TooLarge {
        sample_id: String,
        size: usize,
        limit: usize,
    },
}

/// Parsed form of one sample: the owned syntax tree plus comments.
#[derive(Debug, Clone)]
pub struct ParsedModule {
    pub sample_id: String,
    pub source: String,
    pub min_python_version: String,
    pub body: Vec<Stmt>,
    pub comments: Vec<Comment>,
    line_count: usize,
}

impl ParsedModule {
    pub fn line_count(&self) -> usize {
        self.line_count
    }

    /// Comprehensions and generator expressions, which are not loop regions.
    pub fn comprehensions(&self) -> Vec<ComprehensionSite> {
        let mut out = Vec::new();
        collect_comprehensions(&self.body, 0, &mut out);
        out.sort_by_key(|c| c.line);
        out
    }

    /// `# loopscan: ...` directives found in comments.
    pub fn pragmas(&self) -> Pragmas {
        let mut pragmas = Pragmas::default();
        for comment in &self.comments {
            let Some(rest) = comment.text.strip_prefix("loopscan:") else {
                continue;
            };
            let rest = rest.trim();
            if rest == "exception-prone" {
                pragmas.exception_prone = true;
            } else if let Some(names) = rest.strip_prefix("user-controlled") {
                pragmas.user_controlled.extend(
                    names
                        .split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|n| !n.is_empty())
                        .map(str::to_string),
                );
            }
        }
        pragmas
    }
}

/// Per-sample analysis hints written as comments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pragmas {
    /// `# loopscan: exception-prone`
    pub exception_prone: bool,
    /// `# loopscan: user-controlled name[, name]`
    pub user_controlled: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComprehensionSite {
    pub line: usize,
    pub kind: ComprehensionKind,
    /// Number of enclosing `for`/`while` statements.
    pub loop_depth: usize,
}

fn collect_comprehensions(stmts: &[Stmt], depth: usize, out: &mut Vec<ComprehensionSite>) {
    for stmt in stmts {
        for e in stmt.exprs() {
            e.walk(&mut |x| {
                if let ExprKind::Comprehension(c) = &x.kind {
                    out.push(ComprehensionSite {
                        line: x.line,
                        kind: c.kind,
                        loop_depth: depth,
                    });
                }
            });
        }
        let inner = depth + usize::from(stmt.is_loop());
        for body in stmt.bodies() {
            collect_comprehensions(body, inner, out);
        }
    }
}

/// Parses a sample under the default options.
pub fn parse_source(sample: &CodeSample) -> Result<ParsedModule, ParseError> {
    parse_source_with(sample, ParseOptions::default())
}

pub fn parse_source_with(
    sample: &CodeSample,
    options: ParseOptions,
) -> Result<ParsedModule, ParseError> {
    if sample.source.len() > options.max_source_bytes {
        return Err(ParseError::TooLarge {
            sample_id: sample.sample_id.clone(),
            size: sample.source.len(),
            limit: options.max_source_bytes,
        });
    }
    let mut parser = tree_sitter::Parser::new();
    parser
        .set_language(&tree_sitter_python::LANGUAGE.into())
        .expect("bundled python grammar is compatible");
    let tree = parser
        .parse(&sample.source, None)
        .expect("parser has a language and no timeout");
    let root = tree.root_node();
    if let Some((node, message)) = first_error(root) {
        let pos = node.start_position();
        return Err(ParseError::Syntax {
            sample_id: sample.sample_id.clone(),
            line: pos.row + 1,
            column: pos.column + 1,
            message,
        });
    }
    let mut lowerer = lower::Lowerer::new(&sample.source);
    lowerer.collect_comments(root);
    let body = lowerer.block(root);
    Ok(ParsedModule {
        sample_id: sample.sample_id.clone(),
        source: sample.source.clone(),
        min_python_version: sample.min_python_version.clone(),
        body,
        comments: lowerer.comments,
        line_count: sample.line_count(),
    })
}

// The grammar still accepts Python 2 print/exec statements; those are
// syntax errors for a Python 3 interpreter.
fn first_error(root: tree_sitter::Node) -> Option<(tree_sitter::Node, String)> {
    let mut stack = vec![root];
    let mut found: Option<(tree_sitter::Node, String)> = None;
    while let Some(node) = stack.pop() {
        let problem = if node.is_missing() {
            Some(format!("missing `{}`", node.kind()))
        } else if node.is_error() {
            Some("unexpected syntax".to_string())
        } else if matches!(node.kind(), "print_statement" | "exec_statement") {
            Some(format!("`{}` is not valid Python 3", node.kind()))
        } else {
            None
        };
        if let Some(message) = problem {
            let earlier = found
                .as_ref()
                .is_none_or(|(f, _)| node.start_byte() < f.start_byte());
            if earlier {
                found = Some((node, message));
            }
            continue;
        }
        if node.has_error() || node.child_count() > 0 {
            let mut cursor = node.walk();
            stack.extend(node.children(&mut cursor));
        }
    }
    found
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopKind {
    ForLoop,
    WhileLoop,
}

/// One `for` or `while` statement.
///
/// `body_end` is the last line of the whole statement, including an
/// `else` clause when present.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LoopRegion {
    pub sample_id: String,
    pub loop_kind: LoopKind,
    pub header_line: usize,
    pub body_start: usize,
    pub body_end: usize,
    pub nesting_depth: usize,
    pub has_else_clause: bool,
}

impl LoopRegion {
    pub fn contains_line(&self, line: usize) -> bool {
        (self.header_line..=self.body_end).contains(&line)
    }

    pub fn contains(&self, other: &LoopRegion) -> bool {
        self.header_line <= other.header_line && other.body_end <= self.body_end && self != other
    }
}

/// Every loop in source order with its nesting depth.
pub fn extract_loops(module: &ParsedModule) -> Vec<LoopRegion> {
    let mut out = Vec::new();
    collect_loops(&module.sample_id, &module.body, 0, &mut out);
    out
}

fn collect_loops(sample_id: &str, stmts: &[Stmt], depth: usize, out: &mut Vec<LoopRegion>) {
    for stmt in stmts {
        let (kind, body, has_else) = match &stmt.kind {
            StmtKind::For(f) => (Some(LoopKind::ForLoop), &f.body, f.orelse.is_some()),
            StmtKind::While(w) => (Some(LoopKind::WhileLoop), &w.body, w.orelse.is_some()),
            _ => (None, &Vec::new(), false),
        };
        if let Some(loop_kind) = kind {
            out.push(LoopRegion {
                sample_id: sample_id.to_string(),
                loop_kind,
                header_line: stmt.line,
                body_start: body.first().map_or(stmt.line, |s| s.line),
                body_end: stmt.end_line,
                nesting_depth: depth,
                has_else_clause: has_else,
            });
        }
        let inner = depth + usize::from(kind.is_some());
        for b in stmt.bodies() {
            collect_loops(sample_id, b, inner, out);
        }
    }
}

/// Finds the loop statement a region was extracted from.
pub fn loop_stmt_for<'a>(module: &'a ParsedModule, region: &LoopRegion) -> Option<&'a Stmt> {
    let mut found = None;
    walk_stmts(&module.body, &mut |s| {
        if found.is_none() && s.is_loop() && s.line == region.header_line {
            found = Some(s);
        }
    });
    found
}

/// A contiguous excerpt of a sample's source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeBlock {
    pub sample_id: String,
    pub first_line: usize,
    /// Lines joined with `\n`, without a trailing newline.
    pub text: String,
    pub line_count: usize,
}

impl CodeBlock {
    pub fn last_line(&self) -> usize {
        self.first_line + self.line_count - 1
    }

    pub fn contains_line(&self, line: usize) -> bool {
        (self.first_line..=self.last_line()).contains(&line)
    }
}

fn block_from_lines(sample: &CodeSample, first: usize, last: usize) -> CodeBlock {
    let lines = source_lines(&sample.source);
    let last = last.min(lines.len()).max(first);
    let text = lines
        .get(first - 1..last)
        .map(|slice| slice.join("\n"))
        .unwrap_or_default();
    CodeBlock {
        sample_id: sample.sample_id.clone(),
        first_line: first,
        line_count: last - first + 1,
        text,
    }
}

/// The region's lines with up to `context_lines` of surrounding source,
/// clamped to the file.
pub fn slice_code_block(sample: &CodeSample, region: &LoopRegion, context_lines: usize) -> CodeBlock {
    let first = region.header_line.saturating_sub(context_lines).max(1);
    let last = (region.body_end + context_lines).min(sample.line_count().max(1));
    block_from_lines(sample, first, last)
}

/// The whole sample as a single block.
pub fn whole_file_block(sample: &CodeSample) -> CodeBlock {
    block_from_lines(sample, 1, sample.line_count().max(1))
}

/// Names bound by an assignment target (`a`, `a, b`, `[a, *b]`).
pub fn target_names(target: &Expr) -> Vec<&str> {
    let mut out = Vec::new();
    fn go<'a>(e: &'a Expr, out: &mut Vec<&'a str>) {
        match &e.kind {
            ExprKind::Name(n) => out.push(n),
            ExprKind::Tuple(items) | ExprKind::List(items) => {
                items.iter().for_each(|i| go(i, out))
            }
            ExprKind::Starred(inner) => go(inner, out),
            _ => {}
        }
    }
    go(target, &mut out);
    out
}
