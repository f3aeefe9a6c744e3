//! Lowering from the tree-sitter concrete syntax tree into [`super::ast`].

use tree_sitter::Node;

use super::ast::*;

pub(crate) struct Lowerer<'s> {
    src: &'s [u8],
    pub comments: Vec<Comment>,
}

fn line_of(node: Node) -> usize {
    node.start_position().row + 1
}

/// Last line holding code, so trailing comments inside a block do not
/// stretch the statement.
fn code_end_line(node: Node) -> usize {
    if node.child_count() == 0 {
        return node.end_position().row + 1;
    }
    let mut cursor = node.walk();
    node.children(&mut cursor)
        .filter(|c| c.kind() != "comment")
        .map(code_end_line)
        .max()
        .unwrap_or_else(|| line_of(node))
}

fn named_children(node: Node) -> Vec<Node> {
    let mut cursor = node.walk();
    node.named_children(&mut cursor)
        .filter(|c| c.kind() != "comment")
        .collect()
}

impl<'s> Lowerer<'s> {
    pub fn new(src: &'s str) -> Self {
        Lowerer {
            src: src.as_bytes(),
            comments: Vec::new(),
        }
    }

    fn text(&self, node: Node) -> String {
        node.utf8_text(self.src).unwrap_or_default().to_string()
    }

    pub fn collect_comments(&mut self, root: Node) {
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            if node.kind() == "comment" {
                let text = self.text(node);
                self.comments.push(Comment {
                    line: line_of(node),
                    text: text.trim_start_matches('#').trim().to_string(),
                });
                continue;
            }
            let mut cursor = node.walk();
            stack.extend(node.children(&mut cursor));
        }
        self.comments.sort_by_key(|c| c.line);
    }

    pub fn block(&self, node: Node) -> Vec<Stmt> {
        let mut out = Vec::new();
        for child in named_children(node) {
            self.push_stmt(child, &mut out);
        }
        out
    }

    fn opt_block(&self, node: Option<Node>) -> Vec<Stmt> {
        node.map(|n| self.block(n)).unwrap_or_default()
    }

    fn push_stmt(&self, node: Node, out: &mut Vec<Stmt>) {
        let line = line_of(node);
        let end_line = code_end_line(node);
        let mk = |kind| Stmt {
            line,
            end_line,
            kind,
        };
        let kind = match node.kind() {
            "expression_statement" => {
                let children = named_children(node);
                if children.len() == 1 {
                    return out.push(self.simple_statement(children[0], line, end_line));
                }
                StmtKind::Expr(Expr {
                    line,
                    kind: ExprKind::Tuple(children.into_iter().map(|c| self.expr(c)).collect()),
                })
            }
            "for_statement" => {
                let is_async = node.child(0).is_some_and(|c| c.kind() == "async");
                StmtKind::For(ForStmt {
                    target: self.field_expr(node, "left"),
                    iter: self.field_expr(node, "right"),
                    body: self.opt_block(node.child_by_field_name("body")),
                    orelse: node.child_by_field_name("alternative").map(|e| self.else_block(e)),
                    is_async,
                })
            }
            "while_statement" => StmtKind::While(WhileStmt {
                test: self.field_expr(node, "condition"),
                body: self.opt_block(node.child_by_field_name("body")),
                orelse: node.child_by_field_name("alternative").map(|e| self.else_block(e)),
            }),
            "if_statement" => {
                let mut cursor = node.walk();
                let alternatives: Vec<Node> =
                    node.children_by_field_name("alternative", &mut cursor).collect();
                StmtKind::If(IfStmt {
                    test: self.field_expr(node, "condition"),
                    body: self.opt_block(node.child_by_field_name("consequence")),
                    orelse: self.if_chain(&alternatives),
                })
            }
            "with_statement" => {
                let mut items = Vec::new();
                for child in named_children(node) {
                    if child.kind() == "with_clause" {
                        for item in named_children(child) {
                            if item.kind() == "with_item" {
                                items.push(self.with_item(item));
                            }
                        }
                    }
                }
                StmtKind::With(WithStmt {
                    items,
                    body: self.opt_block(node.child_by_field_name("body")),
                })
            }
            "try_statement" => {
                let mut handlers = Vec::new();
                let mut orelse = None;
                let mut finalbody = None;
                for child in named_children(node) {
                    match child.kind() {
                        "except_clause" | "except_group_clause" => handlers.push(Block {
                            line: line_of(child),
                            body: named_children(child)
                                .into_iter()
                                .filter(|c| c.kind() == "block")
                                .flat_map(|b| self.block(b))
                                .collect(),
                        }),
                        "else_clause" => orelse = Some(self.else_block(child)),
                        "finally_clause" => {
                            finalbody = Some(Block {
                                line: line_of(child),
                                body: named_children(child)
                                    .into_iter()
                                    .filter(|c| c.kind() == "block")
                                    .flat_map(|b| self.block(b))
                                    .collect(),
                            })
                        }
                        _ => {}
                    }
                }
                StmtKind::Try(TryStmt {
                    body: self.opt_block(node.child_by_field_name("body")),
                    handlers,
                    orelse,
                    finalbody,
                })
            }
            "function_definition" => StmtKind::FunctionDef {
                name: self.field_text(node, "name"),
                params: node
                    .child_by_field_name("parameters")
                    .map(|p| self.params(p))
                    .unwrap_or_default(),
                body: self.opt_block(node.child_by_field_name("body")),
            },
            "class_definition" => StmtKind::ClassDef {
                name: self.field_text(node, "name"),
                body: self.opt_block(node.child_by_field_name("body")),
            },
            "decorated_definition" => {
                if let Some(def) = node.child_by_field_name("definition") {
                    let mut inner = Vec::new();
                    self.push_stmt(def, &mut inner);
                    out.extend(inner);
                }
                return;
            }
            "return_statement" => {
                StmtKind::Return(named_children(node).first().map(|c| self.expr(*c)))
            }
            "raise_statement" => {
                StmtKind::Raise(named_children(node).first().map(|c| self.expr(*c)))
            }
            "break_statement" => StmtKind::Break,
            "continue_statement" => StmtKind::Continue,
            "pass_statement" => StmtKind::Pass,
            "delete_statement" => StmtKind::Delete(
                named_children(node)
                    .into_iter()
                    .flat_map(|c| self.flatten_list(c))
                    .collect(),
            ),
            "global_statement" | "nonlocal_statement" => StmtKind::Global(
                named_children(node)
                    .into_iter()
                    .map(|c| self.text(c))
                    .collect(),
            ),
            "import_statement" | "import_from_statement" | "future_import_statement" => {
                StmtKind::Other {
                    exprs: vec![],
                    bodies: vec![],
                }
            }
            _ => {
                let mut exprs = Vec::new();
                let mut bodies = Vec::new();
                self.collect_other(node, &mut exprs, &mut bodies);
                StmtKind::Other { exprs, bodies }
            }
        };
        out.push(mk(kind));
    }

    // Generic fallback: blocks become bodies, expression-looking children
    // become expressions.
    fn collect_other(&self, node: Node, exprs: &mut Vec<Expr>, bodies: &mut Vec<Vec<Stmt>>) {
        for child in named_children(node) {
            match child.kind() {
                "block" => bodies.push(self.block(child)),
                "case_clause" | "case_pattern" | "match_statement" => {
                    self.collect_other(child, exprs, bodies)
                }
                k if k.ends_with("_statement") => {
                    let mut inner = Vec::new();
                    self.push_stmt(child, &mut inner);
                    bodies.push(inner);
                }
                _ => exprs.push(self.expr(child)),
            }
        }
    }

    fn simple_statement(&self, node: Node, line: usize, end_line: usize) -> Stmt {
        let kind = match node.kind() {
            "assignment" => {
                // `a = b = value` nests assignments on the right.
                let mut targets = Vec::new();
                let mut current = node;
                let value = loop {
                    if let Some(left) = current.child_by_field_name("left") {
                        targets.push(self.expr(left));
                    }
                    match current.child_by_field_name("right") {
                        Some(right) if right.kind() == "assignment" => current = right,
                        Some(right) => break Some(self.expr(right)),
                        None => break None,
                    }
                };
                StmtKind::Assign { targets, value }
            }
            "augmented_assignment" => StmtKind::AugAssign {
                target: self.field_expr(node, "left"),
                op: node
                    .child_by_field_name("operator")
                    .map(|o| self.text(o))
                    .unwrap_or_default(),
                value: self.field_expr(node, "right"),
            },
            _ => StmtKind::Expr(self.expr(node)),
        };
        Stmt {
            line,
            end_line,
            kind,
        }
    }

    fn else_block(&self, node: Node) -> Block {
        Block {
            line: line_of(node),
            body: self.opt_block(node.child_by_field_name("body")),
        }
    }

    fn if_chain(&self, alternatives: &[Node]) -> Option<Block> {
        let (first, rest) = alternatives.split_first()?;
        match first.kind() {
            "elif_clause" => {
                let line = line_of(*first);
                let end_line = alternatives
                    .iter()
                    .map(|n| code_end_line(*n))
                    .max()
                    .unwrap_or(line);
                let stmt = Stmt {
                    line,
                    end_line,
                    kind: StmtKind::If(IfStmt {
                        test: self.field_expr(*first, "condition"),
                        body: self.opt_block(first.child_by_field_name("consequence")),
                        orelse: self.if_chain(rest),
                    }),
                };
                Some(Block {
                    line,
                    body: vec![stmt],
                })
            }
            _ => Some(self.else_block(*first)),
        }
    }

    fn with_item(&self, item: Node) -> WithItem {
        let value = item.child_by_field_name("value").or_else(|| item.named_child(0));
        match value {
            Some(v) if v.kind() == "as_pattern" => {
                let parts = named_children(v);
                let context = parts
                    .first()
                    .map(|c| self.expr(*c))
                    .unwrap_or_else(|| self.other(v));
                let alias = parts
                    .iter()
                    .find(|c| c.kind() == "as_pattern_target")
                    .and_then(|t| named_children(*t).first().map(|c| self.expr(*c)));
                WithItem { context, alias }
            }
            Some(v) => WithItem {
                context: self.expr(v),
                alias: None,
            },
            None => WithItem {
                context: self.other(item),
                alias: None,
            },
        }
    }

    fn params(&self, node: Node) -> Vec<String> {
        named_children(node)
            .into_iter()
            .filter_map(|p| match p.kind() {
                "identifier" => Some(self.text(p)),
                _ => p
                    .child_by_field_name("name")
                    .or_else(|| named_children(p).into_iter().find(|c| c.kind() == "identifier"))
                    .map(|n| self.text(n)),
            })
            .collect()
    }

    fn field_text(&self, node: Node, field: &str) -> String {
        node.child_by_field_name(field)
            .map(|n| self.text(n))
            .unwrap_or_default()
    }

    fn field_expr(&self, node: Node, field: &str) -> Expr {
        match node.child_by_field_name(field) {
            Some(child) => self.expr(child),
            None => self.other(node),
        }
    }

    fn other(&self, node: Node) -> Expr {
        Expr {
            line: line_of(node),
            kind: ExprKind::Other(vec![]),
        }
    }

    fn flatten_list(&self, node: Node) -> Vec<Expr> {
        match node.kind() {
            "expression_list" => named_children(node).into_iter().map(|c| self.expr(c)).collect(),
            _ => vec![self.expr(node)],
        }
    }

    fn boxed(&self, node: Option<Node>, parent: Node) -> Box<Expr> {
        Box::new(match node {
            Some(n) => self.expr(n),
            None => self.other(parent),
        })
    }

    pub fn expr(&self, node: Node) -> Expr {
        let line = line_of(node);
        let kind = match node.kind() {
            "identifier" | "keyword_identifier" => ExprKind::Name(self.text(node)),
            "integer" | "float" => ExprKind::Num(self.text(node)),
            "true" | "false" | "none" | "ellipsis" => ExprKind::Const(self.text(node)),
            "string" => ExprKind::Str(self.string(node)),
            "concatenated_string" => {
                let mut merged = StrLit {
                    value: String::new(),
                    formatted: false,
                    interpolations: vec![],
                };
                for part in named_children(node) {
                    if part.kind() == "string" {
                        let s = self.string(part);
                        merged.value.push_str(&s.value);
                        merged.formatted |= s.formatted;
                        merged.interpolations.extend(s.interpolations);
                    }
                }
                ExprKind::Str(merged)
            }
            "parenthesized_expression" => {
                return named_children(node)
                    .first()
                    .map(|c| self.expr(*c))
                    .unwrap_or_else(|| self.other(node))
            }
            "call" => {
                let func = self.boxed(node.child_by_field_name("function"), node);
                let mut args = Vec::new();
                let mut keywords = Vec::new();
                if let Some(arguments) = node.child_by_field_name("arguments") {
                    if arguments.kind() == "generator_expression" {
                        args.push(self.expr(arguments));
                    } else {
                        for arg in named_children(arguments) {
                            match arg.kind() {
                                "keyword_argument" => keywords.push(Keyword {
                                    name: arg.child_by_field_name("name").map(|n| self.text(n)),
                                    value: self.field_expr(arg, "value"),
                                }),
                                "dictionary_splat" => keywords.push(Keyword {
                                    name: None,
                                    value: named_children(arg)
                                        .first()
                                        .map(|c| self.expr(*c))
                                        .unwrap_or_else(|| self.other(arg)),
                                }),
                                _ => args.push(self.expr(arg)),
                            }
                        }
                    }
                }
                ExprKind::Call {
                    func,
                    args,
                    keywords,
                }
            }
            "attribute" => ExprKind::Attribute {
                value: self.boxed(node.child_by_field_name("object"), node),
                attr: self.field_text(node, "attribute"),
            },
            "subscript" => {
                let mut cursor = node.walk();
                let subs: Vec<Node> =
                    node.children_by_field_name("subscript", &mut cursor).collect();
                let index = if subs.len() == 1 {
                    self.expr(subs[0])
                } else {
                    Expr {
                        line,
                        kind: ExprKind::Tuple(subs.iter().map(|s| self.expr(*s)).collect()),
                    }
                };
                ExprKind::Subscript {
                    value: self.boxed(node.child_by_field_name("value"), node),
                    index: Box::new(index),
                }
            }
            "slice" => {
                let mut parts: [Option<Box<Expr>>; 3] = [None, None, None];
                let mut slot = 0;
                let mut cursor = node.walk();
                for child in node.children(&mut cursor) {
                    if child.kind() == ":" {
                        slot += 1;
                    } else if child.is_named() && child.kind() != "comment" && slot < 3 {
                        parts[slot] = Some(Box::new(self.expr(child)));
                    }
                }
                let [lower, upper, step] = parts;
                ExprKind::Slice { lower, upper, step }
            }
            "binary_operator" => ExprKind::BinOp {
                left: self.boxed(node.child_by_field_name("left"), node),
                op: self.field_text(node, "operator"),
                right: self.boxed(node.child_by_field_name("right"), node),
            },
            "unary_operator" => ExprKind::UnaryOp {
                op: self.field_text(node, "operator"),
                operand: self.boxed(node.child_by_field_name("argument"), node),
            },
            "not_operator" => ExprKind::UnaryOp {
                op: "not".to_string(),
                operand: self.boxed(node.child_by_field_name("argument"), node),
            },
            "boolean_operator" => {
                let op = self.field_text(node, "operator");
                let mut values = Vec::new();
                for side in ["left", "right"] {
                    let e = self.field_expr(node, side);
                    // Flatten `a and b and c`.
                    match e.kind {
                        ExprKind::BoolOp {
                            op: inner,
                            values: inner_values,
                        } if inner == op => values.extend(inner_values),
                        kind => values.push(Expr { line: e.line, kind }),
                    }
                }
                ExprKind::BoolOp { op, values }
            }
            "comparison_operator" => {
                let mut cursor = node.walk();
                let ops: Vec<String> = node
                    .children_by_field_name("operators", &mut cursor)
                    .map(|o| {
                        self.text(o)
                            .split_whitespace()
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect();
                let operands: Vec<Expr> = named_children(node)
                    .into_iter()
                    .filter(|c| !matches!(c.kind(), "not in" | "is not"))
                    .map(|c| self.expr(c))
                    .collect();
                let mut operands = operands.into_iter();
                let left = operands.next().unwrap_or_else(|| self.other(node));
                ExprKind::Compare {
                    left: Box::new(left),
                    ops,
                    comparators: operands.collect(),
                }
            }
            "tuple" | "expression_list" | "pattern_list" | "tuple_pattern" => ExprKind::Tuple(
                named_children(node).into_iter().map(|c| self.expr(c)).collect(),
            ),
            "list" | "list_pattern" => ExprKind::List(
                named_children(node).into_iter().map(|c| self.expr(c)).collect(),
            ),
            "set" => ExprKind::Set(named_children(node).into_iter().map(|c| self.expr(c)).collect()),
            "dictionary" => ExprKind::Dict(
                named_children(node)
                    .into_iter()
                    .map(|c| match c.kind() {
                        "pair" => (
                            Some(self.field_expr(c, "key")),
                            self.field_expr(c, "value"),
                        ),
                        _ => (None, self.expr(c)),
                    })
                    .collect(),
            ),
            "list_comprehension" | "set_comprehension" | "generator_expression"
            | "dictionary_comprehension" => {
                let kind = match node.kind() {
                    "list_comprehension" => ComprehensionKind::List,
                    "set_comprehension" => ComprehensionKind::Set,
                    "dictionary_comprehension" => ComprehensionKind::Dict,
                    _ => ComprehensionKind::Generator,
                };
                let body = node.child_by_field_name("body");
                let (element, value) = match body {
                    Some(b) if b.kind() == "pair" => (
                        self.field_expr(b, "key"),
                        Some(self.field_expr(b, "value")),
                    ),
                    Some(b) => (self.expr(b), None),
                    None => (self.other(node), None),
                };
                let mut generators: Vec<CompFor> = Vec::new();
                for child in named_children(node) {
                    match child.kind() {
                        "for_in_clause" => generators.push(CompFor {
                            target: self.field_expr(child, "left"),
                            iter: self.field_expr(child, "right"),
                            ifs: vec![],
                        }),
                        "if_clause" => {
                            if let (Some(g), Some(test)) =
                                (generators.last_mut(), named_children(child).first())
                            {
                                g.ifs.push(self.expr(*test));
                            }
                        }
                        _ => {}
                    }
                }
                ExprKind::Comprehension(Box::new(Comprehension {
                    kind,
                    element,
                    value,
                    generators,
                }))
            }
            "lambda" => ExprKind::Lambda {
                params: node
                    .child_by_field_name("parameters")
                    .map(|p| self.params(p))
                    .unwrap_or_default(),
                body: self.boxed(node.child_by_field_name("body"), node),
            },
            "conditional_expression" => {
                let parts = named_children(node);
                if parts.len() == 3 {
                    ExprKind::IfExp {
                        body: Box::new(self.expr(parts[0])),
                        test: Box::new(self.expr(parts[1])),
                        orelse: Box::new(self.expr(parts[2])),
                    }
                } else {
                    ExprKind::Other(parts.into_iter().map(|c| self.expr(c)).collect())
                }
            }
            "list_splat" | "list_splat_pattern" => ExprKind::Starred(Box::new(
                named_children(node)
                    .first()
                    .map(|c| self.expr(*c))
                    .unwrap_or_else(|| self.other(node)),
            )),
            "await" => ExprKind::Await(Box::new(
                named_children(node)
                    .first()
                    .map(|c| self.expr(*c))
                    .unwrap_or_else(|| self.other(node)),
            )),
            "named_expression" => ExprKind::NamedExpr {
                target: self.field_text(node, "name"),
                value: self.boxed(node.child_by_field_name("value"), node),
            },
            _ => ExprKind::Other(named_children(node).into_iter().map(|c| self.expr(c)).collect()),
        };
        Expr { line, kind }
    }

    fn string(&self, node: Node) -> StrLit {
        let mut lit = StrLit {
            value: String::new(),
            formatted: false,
            interpolations: vec![],
        };
        let mut cursor = node.walk();
        for child in node.children(&mut cursor) {
            match child.kind() {
                "string_start" => {
                    lit.formatted = self.text(child).to_ascii_lowercase().contains('f');
                }
                "string_content" | "escape_sequence" => lit.value.push_str(&self.text(child)),
                "interpolation" => {
                    if let Some(e) = child
                        .child_by_field_name("expression")
                        .or_else(|| named_children(child).first().copied())
                    {
                        lit.interpolations.push(self.expr(e));
                    }
                }
                _ => {}
            }
        }
        lit
    }
}
