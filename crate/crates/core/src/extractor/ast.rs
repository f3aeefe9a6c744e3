//! A compact owned syntax tree for the subset of Python the rules inspect.
//!
//! Lines are 1-based. Constructs the rules never look at are kept as
//! `Other` nodes so nested loops and expressions remain reachable.

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub line: usize,
    /// Last line of the statement, ignoring trailing comments.
    pub end_line: usize,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    For(ForStmt),
    While(WhileStmt),
    If(IfStmt),
    With(WithStmt),
    Try(TryStmt),
    Assign {
        targets: Vec<Expr>,
        value: Option<Expr>,
    },
    AugAssign {
        target: Expr,
        op: String,
        value: Expr,
    },
    Expr(Expr),
    Return(Option<Expr>),
    Raise(Option<Expr>),
    Break,
    Continue,
    Pass,
    FunctionDef {
        name: String,
        params: Vec<String>,
        body: Vec<Stmt>,
    },
    ClassDef {
        name: String,
        body: Vec<Stmt>,
    },
    Delete(Vec<Expr>),
    Global(Vec<String>),
    /// Any statement the rules never look inside.
    Other {
        exprs: Vec<Expr>,
        bodies: Vec<Vec<Stmt>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForStmt {
    pub target: Expr,
    pub iter: Expr,
    pub body: Vec<Stmt>,
    pub orelse: Option<Block>,
    pub is_async: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhileStmt {
    pub test: Expr,
    pub body: Vec<Stmt>,
    pub orelse: Option<Block>,
}

/// An `else`/`finally`/`except` suite together with the line of its keyword.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub line: usize,
    pub body: Vec<Stmt>,
}

/// `elif` chains are nested: the `orelse` of an `if` holds a single `If`.
#[derive(Debug, Clone, PartialEq)]
pub struct IfStmt {
    pub test: Expr,
    pub body: Vec<Stmt>,
    pub orelse: Option<Block>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WithStmt {
    pub items: Vec<WithItem>,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WithItem {
    pub context: Expr,
    pub alias: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TryStmt {
    pub body: Vec<Stmt>,
    pub handlers: Vec<Block>,
    pub orelse: Option<Block>,
    pub finalbody: Option<Block>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub line: usize,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Name(String),
    Str(StrLit),
    Num(String),
    /// `True`, `False`, `None`, `...`
    Const(String),
    Call {
        func: Box<Expr>,
        args: Vec<Expr>,
        keywords: Vec<Keyword>,
    },
    Attribute {
        value: Box<Expr>,
        attr: String,
    },
    Subscript {
        value: Box<Expr>,
        index: Box<Expr>,
    },
    Slice {
        lower: Option<Box<Expr>>,
        upper: Option<Box<Expr>>,
        step: Option<Box<Expr>>,
    },
    BinOp {
        left: Box<Expr>,
        op: String,
        right: Box<Expr>,
    },
    UnaryOp {
        op: String,
        operand: Box<Expr>,
    },
    BoolOp {
        op: String,
        values: Vec<Expr>,
    },
    Compare {
        left: Box<Expr>,
        ops: Vec<String>,
        comparators: Vec<Expr>,
    },
    Tuple(Vec<Expr>),
    List(Vec<Expr>),
    Set(Vec<Expr>),
    Dict(Vec<(Option<Expr>, Expr)>),
    Comprehension(Box<Comprehension>),
    Lambda {
        params: Vec<String>,
        body: Box<Expr>,
    },
    IfExp {
        test: Box<Expr>,
        body: Box<Expr>,
        orelse: Box<Expr>,
    },
    Starred(Box<Expr>),
    Await(Box<Expr>),
    NamedExpr {
        target: String,
        value: Box<Expr>,
    },
    Other(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrLit {
    /// Literal text with interpolations removed; escapes are left as written.
    pub value: String,
    pub formatted: bool,
    pub interpolations: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Keyword {
    /// `None` for `**mapping`.
    pub name: Option<String>,
    pub value: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComprehensionKind {
    List,
    Set,
    Dict,
    Generator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comprehension {
    pub kind: ComprehensionKind,
    /// Element expression; the key for dict comprehensions.
    pub element: Expr,
    /// Value expression of a dict comprehension.
    pub value: Option<Expr>,
    pub generators: Vec<CompFor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompFor {
    pub target: Expr,
    pub iter: Expr,
    pub ifs: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comment {
    pub line: usize,
    /// Text after the `#`, trimmed.
    pub text: String,
}

impl Expr {
    pub fn name(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Name(n) => Some(n),
            _ => None,
        }
    }

    /// Dotted name of a `Name`/`Attribute` chain, e.g. `os.path.join`.
    pub fn dotted(&self) -> Option<String> {
        match &self.kind {
            ExprKind::Name(n) => Some(n.clone()),
            ExprKind::Attribute { value, attr } => value.dotted().map(|v| format!("{v}.{attr}")),
            _ => None,
        }
    }

    /// Last component of a callee: `eval` for `eval`, `write` for `f.write`.
    pub fn tail_name(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Name(n) => Some(n),
            ExprKind::Attribute { attr, .. } => Some(attr),
            _ => None,
        }
    }

    pub fn as_call(&self) -> Option<(&Expr, &[Expr], &[Keyword])> {
        match &self.kind {
            ExprKind::Call {
                func,
                args,
                keywords,
            } => Some((func, args, keywords)),
            _ => None,
        }
    }

    /// True for a plain string literal without interpolations.
    pub fn is_plain_str(&self) -> bool {
        matches!(&self.kind, ExprKind::Str(s) if s.interpolations.is_empty())
    }

    /// Direct child expressions.
    pub fn children(&self) -> Vec<&Expr> {
        use ExprKind::*;
        match &self.kind {
            Name(_) | Num(_) | Const(_) => vec![],
            Str(s) => s.interpolations.iter().collect(),
            Call {
                func,
                args,
                keywords,
            } => std::iter::once(func.as_ref())
                .chain(args.iter())
                .chain(keywords.iter().map(|k| &k.value))
                .collect(),
            Attribute { value, .. } => vec![value],
            Subscript { value, index } => vec![value, index],
            Slice { lower, upper, step } => [lower, upper, step]
                .into_iter()
                .flatten()
                .map(|b| b.as_ref())
                .collect(),
            BinOp { left, right, .. } => vec![left, right],
            UnaryOp { operand, .. } => vec![operand],
            BoolOp { values, .. } => values.iter().collect(),
            Compare {
                left, comparators, ..
            } => std::iter::once(left.as_ref())
                .chain(comparators.iter())
                .collect(),
            Tuple(items) | List(items) | Set(items) | Other(items) => items.iter().collect(),
            Dict(pairs) => pairs
                .iter()
                .flat_map(|(k, v)| k.iter().chain(std::iter::once(v)))
                .collect(),
            Comprehension(c) => {
                let mut out = vec![&c.element];
                out.extend(c.value.iter());
                for g in &c.generators {
                    out.push(&g.target);
                    out.push(&g.iter);
                    out.extend(g.ifs.iter());
                }
                out
            }
            Lambda { body, .. } => vec![body],
            IfExp { test, body, orelse } => vec![test, body, orelse],
            Starred(e) | Await(e) => vec![e],
            NamedExpr { value, .. } => vec![value],
        }
    }

    /// Pre-order walk over this expression and all sub-expressions.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for child in self.children() {
            child.walk(f);
        }
    }

    pub fn any(&self, pred: &mut impl FnMut(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        self.children().into_iter().any(|c| c.any(pred))
    }
}

impl Stmt {
    /// Expressions owned directly by this statement (not by nested statements).
    pub fn exprs(&self) -> Vec<&Expr> {
        use StmtKind::*;
        match &self.kind {
            For(f) => vec![&f.target, &f.iter],
            While(w) => vec![&w.test],
            If(i) => vec![&i.test],
            With(w) => w
                .items
                .iter()
                .flat_map(|i| std::iter::once(&i.context).chain(i.alias.iter()))
                .collect(),
            Try(_) | Break | Continue | Pass | Global(_) => vec![],
            Assign { targets, value } => targets.iter().chain(value.iter()).collect(),
            AugAssign { target, value, .. } => vec![target, value],
            Expr(e) => vec![e],
            Return(e) | Raise(e) => e.iter().collect(),
            FunctionDef { .. } | ClassDef { .. } => vec![],
            Delete(items) => items.iter().collect(),
            Other { exprs, .. } => exprs.iter().collect(),
        }
    }

    /// Nested statement suites in source order.
    pub fn bodies(&self) -> Vec<&[Stmt]> {
        use StmtKind::*;
        match &self.kind {
            For(f) => std::iter::once(f.body.as_slice())
                .chain(f.orelse.iter().map(|b| b.body.as_slice()))
                .collect(),
            While(w) => std::iter::once(w.body.as_slice())
                .chain(w.orelse.iter().map(|b| b.body.as_slice()))
                .collect(),
            If(i) => std::iter::once(i.body.as_slice())
                .chain(i.orelse.iter().map(|b| b.body.as_slice()))
                .collect(),
            With(w) => vec![&w.body],
            Try(t) => std::iter::once(t.body.as_slice())
                .chain(t.handlers.iter().map(|b| b.body.as_slice()))
                .chain(t.orelse.iter().map(|b| b.body.as_slice()))
                .chain(t.finalbody.iter().map(|b| b.body.as_slice()))
                .collect(),
            FunctionDef { body, .. } | ClassDef { body, .. } => vec![body],
            Other { bodies, .. } => bodies.iter().map(|b| b.as_slice()).collect(),
            _ => vec![],
        }
    }

    pub fn is_loop(&self) -> bool {
        matches!(self.kind, StmtKind::For(_) | StmtKind::While(_))
    }

    pub fn is_scope(&self) -> bool {
        matches!(self.kind, StmtKind::FunctionDef { .. } | StmtKind::ClassDef { .. })
    }

    /// Loop body (without the else clause) for `for`/`while`.
    pub fn loop_body(&self) -> Option<&[Stmt]> {
        match &self.kind {
            StmtKind::For(f) => Some(&f.body),
            StmtKind::While(w) => Some(&w.body),
            _ => None,
        }
    }
}

/// Pre-order walk over statements, descending into every nested suite
/// (including function and class bodies).
pub fn walk_stmts<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for stmt in stmts {
        f(stmt);
        for body in stmt.bodies() {
            walk_stmts(body, f);
        }
    }
}

/// Like [`walk_stmts`] but does not enter function or class bodies.
pub fn walk_stmts_in_scope<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for stmt in stmts {
        f(stmt);
        if stmt.is_scope() {
            continue;
        }
        for body in stmt.bodies() {
            walk_stmts_in_scope(body, f);
        }
    }
}

/// Every expression reachable from `stmts` within the current scope.
pub fn walk_exprs_in_scope<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Expr)) {
    walk_stmts_in_scope(stmts, &mut |s| {
        for e in s.exprs() {
            e.walk(f);
        }
    });
}
