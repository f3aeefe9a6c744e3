//! Syntactic facts shared by the rules, from binding lookups to constant
//! folding and loop bookkeeping.

use std::collections::HashSet;

use crate::extractor::ast::*;
use crate::extractor::{target_names, LoopRegion, ParsedModule};

/// Methods that change the receiver in place.
pub const MUTATING_METHODS: &[&str] = &[
    "append", "extend", "insert", "pop", "remove", "clear", "update", "add", "discard",
    "popitem", "setdefault", "sort", "reverse",
];

/// Calls treated as side-effect free when reasoning about recomputation.
pub const PURE_BUILTINS: &[&str] = &[
    "len", "abs", "min", "max", "sum", "round", "pow", "sorted", "str", "int", "float", "bool",
    "tuple", "frozenset", "hash", "ord", "chr", "divmod", "any", "all", "repr",
];

/// Lower-cased identifier tokens, split at `_`, digit runs and camelCase humps.
pub fn tokens(ident: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut prev_lower = false;
    for ch in ident.chars() {
        if !ch.is_ascii_alphabetic() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            prev_lower = false;
            continue;
        }
        if ch.is_ascii_uppercase() && prev_lower && !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
        prev_lower = ch.is_ascii_lowercase();
        cur.push(ch.to_ascii_lowercase());
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Whether an identifier mentions a lexicon word.
///
/// Multi-word entries (`check_permission`) and long words match as
/// substrings; short words must be a whole token, optionally plural.
pub fn matches_word(ident: &str, word: &str) -> bool {
    let lower = ident.to_ascii_lowercase();
    let word = word.to_ascii_lowercase();
    if word.contains('_') || word.len() >= 6 {
        return lower.contains(&word);
    }
    tokens(ident).iter().any(|t| {
        t == &word || t.strip_suffix('s') == Some(&word) || t.strip_suffix("es") == Some(&word)
    })
}

pub fn matches_lexicon(ident: &str, lexicon: &[String]) -> bool {
    lexicon.iter().any(|w| matches_word(ident, w))
}

/// Does the expression name a lexicon term directly or through a string
/// subscript key such as `record['ssn']`?
pub fn refers_to(expr: &Expr, lexicon: &[String]) -> bool {
    expr.any(&mut |e| match &e.kind {
        ExprKind::Name(n) => matches_lexicon(n, lexicon),
        ExprKind::Attribute { attr, .. } => matches_lexicon(attr, lexicon),
        ExprKind::Subscript { index, .. } => match &index.kind {
            ExprKind::Str(s) if s.interpolations.is_empty() => matches_lexicon(&s.value, lexicon),
            _ => false,
        },
        _ => false,
    })
}

/// Every call expression nested in `expr`, outermost first.
pub fn calls(expr: &Expr) -> Vec<&Expr> {
    let mut out = Vec::new();
    expr.walk(&mut |e| {
        if matches!(e.kind, ExprKind::Call { .. }) {
            out.push(e);
        }
    });
    out
}

/// Callee name of a call expression (`eval`, `write`, `socket`).
pub fn callee_tail(call: &Expr) -> Option<&str> {
    call.as_call().and_then(|(f, _, _)| f.tail_name())
}

pub fn callee_dotted(call: &Expr) -> Option<String> {
    call.as_call().and_then(|(f, _, _)| f.dotted())
}

/// Every name mentioned anywhere in the expression.
pub fn names_in(expr: &Expr) -> HashSet<&str> {
    let mut out = HashSet::new();
    expr.walk(&mut |e| {
        if let ExprKind::Name(n) = &e.kind {
            out.insert(n.as_str());
        }
    });
    out
}

/// Names read as values: callee positions, comprehension targets and
/// lambda parameters are excluded.
pub fn value_names(expr: &Expr) -> HashSet<String> {
    let mut out = HashSet::new();
    collect_value_names(expr, &HashSet::new(), &mut out);
    out
}

fn collect_value_names(expr: &Expr, bound: &HashSet<String>, out: &mut HashSet<String>) {
    match &expr.kind {
        ExprKind::Name(n) => {
            if !bound.contains(n) {
                out.insert(n.clone());
            }
        }
        ExprKind::Call { args, keywords, .. } => {
            for a in args {
                collect_value_names(a, bound, out);
            }
            for k in keywords {
                collect_value_names(&k.value, bound, out);
            }
        }
        ExprKind::Comprehension(c) => {
            let mut inner = bound.clone();
            for g in &c.generators {
                collect_value_names(&g.iter, &inner, out);
                inner.extend(target_names(&g.target).into_iter().map(str::to_string));
                for cond in &g.ifs {
                    collect_value_names(cond, &inner, out);
                }
            }
            collect_value_names(&c.element, &inner, out);
            if let Some(v) = &c.value {
                collect_value_names(v, &inner, out);
            }
        }
        ExprKind::Lambda { params, body } => {
            let mut inner = bound.clone();
            inner.extend(params.iter().cloned());
            collect_value_names(body, &inner, out);
        }
        _ => {
            for child in expr.children() {
                collect_value_names(child, bound, out);
            }
        }
    }
}

/// Names rebound anywhere in `stmts` (without entering nested scopes).
pub fn stored_names(stmts: &[Stmt]) -> HashSet<String> {
    let mut out = HashSet::new();
    walk_stmts_in_scope(stmts, &mut |s| {
        match &s.kind {
            StmtKind::Assign { targets, .. } => {
                for t in targets {
                    out.extend(target_names(t).into_iter().map(str::to_string));
                }
            }
            StmtKind::AugAssign { target, .. } => {
                out.extend(target_names(target).into_iter().map(str::to_string));
            }
            StmtKind::For(f) => {
                out.extend(target_names(&f.target).into_iter().map(str::to_string));
            }
            StmtKind::With(w) => {
                for item in &w.items {
                    if let Some(alias) = &item.alias {
                        out.extend(target_names(alias).into_iter().map(str::to_string));
                    }
                }
            }
            StmtKind::Delete(items) => {
                for t in items {
                    out.extend(target_names(t).into_iter().map(str::to_string));
                }
            }
            StmtKind::FunctionDef { name, .. } | StmtKind::ClassDef { name, .. } => {
                out.insert(name.clone());
            }
            _ => {}
        }
        for e in s.exprs() {
            e.walk(&mut |x| {
                if let ExprKind::NamedExpr { target, .. } = &x.kind {
                    out.insert(target.clone());
                }
            });
        }
    });
    out
}

/// Root name of a subscript/attribute chain (`a` for `a.b[0]`).
pub fn root_name(expr: &Expr) -> Option<&str> {
    match &expr.kind {
        ExprKind::Name(n) => Some(n),
        ExprKind::Attribute { value, .. } | ExprKind::Subscript { value, .. } => root_name(value),
        _ => None,
    }
}

/// Names whose objects are changed in place: mutating method calls and,
/// when `include_stores`, item/attribute stores and deletes.
pub fn mutated_names(stmts: &[Stmt], include_stores: bool) -> HashSet<String> {
    let mut out = HashSet::new();
    walk_stmts_in_scope(stmts, &mut |s| {
        if include_stores {
            let store_targets: Vec<&Expr> = match &s.kind {
                StmtKind::Assign { targets, .. } => targets.iter().collect(),
                StmtKind::AugAssign { target, .. } => vec![target],
                StmtKind::Delete(items) => items.iter().collect(),
                _ => vec![],
            };
            for t in store_targets {
                t.walk(&mut |x| {
                    if matches!(x.kind, ExprKind::Subscript { .. } | ExprKind::Attribute { .. }) {
                        if let Some(root) = root_name(x) {
                            out.insert(root.to_string());
                        }
                    }
                });
            }
        }
        for e in s.exprs() {
            for call in calls(e) {
                if let Some((func, _, _)) = call.as_call() {
                    if let ExprKind::Attribute { value, attr } = &func.kind {
                        if MUTATING_METHODS.contains(&attr.as_str()) {
                            if let Some(root) = root_name(value) {
                                out.insert(root.to_string());
                            }
                        }
                    }
                }
            }
        }
    });
    out
}

/// A `break` belonging to this loop, or any `return`/`raise`/exit call.
pub fn has_exit(body: &[Stmt]) -> bool {
    fn go(stmts: &[Stmt], nested_loop: bool) -> bool {
        stmts.iter().any(|s| {
            let exits_here = match &s.kind {
                StmtKind::Break => !nested_loop,
                StmtKind::Return(_) | StmtKind::Raise(_) => true,
                StmtKind::Expr(e) => calls(e).iter().any(|c| {
                    matches!(
                        callee_dotted(c).as_deref(),
                        Some("sys.exit" | "exit" | "quit" | "os._exit")
                    )
                }),
                _ => false,
            };
            if exits_here {
                return true;
            }
            if s.is_scope() {
                return false;
            }
            match &s.kind {
                StmtKind::For(f) => {
                    go(&f.body, true) || f.orelse.as_ref().is_some_and(|b| go(&b.body, nested_loop))
                }
                StmtKind::While(w) => {
                    go(&w.body, true) || w.orelse.as_ref().is_some_and(|b| go(&b.body, nested_loop))
                }
                _ => s.bodies().into_iter().any(|b| go(b, nested_loop)),
            }
        })
    }
    go(body, false)
}

/// Integer value of a constant arithmetic expression.
pub fn const_int(expr: &Expr) -> Option<i128> {
    match &expr.kind {
        ExprKind::Num(text) => {
            let clean: String = text.chars().filter(|c| *c != '_').collect();
            let lower = clean.to_ascii_lowercase();
            if let Some(hex) = lower.strip_prefix("0x") {
                i128::from_str_radix(hex, 16).ok()
            } else if let Some(oct) = lower.strip_prefix("0o") {
                i128::from_str_radix(oct, 8).ok()
            } else if let Some(bin) = lower.strip_prefix("0b") {
                i128::from_str_radix(bin, 2).ok()
            } else {
                lower.parse().ok()
            }
        }
        ExprKind::UnaryOp { op, operand } if op == "-" => const_int(operand).map(|v| -v),
        ExprKind::UnaryOp { op, operand } if op == "+" => const_int(operand),
        ExprKind::BinOp { left, op, right } => {
            let (l, r) = (const_int(left)?, const_int(right)?);
            match op.as_str() {
                "+" => l.checked_add(r),
                "-" => l.checked_sub(r),
                "*" => l.checked_mul(r),
                "//" if r != 0 => Some(l.div_euclid(r)),
                "%" if r != 0 => Some(l.rem_euclid(r)),
                "**" if (0..=64).contains(&r) => l.checked_pow(r as u32),
                _ => None,
            }
        }
        _ => None,
    }
}

/// Numeric value of a literal (integer or float), for comparisons.
pub fn const_number(expr: &Expr) -> Option<f64> {
    if let Some(v) = const_int(expr) {
        return Some(v as f64);
    }
    match &expr.kind {
        ExprKind::Num(text) => text.replace('_', "").parse().ok(),
        ExprKind::UnaryOp { op, operand } if op == "-" => const_number(operand).map(|v| -v),
        _ => None,
    }
}

/// Arguments of a `range(...)` call.
pub fn range_args(expr: &Expr) -> Option<&[Expr]> {
    match expr.as_call() {
        Some((func, args, kw)) if func.name() == Some("range") && kw.is_empty() => Some(args),
        _ => None,
    }
}

/// `range` with constant arguments as (start, stop, step).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstRange {
    pub start: i128,
    pub stop: i128,
    pub step: i128,
}

impl ConstRange {
    pub fn from_expr(expr: &Expr) -> Option<Self> {
        let args = range_args(expr)?;
        let vals: Option<Vec<i128>> = args.iter().map(const_int).collect();
        let vals = vals?;
        let (start, stop, step) = match vals.as_slice() {
            [stop] => (0, *stop, 1),
            [start, stop] => (*start, *stop, 1),
            [start, stop, step] if *step != 0 => (*start, *stop, *step),
            _ => return None,
        };
        Some(ConstRange { start, stop, step })
    }

    pub fn len(&self) -> i128 {
        if self.step > 0 && self.stop > self.start {
            (self.stop - self.start + self.step - 1) / self.step
        } else if self.step < 0 && self.stop < self.start {
            (self.start - self.stop - self.step - 1) / (-self.step)
        } else {
            0
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (first, last) produced values, or `None` for an empty range.
    pub fn bounds(&self) -> Option<(i128, i128)> {
        let n = self.len();
        (n > 0).then(|| {
            let last = self.start + (n - 1) * self.step;
            (self.start.min(last), self.start.max(last))
        })
    }

    pub fn contains(&self, value: f64) -> bool {
        if value.fract() != 0.0 || self.is_empty() {
            return false;
        }
        let v = value as i128;
        let (lo, hi) = self.bounds().expect("non-empty");
        (lo..=hi).contains(&v) && (v - self.start) % self.step == 0
    }

    /// Number of iterations when the argument list is constant, otherwise
    /// `None`. Used for "large collection" checks.
    pub fn count_of(expr: &Expr) -> Option<i128> {
        Self::from_expr(expr).map(|r| r.len())
    }
}

/// Outcome of `var OP constant` over every value of a constant range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    AlwaysTrue,
    AlwaysFalse,
    Depends,
}

pub fn compare_over_range(range: &ConstRange, op: &str, constant: f64, var_on_left: bool) -> Verdict {
    let Some((lo, hi)) = range.bounds() else {
        return Verdict::Depends;
    };
    let (lo, hi) = (lo as f64, hi as f64);
    // Normalise to `var OP constant`.
    let op = if var_on_left {
        op
    } else {
        match op {
            "<" => ">",
            ">" => "<",
            "<=" => ">=",
            ">=" => "<=",
            other => other,
        }
    };
    let (all, none) = match op {
        "<" => (hi < constant, lo >= constant),
        "<=" => (hi <= constant, lo > constant),
        ">" => (lo > constant, hi <= constant),
        ">=" => (lo >= constant, hi < constant),
        "==" => (lo == hi && lo == constant, !range.contains(constant)),
        "!=" => (!range.contains(constant), lo == hi && lo == constant),
        _ => return Verdict::Depends,
    };
    if all {
        Verdict::AlwaysTrue
    } else if none {
        Verdict::AlwaysFalse
    } else {
        Verdict::Depends
    }
}

/// Is the expression a constant that is always truthy (`True`, `1`, `"x"`)?
pub fn const_truthy(expr: &Expr) -> bool {
    match &expr.kind {
        ExprKind::Const(c) => c == "True",
        ExprKind::Num(_) => const_number(expr).is_some_and(|v| v != 0.0),
        ExprKind::Str(s) => s.interpolations.is_empty() && !s.value.is_empty(),
        _ => false,
    }
}

/// A statement list flattened in source order, plus the scope's parameters.
pub struct Scope<'a> {
    pub params: Vec<&'a str>,
    pub flat: Vec<&'a Stmt>,
}

impl<'a> Scope<'a> {
    fn new(body: &'a [Stmt], params: Vec<&'a str>) -> Self {
        let mut flat = Vec::new();
        walk_stmts_in_scope(body, &mut |s| flat.push(s));
        Scope { params, flat }
    }

    /// Latest binding of `name` in a statement that starts before `line`.
    pub fn binding_before(&self, name: &str, line: usize) -> Option<Binding<'a>> {
        let mut found = None;
        for stmt in self.flat.iter().filter(|s| s.line < line) {
            match &stmt.kind {
                StmtKind::Assign { targets, value } => {
                    for t in targets {
                        if t.name() == Some(name) {
                            found = Some(Binding::Value(value.as_ref()));
                        } else if target_names(t).contains(&name) {
                            found = Some(Binding::Opaque);
                        }
                    }
                }
                StmtKind::AugAssign { target, .. } if target.name() == Some(name) => {
                    found = Some(Binding::Opaque);
                }
                StmtKind::For(f) if target_names(&f.target).contains(&name) => {
                    found = Some(Binding::Opaque);
                }
                StmtKind::With(w) => {
                    for item in &w.items {
                        if item.alias.as_ref().and_then(|a| a.name()) == Some(name) {
                            found = Some(Binding::With(&item.context));
                        }
                    }
                }
                _ => {}
            }
        }
        found.or_else(|| self.params.contains(&name).then_some(Binding::Param))
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Binding<'a> {
    /// `name = value` (value is `None` for a bare annotation).
    Value(Option<&'a Expr>),
    /// `with context as name`
    With(&'a Expr),
    /// Plain and augmented assignment targets, including loop targets.
    Opaque,
    Param,
}

impl<'a> Binding<'a> {
    pub fn value(&self) -> Option<&'a Expr> {
        match self {
            Binding::Value(v) => *v,
            _ => None,
        }
    }
}

/// One loop together with its scope and enclosing loops.
pub struct LoopSite<'a> {
    pub stmt: &'a Stmt,
    pub region: &'a LoopRegion,
    pub scope: usize,
    /// Indices (into the site list) of enclosing loops, outermost first.
    pub parents: Vec<usize>,
    /// The loop sits inside a `try` body within its scope.
    pub inside_try: bool,
}

impl<'a> LoopSite<'a> {
    pub fn body(&self) -> &'a [Stmt] {
        self.stmt.loop_body().unwrap_or_default()
    }

    pub fn target_names(&self) -> Vec<&'a str> {
        match &self.stmt.kind {
            StmtKind::For(f) => target_names(&f.target),
            _ => vec![],
        }
    }

    pub fn for_stmt(&self) -> Option<&'a ForStmt> {
        match &self.stmt.kind {
            StmtKind::For(f) => Some(f),
            _ => None,
        }
    }
}

/// Scopes and loop sites for one module.
pub struct Layout<'a> {
    pub scopes: Vec<Scope<'a>>,
    pub loops: Vec<LoopSite<'a>>,
}

impl<'a> Layout<'a> {
    pub fn build(module: &'a ParsedModule, regions: &'a [LoopRegion]) -> Self {
        let mut layout = Layout {
            scopes: vec![Scope::new(&module.body, vec![])],
            loops: Vec::new(),
        };
        layout.visit(&module.body, 0, &mut Vec::new(), false, regions);
        layout
    }

    fn visit(
        &mut self,
        stmts: &'a [Stmt],
        scope: usize,
        parents: &mut Vec<usize>,
        inside_try: bool,
        regions: &'a [LoopRegion],
    ) {
        for stmt in stmts {
            match &stmt.kind {
                StmtKind::FunctionDef { params, body, .. } => {
                    self.scopes
                        .push(Scope::new(body, params.iter().map(String::as_str).collect()));
                    let id = self.scopes.len() - 1;
                    self.visit(body, id, &mut Vec::new(), false, regions);
                }
                StmtKind::ClassDef { body, .. } => {
                    self.scopes.push(Scope::new(body, vec![]));
                    let id = self.scopes.len() - 1;
                    self.visit(body, id, &mut Vec::new(), false, regions);
                }
                StmtKind::For(_) | StmtKind::While(_) => {
                    let kind = match stmt.kind {
                        StmtKind::For(_) => crate::extractor::LoopKind::ForLoop,
                        _ => crate::extractor::LoopKind::WhileLoop,
                    };
                    let region = regions
                        .iter()
                        .find(|r| r.header_line == stmt.line && r.loop_kind == kind);
                    let pushed = if let Some(region) = region {
                        self.loops.push(LoopSite {
                            stmt,
                            region,
                            scope,
                            parents: parents.clone(),
                            inside_try,
                        });
                        parents.push(self.loops.len() - 1);
                        true
                    } else {
                        false
                    };
                    for body in stmt.bodies() {
                        self.visit(body, scope, parents, inside_try, regions);
                    }
                    if pushed {
                        parents.pop();
                    }
                }
                StmtKind::Try(t) => {
                    self.visit(&t.body, scope, parents, true, regions);
                    for b in t
                        .handlers
                        .iter()
                        .chain(t.orelse.iter())
                        .chain(t.finalbody.iter())
                    {
                        self.visit(&b.body, scope, parents, inside_try, regions);
                    }
                }
                _ => {
                    for body in stmt.bodies() {
                        self.visit(body, scope, parents, inside_try, regions);
                    }
                }
            }
        }
    }

    pub fn scope_of(&self, site: &LoopSite<'a>) -> &Scope<'a> {
        &self.scopes[site.scope]
    }

    /// Header line of the outermost loop enclosing `site` (or its own).
    pub fn outermost_header(&self, site: &LoopSite<'a>) -> usize {
        site.parents
            .first()
            .map_or(site.stmt.line, |p| self.loops[*p].stmt.line)
    }

    /// Loop target names of this loop and every enclosing loop.
    pub fn all_targets(&self, site: &LoopSite<'a>) -> HashSet<&'a str> {
        let mut out: HashSet<&str> = site.target_names().into_iter().collect();
        for p in &site.parents {
            out.extend(self.loops[*p].target_names());
        }
        out
    }
}

/// Visits every statement of a loop body (not nested scopes) together with
/// the `if` tests guarding it inside the loop.
pub fn visit_guarded<'a>(
    stmts: &'a [Stmt],
    guards: &mut Vec<&'a Expr>,
    f: &mut impl FnMut(&'a Stmt, &[&'a Expr]),
) {
    for stmt in stmts {
        f(stmt, guards);
        if stmt.is_scope() {
            continue;
        }
        match &stmt.kind {
            StmtKind::If(i) => {
                guards.push(&i.test);
                visit_guarded(&i.body, guards, f);
                if let Some(orelse) = &i.orelse {
                    visit_guarded(&orelse.body, guards, f);
                }
                guards.pop();
            }
            _ => {
                for body in stmt.bodies() {
                    visit_guarded(body, guards, f);
                }
            }
        }
    }
}

/// Reads of `name` in statements starting after `line`, anywhere in the
/// module. Plain-name assignment targets are not reads.
pub fn read_after(module: &ParsedModule, name: &str, line: usize) -> bool {
    let mut found = false;
    walk_stmts(&module.body, &mut |s| {
        if found || s.line <= line {
            return;
        }
        let exprs: Vec<&Expr> = match &s.kind {
            StmtKind::Assign { targets, value } => targets
                .iter()
                .filter(|t| t.name().is_none())
                .chain(value.iter())
                .collect(),
            StmtKind::For(f) => vec![&f.iter],
            _ => s.exprs(),
        };
        found = exprs.iter().any(|e| names_in(e).contains(name));
    });
    found
}
