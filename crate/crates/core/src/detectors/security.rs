//! Security rules. All of them look only at code inside loop bodies.

use std::collections::HashSet;

use super::analysis::*;
use super::{Ctx, Hit};
use crate::extractor::ast::*;
use crate::extractor::target_names;

const LOG_METHODS: &[&str] = &["debug", "info", "warning", "warn", "error", "critical", "exception", "log"];
const NETWORK_CALLS: &[&str] = &["connect", "connect_ex", "create_connection", "urlopen"];
const HTTP_MODULES: &[&str] = &["requests", "httpx", "urllib3"];
const WRITE_METHODS: &[&str] = &["write", "writelines", "writerow", "writerows"];

/// Calls made by statements in `stmts`, paired with the statement line.
fn calls_in_body(stmts: &[Stmt]) -> Vec<&Expr> {
    let mut out = Vec::new();
    walk_stmts_in_scope(stmts, &mut |s| {
        for e in s.exprs() {
            out.extend(calls(e));
        }
    });
    out
}

fn call_parts(call: &Expr) -> (&Expr, &[Expr], &[Keyword]) {
    call.as_call().expect("caller passes call expressions")
}

fn call_arguments(call: &Expr) -> impl Iterator<Item = &Expr> {
    let (_, args, kw) = call_parts(call);
    args.iter().chain(kw.iter().map(|k| &k.value))
}

fn is_log_call(call: &Expr) -> bool {
    let (func, _, _) = call_parts(call);
    match &func.kind {
        ExprKind::Name(n) => n == "print" || n == "pprint",
        ExprKind::Attribute { value, attr } => {
            LOG_METHODS.contains(&attr.as_str())
                && value.dotted().is_some_and(|d| d.to_ascii_lowercase().contains("log"))
        }
        _ => false,
    }
}

pub fn sensitive_data_logging(ctx: &Ctx<'_>) -> Vec<Hit> {
    let secrets = &ctx.config.secret_words;
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        for call in calls_in_body(site.body()) {
            if is_log_call(call) && call_arguments(call).any(|a| refers_to(a, secrets)) {
                hits.push(Hit {
                    line: call.line,
                    message: "sensitive value (secret lexicon match) is printed or logged inside a loop".into(),
                });
            }
        }
    }
    hits
}

/// Is the expression derived from user-controlled data: a loop target, a
/// user-lexicon name, or a user-lexicon subscript key?
fn user_derived(ctx: &Ctx<'_>, expr: &Expr, loop_targets: &HashSet<&str>) -> bool {
    expr.any(&mut |e| match &e.kind {
        ExprKind::Name(n) => loop_targets.contains(n.as_str()) || ctx.user_controlled(n),
        ExprKind::Attribute { attr, .. } => ctx.user_controlled(attr),
        ExprKind::Subscript { index, .. } => {
            matches!(&index.kind, ExprKind::Str(s) if s.interpolations.is_empty() && ctx.user_controlled(&s.value))
        }
        _ => false,
    })
}

fn is_comparison(expr: &Expr) -> bool {
    match &expr.kind {
        ExprKind::Compare { .. } => true,
        ExprKind::BoolOp { values, .. } => values.iter().any(is_comparison),
        ExprKind::UnaryOp { op, operand } if op == "not" => is_comparison(operand),
        _ => false,
    }
}

pub fn timing_side_channel(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let targets = ctx.layout.all_targets(site);
        visit_guarded(site.body(), &mut Vec::new(), &mut |stmt, guards| {
            let StmtKind::Expr(e) = &stmt.kind else { return };
            let sleeps = calls(e)
                .into_iter()
                .any(|c| callee_tail(c).is_some_and(|t| t.ends_with("sleep")));
            let data_dependent = guards
                .iter()
                .any(|g| is_comparison(g) && user_derived(ctx, g, &targets));
            if sleeps && data_dependent {
                hits.push(Hit {
                    line: stmt.line,
                    message: "delay depends on a comparison over user-derived data, exposing a timing side channel".into(),
                });
            }
        });
    }
    hits
}

/// A guard made only of `==` tests that read request/user fields.
fn request_equality_guard(ctx: &Ctx<'_>, guard: &Expr, targets: &HashSet<&str>) -> bool {
    match &guard.kind {
        ExprKind::Compare { ops, .. } => {
            ops.iter().all(|op| op == "==" || op == "in") && user_derived(ctx, guard, targets)
        }
        ExprKind::BoolOp { values, .. } => values.iter().all(|v| request_equality_guard(ctx, v, targets)),
        _ => false,
    }
}

fn is_auth_check(ctx: &Ctx<'_>, expr: &Expr) -> bool {
    calls(expr).into_iter().any(|c| {
        callee_tail(c).is_some_and(|t| matches_lexicon(t, &ctx.config.authorization_words))
    })
}

pub fn missing_authorization(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let targets = ctx.layout.all_targets(site);
        let body_checks = calls_in_body(site.body())
            .into_iter()
            .any(|c| is_auth_check(ctx, c));
        if body_checks {
            continue;
        }
        visit_guarded(site.body(), &mut Vec::new(), &mut |stmt, guards| {
            if guards.is_empty() || !guards.iter().all(|g| request_equality_guard(ctx, g, &targets)) {
                return;
            }
            for e in stmt.exprs() {
                for call in calls(e) {
                    if callee_tail(call).is_some_and(|t| matches_lexicon(t, &ctx.config.destructive_words)) {
                        hits.push(Hit {
                            line: call.line,
                            message: "destructive operation is selected by request fields with no authorization check".into(),
                        });
                    }
                }
            }
        });
    }
    hits
}

pub fn insecure_eval_injection(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        for call in calls_in_body(site.body()) {
            let (func, args, _) = call_parts(call);
            let name = func.dotted();
            if !matches!(name.as_deref(), Some("eval" | "exec" | "builtins.eval" | "builtins.exec")) {
                continue;
            }
            if args.first().is_some_and(|a| !a.is_plain_str()) {
                hits.push(Hit {
                    line: call.line,
                    message: format!("{} on a non-literal value inside a loop allows code injection", name.unwrap_or_default()),
                });
            }
        }
    }
    hits
}

/// Direct sources of user-controlled numbers.
fn has_raw_input(expr: &Expr) -> bool {
    expr.any(&mut |e| match &e.kind {
        ExprKind::Call { func, .. } => matches!(func.name(), Some("input" | "raw_input")),
        ExprKind::Attribute { .. } => e.dotted().as_deref() == Some("sys.argv"),
        _ => false,
    })
}

pub fn unvalidated_loop_bound(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let header = site.stmt.line;
        let scope = ctx.layout.scope_of(site);
        let bounds: Vec<&Expr> = match &site.stmt.kind {
            StmtKind::For(f) => match range_args(&f.iter) {
                Some(args) => args.iter().collect(),
                None => continue,
            },
            StmtKind::While(w) => match &w.test.kind {
                ExprKind::Compare { comparators, .. } => comparators.iter().collect(),
                _ => continue,
            },
            _ => continue,
        };
        let clamped_by_min = bounds.iter().any(|b| {
            calls(b).iter().any(|c| matches!(callee_tail(c), Some("min" | "clamp")))
        });
        if clamped_by_min {
            continue;
        }
        // Tainted names: pragma-tagged, or bound from input()/argv before the loop.
        let mut tainted_names = Vec::new();
        let mut direct = false;
        for b in &bounds {
            if has_raw_input(b) {
                direct = true;
            }
            for n in names_in(b) {
                let tagged = ctx.pragmas.user_controlled.iter().any(|p| p == n);
                let from_input = scope
                    .binding_before(n, header)
                    .and_then(|bnd| bnd.value())
                    .is_some_and(has_raw_input);
                if tagged || from_input {
                    tainted_names.push(n);
                }
            }
        }
        if !direct && tainted_names.is_empty() {
            continue;
        }
        let guarded = tainted_names.iter().any(|n| clamped_before(scope, n, header));
        if !guarded {
            hits.push(Hit {
                line: header,
                message: "loop bound comes from user input with no clamping comparison".into(),
            });
        }
    }
    hits
}

/// An `if` before `line` that compares `name` and then rebinds it or leaves.
fn clamped_before(scope: &Scope<'_>, name: &str, line: usize) -> bool {
    scope.flat.iter().filter(|s| s.line < line).any(|s| {
        let StmtKind::If(i) = &s.kind else { return false };
        let compares = i.test.any(&mut |e| {
            matches!(&e.kind, ExprKind::Compare { .. }) && names_in(e).contains(name)
        });
        compares
            && (stored_names(&i.body).contains(name)
                || i.body.iter().any(|b| {
                    matches!(b.kind, StmtKind::Raise(_) | StmtKind::Return(_) | StmtKind::Break | StmtKind::Continue)
                }))
    })
}

fn open_mode(call: &Expr) -> Option<String> {
    let (func, args, kw) = call_parts(call);
    if func.name() != Some("open") {
        return None;
    }
    let mode = kw
        .iter()
        .find(|k| k.name.as_deref() == Some("mode"))
        .map(|k| &k.value)
        .or_else(|| args.get(1));
    Some(match mode {
        Some(Expr { kind: ExprKind::Str(s), .. }) => s.value.clone(),
        Some(_) => "?".to_string(),
        None => "r".to_string(),
    })
}

fn is_socket_call(call: &Expr) -> bool {
    matches!(
        callee_dotted(call).as_deref(),
        Some("socket.socket" | "socket" | "socket.create_connection" | "create_connection")
    )
}

/// Is the iterable bounded by a slice or `islice`?
fn bounded_iterable(iter: &Expr) -> bool {
    match &iter.kind {
        ExprKind::Subscript { index, .. } => {
            matches!(&index.kind, ExprKind::Slice { upper: Some(_), .. })
        }
        ExprKind::Call { func, .. } => func.tail_name() == Some("islice"),
        _ => false,
    }
}

pub fn resource_exhaustion(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let unbounded = match &site.stmt.kind {
            StmtKind::For(f) => {
                !bounded_iterable(&f.iter) && user_derived(ctx, &f.iter, &HashSet::new())
            }
            StmtKind::While(w) => const_truthy(&w.test),
            _ => false,
        };
        if !unbounded {
            continue;
        }
        let body = site.body();
        let closed: HashSet<String> = calls_in_body(body)
            .into_iter()
            .filter_map(|c| {
                let (func, _, _) = call_parts(c);
                match &func.kind {
                    ExprKind::Attribute { value, attr } if attr == "close" => value.name().map(str::to_string),
                    _ => None,
                }
            })
            .collect();
        walk_stmts_in_scope(body, &mut |s| {
            let mut report = |line: usize, what: &str| {
                hits.push(Hit {
                    line,
                    message: format!("{what} inside a loop over unbounded or user-controlled input can exhaust resources"),
                });
            };
            match &s.kind {
                StmtKind::With(w) => {
                    for item in &w.items {
                        for c in calls(&item.context) {
                            if open_mode(c).is_some_and(|m| m.contains(['w', 'a', 'x'])) {
                                report(c.line, "file creation");
                            }
                        }
                    }
                }
                StmtKind::Assign { targets, value: Some(v) } => {
                    for c in calls(v) {
                        if open_mode(c).is_some_and(|m| m.contains(['w', 'a', 'x'])) {
                            report(c.line, "file creation");
                        } else if is_socket_call(c) {
                            let names: Vec<&str> = targets.iter().flat_map(target_names).collect();
                            if !names.iter().any(|n| closed.contains(*n)) {
                                report(c.line, "unclosed socket creation");
                            }
                        }
                    }
                }
                _ => {
                    for e in s.exprs() {
                        for c in calls(e) {
                            if open_mode(c).is_some_and(|m| m.contains(['w', 'a', 'x'])) {
                                report(c.line, "file creation");
                            } else if is_socket_call(c) {
                                report(c.line, "unclosed socket creation");
                            }
                        }
                    }
                }
            }
        });
    }
    hits
}

pub fn unencrypted_sensitive_storage(ctx: &Ctx<'_>) -> Vec<Hit> {
    let cfg = ctx.config;
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        for call in calls_in_body(site.body()) {
            let (func, _, _) = call_parts(call);
            let is_write = matches!(&func.kind, ExprKind::Attribute { attr, .. } if WRITE_METHODS.contains(&attr.as_str()));
            if !is_write {
                continue;
            }
            let leaks = call_arguments(call).any(|a| refers_to(a, &cfg.secret_words));
            let protected = call_arguments(call).any(|a| {
                calls(a)
                    .iter()
                    .any(|c| callee_tail(c).is_some_and(|t| matches_lexicon(t, &cfg.protection_words)))
            });
            if leaks && !protected {
                hits.push(Hit {
                    line: call.line,
                    message: "sensitive value (secret lexicon match) is written to storage without encryption".into(),
                });
            }
        }
    }
    hits
}

fn nonempty_literal(expr: &Expr) -> bool {
    matches!(&expr.kind, ExprKind::Str(s) if s.interpolations.is_empty() && !s.value.is_empty())
}

pub fn hardcoded_secret(ctx: &Ctx<'_>) -> Vec<Hit> {
    let cfg = ctx.config;
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        walk_stmts_in_scope(site.body(), &mut |s| {
            if let StmtKind::Assign { targets, value: Some(v) } = &s.kind {
                let secret_target = targets
                    .iter()
                    .flat_map(target_names)
                    .any(|n| matches_lexicon(n, &cfg.secret_words));
                if secret_target && nonempty_literal(v) {
                    hits.push(Hit {
                        line: v.line,
                        message: "secret literal is hardcoded in the loop".into(),
                    });
                }
            }
            for e in s.exprs() {
                for call in calls(e) {
                    let (func, args, kw) = call_parts(call);
                    let auth = func.tail_name().is_some_and(|t| matches_lexicon(t, &cfg.auth_call_words));
                    for a in args.iter().filter(|_| auth) {
                        if nonempty_literal(a) {
                            hits.push(Hit { line: a.line, message: "literal credential passed to an authentication call".into() });
                        }
                    }
                    for k in kw {
                        let secret_kw = k.name.as_deref().is_some_and(|n| matches_lexicon(n, &cfg.secret_words));
                        if secret_kw && nonempty_literal(&k.value) {
                            hits.push(Hit { line: k.value.line, message: "literal credential passed as a secret keyword argument".into() });
                        }
                    }
                }
            }
        });
    }
    hits
}

/// Loop targets plus names assigned in the body from them (to a fixpoint).
fn loop_derived_names<'a>(site: &LoopSite<'a>) -> HashSet<&'a str> {
    let mut derived: HashSet<&str> = site.target_names().into_iter().collect();
    let mut assigns = Vec::new();
    walk_stmts_in_scope(site.body(), &mut |s| {
        if let StmtKind::Assign { targets, value: Some(v) } = &s.kind {
            assigns.push((targets, v));
        }
    });
    loop {
        let before = derived.len();
        for (targets, v) in &assigns {
            if names_in(v).iter().any(|n| derived.contains(n)) {
                derived.extend(targets.iter().flat_map(target_names));
            }
        }
        if derived.len() == before {
            return derived;
        }
    }
}

fn is_network_or_read(call: &Expr) -> bool {
    let (func, _, _) = call_parts(call);
    if func.tail_name().is_some_and(|t| NETWORK_CALLS.contains(&t)) {
        return true;
    }
    if let ExprKind::Attribute { value, .. } = &func.kind {
        if value.name().is_some_and(|m| HTTP_MODULES.contains(&m)) {
            return true;
        }
    }
    open_mode(call).is_some_and(|m| !m.contains(['w', 'a', 'x', '?']))
}

pub fn unsafe_network_file_op(ctx: &Ctx<'_>) -> Vec<Hit> {
    let cfg = ctx.config;
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        if site.for_stmt().is_none() {
            continue;
        }
        let body = site.body();
        let body_calls = calls_in_body(body);
        let validated = body_calls
            .iter()
            .any(|c| callee_tail(c).is_some_and(|t| matches_lexicon(t, &cfg.validation_words)))
            || {
                let mut found = false;
                walk_exprs_in_scope(body, &mut |e| {
                    if let ExprKind::Compare { ops, comparators, .. } = &e.kind {
                        for (op, rhs) in ops.iter().zip(comparators) {
                            if (op == "in" || op == "not in")
                                && rhs.dotted().is_some_and(|d| matches_lexicon(&d, &cfg.validation_words))
                            {
                                found = true;
                            }
                        }
                    }
                });
                found
            };
        let timeout = body_calls.iter().any(|c| {
            let (_, _, kw) = call_parts(c);
            matches!(callee_tail(c), Some("settimeout" | "setdefaulttimeout"))
                || kw.iter().any(|k| k.name.as_deref() == Some("timeout"))
        });
        if validated || timeout {
            continue;
        }
        let derived = loop_derived_names(site);
        for call in body_calls {
            if !is_network_or_read(call) {
                continue;
            }
            let (_, args, kw) = call_parts(call);
            let uses_loop_data = args
                .iter()
                .chain(kw.iter().map(|k| &k.value))
                .any(|a| names_in(a).iter().any(|n| derived.contains(n)));
            if uses_loop_data {
                hits.push(Hit {
                    line: call.line,
                    message: "network or file access on a loop-derived target with no validation and no timeout".into(),
                });
            }
        }
    }
    hits
}

pub fn missing_exception_handling(ctx: &Ctx<'_>) -> Vec<Hit> {
    if !ctx.exception_prone() {
        return Vec::new();
    }
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        if site.inside_try {
            continue;
        }
        let body = site.body();
        let call_stmts: Vec<&Expr> = body
            .iter()
            .filter_map(|s| match &s.kind {
                StmtKind::Expr(e) if e.as_call().is_some() => Some(e),
                _ => None,
            })
            .collect();
        if call_stmts.is_empty() || call_stmts.len() != body.len() {
            continue;
        }
        if let Some(first) = call_stmts.iter().find(|c| !is_log_call(c)) {
            hits.push(Hit {
                line: first.line,
                message: "heuristic: calls in the loop body are not wrapped in try/except, so one failure aborts the loop".into(),
            });
        }
    }
    hits
}
