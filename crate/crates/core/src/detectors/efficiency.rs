//! Resource management and efficiency rules.

use std::collections::HashSet;

use super::analysis::*;
use super::{Ctx, Hit};
use crate::extractor::ast::*;
use crate::extractor::target_names;

fn is_pure_call(call: &Expr) -> bool {
    let Some((func, _, _)) = call.as_call() else { return false };
    match func.dotted() {
        Some(d) => PURE_BUILTINS.contains(&d.as_str()) || d.starts_with("math."),
        None => false,
    }
}

fn nontrivial(expr: &Expr) -> bool {
    expr.any(&mut |e| matches!(e.kind, ExprKind::BinOp { .. } | ExprKind::Call { .. }))
}

fn only_pure_calls(expr: &Expr) -> bool {
    calls(expr).into_iter().all(is_pure_call)
}

pub fn invariant_recompute(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let body = site.body();
        let mut variant = stored_names(body);
        variant.extend(mutated_names(body, false));
        variant.extend(site.target_names().into_iter().map(str::to_string));
        walk_stmts_in_scope(body, &mut |s| {
            let StmtKind::Assign { targets, value: Some(v) } = &s.kind else { return };
            if !targets.iter().all(|t| t.name().is_some()) {
                return;
            }
            if !nontrivial(v) || !only_pure_calls(v) {
                return;
            }
            let free = value_names(v);
            if !free.is_empty() && free.iter().all(|n| !variant.contains(n)) {
                hits.push(Hit {
                    line: s.line,
                    message: "value depends only on loop-invariant names and is recomputed every iteration".into(),
                });
            }
        });
    }
    hits
}

fn is_literal_container(expr: &Expr) -> bool {
    matches!(expr.kind, ExprKind::Dict(_) | ExprKind::List(_) | ExprKind::Set(_))
}

/// Names rebound or changed in place, including augmented assignment.
fn changed_in_place(stmts: &[Stmt]) -> HashSet<String> {
    let mut out = mutated_names(stmts, true);
    walk_stmts_in_scope(stmts, &mut |s| match &s.kind {
        StmtKind::AugAssign { target, .. } => {
            out.extend(target_names(target).into_iter().map(str::to_string));
        }
        StmtKind::Delete(items) => {
            out.extend(items.iter().flat_map(target_names).map(str::to_string));
        }
        _ => {}
    });
    out
}

pub fn redundant_object_creation(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let body = site.body();
        let changed = changed_in_place(body);
        let mut variant = stored_names(body);
        variant.extend(ctx.layout.all_targets(site).into_iter().map(str::to_string));
        walk_stmts_in_scope(body, &mut |s| {
            let StmtKind::Assign { targets, value: Some(v) } = &s.kind else { return };
            let [target] = targets.as_slice() else { return };
            let Some(name) = target.name() else { return };
            if !is_literal_container(v) || changed.contains(name) {
                return;
            }
            let deps = value_names(v);
            if deps.iter().all(|n| !variant.contains(n)) {
                hits.push(Hit {
                    line: s.line,
                    message: format!("`{name}` is rebuilt from constants every iteration but never modified"),
                });
            }
        });
    }
    hits
}

pub fn string_concat_in_loop(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let outer = ctx.layout.outermost_header(site);
        let scope = ctx.layout.scope_of(site);
        walk_stmts_in_scope(site.body(), &mut |s| {
            let StmtKind::AugAssign { target, op, .. } = &s.kind else { return };
            let Some(name) = target.name() else { return };
            if op != "+=" {
                return;
            }
            let string_init = scope
                .binding_before(name, outer)
                .and_then(|b| b.value())
                .is_some_and(|v| matches!(v.kind, ExprKind::Str(_)));
            if string_init {
                hits.push(Hit {
                    line: s.line,
                    message: format!("string `{name}` is grown with += inside a loop; each step copies the whole string"),
                });
            }
        });
    }
    hits
}

/// Every use of `name` after `line` is as something merely iterated.
fn only_iterated_after(ctx: &Ctx<'_>, name: &str, line: usize) -> bool {
    let mut total = 0usize;
    let mut iterated = 0usize;
    let count = |e: &Expr, total: &mut usize, iterated: &mut usize| {
        e.walk(&mut |x| {
            if x.name() == Some(name) {
                *total += 1;
            }
            match &x.kind {
                ExprKind::Comprehension(c) => {
                    *iterated += c.generators.iter().filter(|g| g.iter.name() == Some(name)).count();
                }
                ExprKind::Call { func, args, keywords } => {
                    let consumer = matches!(func.name(), Some("sum" | "min" | "max" | "any" | "all"));
                    if consumer && keywords.is_empty() && args.len() == 1 && args[0].name() == Some(name) {
                        *iterated += 1;
                    }
                }
                _ => {}
            }
        });
    };
    walk_stmts(&ctx.module.body, &mut |s| {
        if s.line <= line {
            return;
        }
        if let StmtKind::For(f) = &s.kind {
            if f.iter.name() == Some(name) {
                iterated += 1;
            }
        }
        for e in s.exprs() {
            count(e, &mut total, &mut iterated);
        }
    });
    total == iterated
}

pub fn missing_lazy_evaluation(ctx: &Ctx<'_>) -> Vec<Hit> {
    let threshold = i128::from(ctx.config.large_collection_threshold);
    let mut hits = Vec::new();
    for scope in &ctx.layout.scopes {
        for s in &scope.flat {
            let StmtKind::Assign { targets, value: Some(v) } = &s.kind else { continue };
            let [target] = targets.as_slice() else { continue };
            let Some(name) = target.name() else { continue };
            let ExprKind::Comprehension(c) = &v.kind else { continue };
            if c.kind != ComprehensionKind::List || c.generators.len() != 1 {
                continue;
            }
            let big = ConstRange::count_of(&c.generators[0].iter).is_some_and(|n| n >= threshold);
            if big && only_iterated_after(ctx, name, s.line) {
                hits.push(Hit {
                    line: v.line,
                    message: format!("`{name}` materializes a large list that is only iterated; a generator would do"),
                });
            }
        }
    }
    hits
}

/// The sequence a `for` walks and how its elements are reached:
/// `for x in X` gives (X, None), `for i in range(..len(X))` gives (X, Some(i)).
fn walked_sequence(f: &ForStmt) -> Option<(String, Option<&str>)> {
    if let Some(args) = range_args(&f.iter) {
        let stop = match args {
            [stop] | [_, stop] => stop,
            _ => return None,
        };
        let (func, len_args, _) = stop.as_call()?;
        if func.name() != Some("len") || len_args.len() != 1 {
            return None;
        }
        return Some((len_args[0].dotted()?, Some(f.target.name()?)));
    }
    Some((f.iter.dotted()?, None))
}

/// Does `expr` denote the element the loop is currently at?
fn is_element(expr: &Expr, seq: &str, index: Option<&str>, target: &Expr) -> bool {
    match index {
        None => target.name().is_some() && expr.name() == target.name(),
        Some(i) => match &expr.kind {
            ExprKind::Subscript { value, index: idx } => {
                value.dotted().as_deref() == Some(seq) && idx.name() == Some(i)
            }
            _ => false,
        },
    }
}

pub fn avoidable_nested_loop(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let Some(&parent_idx) = site.parents.last() else { continue };
        let parent = &ctx.layout.loops[parent_idx];
        if site.region.nesting_depth != parent.region.nesting_depth + 1 {
            continue;
        }
        let (Some(inner), Some(outer)) = (site.for_stmt(), parent.for_stmt()) else { continue };
        let (Some((inner_seq, inner_idx)), Some((outer_seq, outer_idx))) =
            (walked_sequence(inner), walked_sequence(outer))
        else {
            continue;
        };
        if inner_seq != outer_seq {
            continue;
        }
        let mut pairwise = false;
        walk_exprs_in_scope(&inner.body, &mut |e| {
            let ExprKind::Compare { left, ops, comparators } = &e.kind else { return };
            if ops.len() != 1 || ops[0] != "==" {
                return;
            }
            let right = &comparators[0];
            let a = is_element(left, &outer_seq, outer_idx, &outer.target)
                && is_element(right, &inner_seq, inner_idx, &inner.target);
            let b = is_element(right, &outer_seq, outer_idx, &outer.target)
                && is_element(left, &inner_seq, inner_idx, &inner.target);
            pairwise |= a || b;
        });
        if pairwise {
            hits.push(Hit {
                line: site.stmt.line,
                message: format!("nested scan of `{inner_seq}` compares elements pairwise; a set or dict gives linear time"),
            });
        }
    }
    hits
}

fn is_list_value(expr: &Expr) -> bool {
    match &expr.kind {
        ExprKind::List(_) => true,
        ExprKind::Comprehension(c) => c.kind == ComprehensionKind::List,
        ExprKind::Call { func, .. } => func.name() == Some("list"),
        _ => false,
    }
}

pub fn inefficient_membership_check(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let outer = ctx.layout.outermost_header(site);
        let scope = ctx.layout.scope_of(site);
        let body = site.body();
        let mut changed = changed_in_place(body);
        changed.extend(stored_names(body));
        walk_exprs_in_scope(body, &mut |e| {
            let ExprKind::Compare { ops, comparators, .. } = &e.kind else { return };
            for (op, rhs) in ops.iter().zip(comparators) {
                if op != "in" && op != "not in" {
                    continue;
                }
                let Some(name) = rhs.name() else { continue };
                let list_bound = scope
                    .binding_before(name, outer)
                    .and_then(|b| b.value())
                    .is_some_and(is_list_value);
                if list_bound && !changed.contains(name) {
                    hits.push(Hit {
                        line: e.line,
                        message: format!("membership test against list `{name}` is linear; a set makes it constant time"),
                    });
                }
            }
        });
    }
    hits
}

fn is_empty_list(expr: &Expr) -> bool {
    match &expr.kind {
        ExprKind::List(items) => items.is_empty(),
        ExprKind::Call { func, args, keywords } => {
            func.name() == Some("list") && args.is_empty() && keywords.is_empty()
        }
        _ => false,
    }
}

/// `L.append(arg)` as (L, arg).
fn append_call(stmt: &Stmt) -> Option<(&str, &Expr)> {
    let StmtKind::Expr(e) = &stmt.kind else { return None };
    let (func, args, kw) = e.as_call()?;
    let ExprKind::Attribute { value, attr } = &func.kind else { return None };
    if attr != "append" || args.len() != 1 || !kw.is_empty() {
        return None;
    }
    Some((value.name()?, &args[0]))
}

fn accumulator_before(ctx: &Ctx<'_>, site: &LoopSite<'_>, list: &str) -> bool {
    ctx.layout
        .scope_of(site)
        .binding_before(list, site.stmt.line)
        .and_then(|b| b.value())
        .is_some_and(|v| is_empty_list(v) || is_list_value(v))
}

/// Large constant loop appending to a list that nobody reads afterwards.
fn unused_accumulations<'a>(ctx: &Ctx<'a>, site: &LoopSite<'a>) -> Vec<(usize, &'a str)> {
    let threshold = i128::from(ctx.config.large_collection_threshold);
    let Some(f) = site.for_stmt() else { return vec![] };
    if !ConstRange::count_of(&f.iter).is_some_and(|n| n >= threshold) {
        return vec![];
    }
    let mut out = Vec::new();
    walk_stmts_in_scope(&f.body, &mut |s| {
        if let Some((list, _)) = append_call(s) {
            if accumulator_before(ctx, site, list) && !read_after(ctx.module, list, site.region.body_end) {
                out.push((s.line, list));
            }
        }
    });
    out
}

pub fn missing_builtin_comprehension(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let Some(f) = site.for_stmt() else { continue };
        if f.orelse.is_some() {
            continue;
        }
        let [only] = f.body.as_slice() else { continue };
        let Some((list, arg)) = append_call(only) else { continue };
        let targets: HashSet<&str> = target_names(&f.target).into_iter().collect();
        let deps = value_names(arg);
        let uses_target = deps.iter().any(|n| targets.contains(n.as_str()));
        if list == "self" || !uses_target || !only_pure_calls(arg) || deps.contains(list) {
            continue;
        }
        let starts_empty = ctx
            .layout
            .scope_of(site)
            .binding_before(list, site.stmt.line)
            .and_then(|b| b.value())
            .is_some_and(is_empty_list);
        if starts_empty && unused_accumulations(ctx, site).is_empty() {
            hits.push(Hit {
                line: only.line,
                message: format!("loop only appends to `{list}`; a list comprehension is clearer and faster"),
            });
        }
    }
    hits
}

pub fn redundant_io_in_loop(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let scope = ctx.layout.scope_of(site);
        for s in site.body() {
            let StmtKind::Expr(e) = &s.kind else { continue };
            let Some((func, _, _)) = e.as_call() else { continue };
            let ExprKind::Attribute { value, attr } = &func.kind else { continue };
            let Some(handle) = value.name() else { continue };
            if attr != "write" && attr != "writelines" {
                continue;
            }
            let opened = match scope.binding_before(handle, site.stmt.line) {
                Some(Binding::With(context)) => context.as_call().is_some_and(|(f, _, _)| f.name() == Some("open")),
                Some(Binding::Value(Some(v))) => v.as_call().is_some_and(|(f, _, _)| f.name() == Some("open")),
                _ => false,
            };
            if opened {
                hits.push(Hit {
                    line: s.line,
                    message: format!("every iteration writes to file `{handle}`; buffer and write once"),
                });
            }
        }
    }
    hits
}

pub fn unused_accumulation(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        for (line, list) in unused_accumulations(ctx, site) {
            hits.push(Hit {
                line,
                message: format!("`{list}` accumulates a large number of values that are never read after the loop"),
            });
        }
    }
    hits
}

pub fn range_len_antipattern(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let Some(f) = site.for_stmt() else { continue };
        let Some(index) = f.target.name() else { continue };
        let Some([stop]) = range_args(&f.iter) else { continue };
        let is_len = stop
            .as_call()
            .is_some_and(|(func, args, _)| func.name() == Some("len") && args.len() == 1);
        if !is_len || stored_names(&f.body).contains(index) {
            continue;
        }
        let mut total = 0usize;
        let mut subscripts = 0usize;
        walk_stmts_in_scope(&f.body, &mut |s| {
            let loads: Vec<&Expr> = match &s.kind {
                StmtKind::Assign { value, .. } => value.iter().collect(),
                StmtKind::AugAssign { value, .. } => vec![value],
                StmtKind::Delete(_) => vec![],
                _ => s.exprs(),
            };
            for e in s.exprs() {
                e.walk(&mut |x| {
                    if x.name() == Some(index) {
                        total += 1;
                    }
                });
            }
            for e in loads {
                e.walk(&mut |x| {
                    if let ExprKind::Subscript { index: idx, .. } = &x.kind {
                        if idx.name() == Some(index) {
                            subscripts += 1;
                        }
                    }
                });
            }
        });
        if total > 0 && total == subscripts {
            hits.push(Hit {
                line: site.stmt.line,
                message: format!("`{index}` is only used to index sequences; iterate directly with enumerate() or zip()"),
            });
        }
    }
    hits
}
