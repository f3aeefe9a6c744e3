//! Loop control and logic rules.

use std::collections::HashSet;
use std::sync::OnceLock;

use regex::Regex;

use super::analysis::*;
use super::{Ctx, Hit};
use crate::extractor::ast::*;

pub fn infinite_loop(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let StmtKind::While(w) = &site.stmt.kind else {
            continue;
        };
        if has_exit(&w.body) {
            continue;
        }
        if const_truthy(&w.test) {
            hits.push(Hit {
                line: site.stmt.line,
                message: "heuristic: constant-true condition with no break/return/raise in the body"
                    .into(),
            });
            continue;
        }
        let opaque = w.test.any(&mut |e| {
            matches!(
                e.kind,
                ExprKind::Call { .. }
                    | ExprKind::Attribute { .. }
                    | ExprKind::Subscript { .. }
                    | ExprKind::NamedExpr { .. }
                    | ExprKind::Await(_)
            )
        });
        let names = names_in(&w.test);
        if opaque || names.is_empty() {
            continue;
        }
        let mut changed = stored_names(&w.body);
        changed.extend(mutated_names(&w.body, true));
        if names.iter().all(|n| !changed.contains(*n)) {
            let mut listed: Vec<&str> = names.into_iter().collect();
            listed.sort_unstable();
            hits.push(Hit {
                line: site.stmt.line,
                message: format!(
                    "heuristic: condition variable(s) {} are never updated in the body and nothing breaks out of the loop",
                    listed.join(", ")
                ),
            });
        }
    }
    hits
}

fn intent_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)\bintent(?:ion)?\s*:.*?(-?\d+)\s*(?:to|through|thru|\.\.|-)\s*(-?\d+)")
            .expect("valid intent pattern")
    })
}

/// Closest stated inclusive range (`# Intention: print 1 to 5`) above `line`.
fn stated_intent(ctx: &Ctx<'_>, line: usize) -> Option<(i128, i128)> {
    let lowest = line.saturating_sub(ctx.config.intent_window);
    ctx.module
        .comments
        .iter()
        .filter(|c| c.line < line && c.line >= lowest)
        .filter_map(|c| {
            let caps = intent_regex().captures(&c.text)?;
            Some((caps[1].parse().ok()?, caps[2].parse().ok()?))
        })
        .last()
}

fn inclusive_bound_on(stmts: &[&Stmt], name: &str) -> bool {
    stmts.iter().any(|s| {
        s.exprs().iter().any(|e| {
            e.any(&mut |x| match &x.kind {
                ExprKind::Compare { left, ops, comparators } => {
                    let mut lhs: &Expr = left;
                    for (op, rhs) in ops.iter().zip(comparators) {
                        if (op == "<=" && rhs.name() == Some(name))
                            || (op == ">=" && lhs.name() == Some(name))
                        {
                            return true;
                        }
                        lhs = rhs;
                    }
                    false
                }
                _ => false,
            })
        })
    })
}

pub fn off_by_one(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let Some(f) = site.for_stmt() else { continue };
        let Some(args) = range_args(&f.iter) else { continue };
        let header = site.stmt.line;

        if let (Some(range), Some((lo, hi))) = (ConstRange::from_expr(&f.iter), stated_intent(ctx, header)) {
            if let Some(first_last) = range.bounds().map(|_| {
                let last = range.start + (range.len() - 1) * range.step;
                (range.start, last)
            }) {
                let (first, last) = first_last;
                if (first - lo).abs() + (last - hi).abs() == 1 {
                    hits.push(Hit {
                        line: header,
                        message: format!(
                            "heuristic (intent-dependent): the range yields {first}..{last} but the stated intent is {lo}..{hi}"
                        ),
                    });
                    continue;
                }
            }
        }

        let stop = match args {
            [stop] | [_, stop] | [_, stop, _] => stop,
            _ => continue,
        };
        let Some(bound) = stop.name() else { continue };
        let scope = ctx.layout.scope_of(site);
        let lowest = header.saturating_sub(ctx.config.intent_window);
        let nearby: Vec<&Stmt> = scope
            .flat
            .iter()
            .copied()
            .filter(|s| s.line >= lowest && s.line <= site.region.body_end && s.line != header)
            .collect();
        if inclusive_bound_on(&nearby, bound) {
            hits.push(Hit {
                line: header,
                message: format!(
                    "heuristic (intent-dependent): `{bound}` is an exclusive range stop here but an inclusive bound nearby"
                ),
            });
        }
    }
    hits
}

/// Does the `if` test hold for at least one iteration of the loop?
fn test_can_hold(test: &Expr, loop_stmt: &Stmt) -> bool {
    if const_truthy(test) {
        return true;
    }
    let StmtKind::For(f) = &loop_stmt.kind else {
        return false;
    };
    let (Some(range), Some(var)) = (ConstRange::from_expr(&f.iter), f.target.name()) else {
        return false;
    };
    match compare_with_var(test, var) {
        Some((op, constant, var_on_left)) => {
            compare_over_range(&range, op, constant, var_on_left) != Verdict::AlwaysFalse
        }
        None => false,
    }
}

/// `var OP constant` or `constant OP var` as (op, constant, var_on_left).
fn compare_with_var<'e>(test: &'e Expr, var: &str) -> Option<(&'e str, f64, bool)> {
    let ExprKind::Compare { left, ops, comparators } = &test.kind else {
        return None;
    };
    if ops.len() != 1 {
        return None;
    }
    let right = &comparators[0];
    if left.name() == Some(var) {
        Some((ops[0].as_str(), const_number(right)?, true))
    } else if right.name() == Some(var) {
        Some((ops[0].as_str(), const_number(left)?, false))
    } else {
        None
    }
}

pub fn control_flow_misuse(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let orelse = match &site.stmt.kind {
            StmtKind::For(f) => f.orelse.as_ref(),
            StmtKind::While(w) => w.orelse.as_ref(),
            _ => None,
        };
        let Some(orelse) = orelse else { continue };
        let dominant_break = site.body().iter().any(|s| match &s.kind {
            StmtKind::Break => true,
            StmtKind::If(i) => {
                i.body.iter().any(|b| matches!(b.kind, StmtKind::Break))
                    && test_can_hold(&i.test, site.stmt)
            }
            _ => false,
        });
        if dominant_break {
            hits.push(Hit {
                line: orelse.line,
                message: "the loop's else clause runs only without break, but a break is reachable in the body so the else block is easily skipped"
                    .into(),
            });
        }
    }
    hits
}

pub fn loop_var_reassignment(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let targets: HashSet<&str> = site.target_names().into_iter().collect();
        if targets.is_empty() {
            continue;
        }
        walk_stmts_in_scope(site.body(), &mut |s| {
            let rebound: Vec<&str> = match &s.kind {
                StmtKind::Assign { targets: lhs, .. } => {
                    lhs.iter().flat_map(crate::extractor::target_names).collect()
                }
                StmtKind::AugAssign { target, .. } => target.name().into_iter().collect(),
                _ => vec![],
            };
            let mut walrus = Vec::new();
            for e in s.exprs() {
                e.walk(&mut |x| {
                    if let ExprKind::NamedExpr { target, .. } = &x.kind {
                        walrus.push(target.as_str());
                    }
                });
            }
            if let Some(name) = rebound.into_iter().chain(walrus).find(|n| targets.contains(n)) {
                hits.push(Hit {
                    line: s.line,
                    message: format!("loop variable `{name}` is reassigned inside the loop body"),
                });
            }
        });
    }
    hits
}

pub fn dead_unreachable_code(ctx: &Ctx<'_>) -> Vec<Hit> {
    let mut hits = Vec::new();
    for site in &ctx.layout.loops {
        let Some(f) = site.for_stmt() else { continue };
        let (Some(range), Some(var)) = (ConstRange::from_expr(&f.iter), f.target.name()) else {
            continue;
        };
        if range.is_empty() || stored_names(&f.body).contains(var) {
            continue;
        }
        walk_stmts_in_scope(&f.body, &mut |s| {
            let StmtKind::If(i) = &s.kind else { return };
            let Some((op, constant, var_on_left)) = compare_with_var(&i.test, var) else {
                return;
            };
            let dead = match compare_over_range(&range, op, constant, var_on_left) {
                Verdict::AlwaysTrue => i.orelse.as_ref().and_then(|b| b.body.first()),
                Verdict::AlwaysFalse => i.body.first(),
                Verdict::Depends => None,
            };
            if let Some(first) = dead {
                hits.push(Hit {
                    line: first.line,
                    message: format!(
                        "branch is unreachable: `{var}` only takes values from a constant range, so the condition never changes"
                    ),
                });
            }
        });
    }
    hits
}
