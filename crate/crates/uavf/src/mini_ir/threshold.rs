//! Syntactic loop-bound analysis: the program-wide completeness threshold is
//! the maximum static loop bound, or unknown if any loop has no static bound.
//!
//! A loop gets a static bound when its guard compares a scalar counter
//! against a constant, the counter is initialized to a constant immediately
//! visible before the loop, the body updates it by a constant step exactly
//! once, and nothing else writes it inside the loop.

use super::parser::{AExpr, AStmt, AstFunction};
use super::{BinOp, Program, UnOp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopBound {
    pub function: String,
    /// Index into the function's loops in source (pre-)order; matches
    /// `Function::loop_headers`.
    pub loop_index: usize,
    /// `None` means unknown.
    pub bound: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdInfo {
    pub loops: Vec<LoopBound>,
    /// Max over all loop bounds; 0 for loop-free programs; `None` if any
    /// loop bound is unknown.
    pub program_threshold: Option<u64>,
}

const SIM_CAP: u64 = 1 << 20;

pub fn compute_completeness_threshold(p: &Program) -> ThresholdInfo {
    let mut loops = Vec::new();
    for f in &p.ast {
        let mut idx = 0;
        walk_body(f, &f.body, &mut idx, &mut loops);
    }
    let program_threshold = loops
        .iter()
        .try_fold(0u64, |acc, l| l.bound.map(|b| acc.max(b)));
    ThresholdInfo { loops, program_threshold }
}

fn walk_body(f: &AstFunction, stmts: &[AStmt], idx: &mut usize, out: &mut Vec<LoopBound>) {
    for (i, s) in stmts.iter().enumerate() {
        match s {
            AStmt::While { cond, body } => {
                let my_idx = *idx;
                *idx += 1;
                let bound = analyze_loop(&stmts[..i], cond, body);
                out.push(LoopBound { function: f.name.clone(), loop_index: my_idx, bound });
                walk_body(f, body, idx, out);
            }
            AStmt::If { then_body, else_body, .. } => {
                walk_body(f, then_body, idx, out);
                walk_body(f, else_body, idx, out);
            }
            _ => {}
        }
    }
}

fn analyze_loop(preceding: &[AStmt], cond: &AExpr, body: &[AStmt]) -> Option<u64> {
    let (counter, cmp, limit) = guard_shape(cond)?;
    let init = init_value(preceding, counter)?;
    let step = step_value(body, counter)?;
    simulate(init, cmp, limit, step)
}

/// Guard must be `counter <op> constant` or `constant <op> counter`.
fn guard_shape<'a>(cond: &'a AExpr) -> Option<(&'a str, BinOp, i64)> {
    if let AExpr::Bin(op, a, b) = cond {
        let flipped = |op: &BinOp| match op {
            BinOp::Lt => Some(BinOp::Gt),
            BinOp::Le => Some(BinOp::Ge),
            BinOp::Gt => Some(BinOp::Lt),
            BinOp::Ge => Some(BinOp::Le),
            BinOp::Ne => Some(BinOp::Ne),
            _ => None,
        };
        match (&**a, &**b) {
            (AExpr::Var(v), e) => {
                if matches!(op, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Ne) {
                    return Some((v, *op, const_value(e)?));
                }
            }
            (e, AExpr::Var(v)) => {
                return Some((v, flipped(op)?, const_value(e)?));
            }
            _ => {}
        }
    }
    None
}

fn const_value(e: &AExpr) -> Option<i64> {
    match e {
        AExpr::Num(n) => Some(*n),
        AExpr::Un(UnOp::Neg, inner) => {
            if let AExpr::Num(n) = **inner {
                Some(-n)
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Last statement before the loop must pin the counter to a constant; any
/// intervening control flow or non-constant write gives up.
fn init_value(preceding: &[AStmt], counter: &str) -> Option<i64> {
    for s in preceding.iter().rev() {
        match s {
            AStmt::Assign(name, e) if name == counter => return const_value(e),
            AStmt::DeclScalar(name) if name == counter => return Some(0),
            AStmt::Input(name, _) if name == counter => return None,
            AStmt::Call { dest: Some(d), .. } if d == counter => return None,
            AStmt::If { .. } | AStmt::While { .. } => return None,
            _ => {}
        }
    }
    None
}

/// The body must contain exactly one top-level `counter = counter +/- const`
/// and no other write to the counter anywhere in it.
fn step_value(body: &[AStmt], counter: &str) -> Option<i64> {
    let mut step: Option<i64> = None;
    for s in body {
        match s {
            AStmt::Assign(name, e) if name == counter => {
                if step.is_some() {
                    return None;
                }
                step = Some(step_expr(e, counter)?);
            }
            AStmt::Input(name, _) if name == counter => return None,
            AStmt::Call { dest: Some(d), .. } if d == counter => return None,
            AStmt::If { then_body, else_body, .. } => {
                if writes(then_body, counter) || writes(else_body, counter) {
                    return None;
                }
            }
            AStmt::While { body: inner, .. } => {
                if writes(inner, counter) {
                    return None;
                }
            }
            _ => {}
        }
    }
    step
}

fn step_expr(e: &AExpr, counter: &str) -> Option<i64> {
    if let AExpr::Bin(op, a, b) = e {
        if let (AExpr::Var(v), rhs) = (&**a, &**b) {
            if v == counter {
                let c = const_value(rhs)?;
                return match op {
                    BinOp::Add => Some(c),
                    BinOp::Sub => Some(-c),
                    _ => None,
                };
            }
        }
    }
    None
}

fn writes(body: &[AStmt], counter: &str) -> bool {
    body.iter().any(|s| match s {
        AStmt::Assign(name, _) | AStmt::Input(name, _) => name == counter,
        AStmt::Call { dest: Some(d), .. } => d == counter,
        AStmt::If { then_body, else_body, .. } => {
            writes(then_body, counter) || writes(else_body, counter)
        }
        AStmt::While { body: inner, .. } => writes(inner, counter),
        _ => false,
    })
}

fn simulate(init: i64, cmp: BinOp, limit: i64, step: i64) -> Option<u64> {
    let holds = |v: i64| match cmp {
        BinOp::Lt => v < limit,
        BinOp::Le => v <= limit,
        BinOp::Gt => v > limit,
        BinOp::Ge => v >= limit,
        BinOp::Ne => v != limit,
        _ => false,
    };
    let mut v = init;
    let mut n = 0u64;
    while holds(v) {
        // the concrete semantics would fault on 32-bit overflow anyway
        v = v.checked_add(step)?;
        if v < i32::MIN as i64 || v > i32::MAX as i64 {
            return Some(n + 1);
        }
        n += 1;
        if n > SIM_CAP {
            return None;
        }
    }
    Some(n)
}
