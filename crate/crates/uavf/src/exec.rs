//! Concrete interpreter: runs a program on a test-case byte stream,
//! recording the execution path and edge coverage and stopping at the first
//! fault. Reads past end-of-stream yield 0, so every byte sequence is a
//! valid test case. Executions are deterministic.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mini_ir::{
    BinOp, BlockId, Expr, FaultKind, Instr, InputWidth, LocalKind, Loc, Program, Terminator, UnOp,
    VarId,
};

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;
pub const DEFAULT_CALL_DEPTH: usize = 64;

/// Branch decisions of one run, with a stable 64-bit id.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExecutionPath {
    pub decisions: Vec<(u32, bool)>,
}

impl ExecutionPath {
    pub fn id(&self) -> u64 {
        path_id(&self.decisions)
    }
}

/// FNV-1a over the decision list.
pub fn path_id(decisions: &[(u32, bool)]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for (site, taken) in decisions {
        for b in site.to_le_bytes() {
            h = (h ^ b as u64).wrapping_mul(0x100000001b3);
        }
        h = (h ^ *taken as u64).wrapping_mul(0x100000001b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExecStatus {
    Completed { ret: i32 },
    Fault { kind: FaultKind, loc: Loc },
    BudgetExhausted,
}

impl ExecStatus {
    pub fn is_fault(&self) -> bool {
        matches!(self, ExecStatus::Fault { .. })
    }
}

/// Scalar-store snapshot of the entry frame, captured on fault.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub locals: Vec<(String, i32)>,
    pub input_cursor: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecOutcome {
    pub status: ExecStatus,
    pub path: ExecutionPath,
    pub edges: BTreeSet<u32>,
    pub steps: u64,
    pub fault_state: Option<StateSnapshot>,
}

/// One step of the state trace: program counter plus entry-frame scalars.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceState {
    pub block: BlockId,
    pub instr: usize,
    pub locals: Vec<i32>,
}

#[derive(Debug, Clone, Copy)]
pub struct ExecLimits {
    pub step_budget: u64,
    pub call_depth: usize,
}

impl Default for ExecLimits {
    fn default() -> Self {
        ExecLimits { step_budget: DEFAULT_STEP_BUDGET, call_depth: DEFAULT_CALL_DEPTH }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    Int(i32),
    // (region, offset): region 0 is null, region r > 0 is frame array r - 1
    Ref(u32, i32),
}

struct Frame {
    func: usize,
    locals: Vec<Value>,
    arrays: Vec<Vec<i32>>,
    ret_dest: Option<VarId>,
    ret_block: BlockId,
    ret_instr: usize,
}

struct Interp<'a> {
    program: &'a Program,
    input: &'a [u8],
    cursor: usize,
    frames: Vec<Frame>,
    path: Vec<(u32, bool)>,
    edges: BTreeSet<u32>,
    steps: u64,
    limits: ExecLimits,
    trace: Option<Vec<TraceState>>,
}

pub fn run(program: &Program, input: &[u8], step_budget: u64) -> ExecOutcome {
    run_with(program, input, ExecLimits { step_budget, ..Default::default() }, false).0
}

/// Like [`run`] but also returns the state trace (capped).
pub fn run_traced(
    program: &Program,
    input: &[u8],
    step_budget: u64,
) -> (ExecOutcome, Vec<TraceState>) {
    let (o, t) = run_with(program, input, ExecLimits { step_budget, ..Default::default() }, true);
    (o, t.unwrap_or_default())
}

const TRACE_CAP: usize = 4096;

fn run_with(
    program: &Program,
    input: &[u8],
    limits: ExecLimits,
    traced: bool,
) -> (ExecOutcome, Option<Vec<TraceState>>) {
    let mut it = Interp {
        program,
        input,
        cursor: 0,
        frames: vec![new_frame(program, program.entry, &[], None, 0, 0)],
        path: Vec::new(),
        edges: BTreeSet::new(),
        steps: 0,
        limits,
        trace: if traced { Some(Vec::new()) } else { None },
    };
    let status = it.exec();
    let fault_state = if status.is_fault() {
        let f = &it.frames[0];
        let decls = &program.functions[f.func].locals;
        Some(StateSnapshot {
            locals: decls
                .iter()
                .zip(&f.locals)
                .map(|(d, v)| {
                    let n = match v {
                        Value::Int(n) => *n,
                        Value::Ref(_, off) => *off,
                    };
                    (d.name.clone(), n)
                })
                .collect(),
            input_cursor: it.cursor,
        })
    } else {
        None
    };
    let outcome = ExecOutcome {
        status,
        path: ExecutionPath { decisions: it.path },
        edges: it.edges,
        steps: it.steps,
        fault_state,
    };
    (outcome, it.trace)
}

fn new_frame(
    program: &Program,
    func: usize,
    args: &[i32],
    ret_dest: Option<VarId>,
    ret_block: BlockId,
    ret_instr: usize,
) -> Frame {
    let f = &program.functions[func];
    let mut locals = Vec::with_capacity(f.locals.len());
    for (i, d) in f.locals.iter().enumerate() {
        let v = if i < f.n_params {
            Value::Int(args[i])
        } else {
            match d.kind {
                LocalKind::Scalar => Value::Int(0),
                LocalKind::Ref => Value::Ref(0, 0),
            }
        };
        locals.push(v);
    }
    Frame {
        func,
        locals,
        arrays: f.arrays.iter().map(|a| vec![0; a.size]).collect(),
        ret_dest,
        ret_block,
        ret_instr,
    }
}

impl Interp<'_> {
    fn exec(&mut self) -> ExecStatus {
        let mut block = self.program.functions[self.program.entry].entry_block;
        let mut idx = 0usize;
        loop {
            if self.steps >= self.limits.step_budget {
                return ExecStatus::BudgetExhausted;
            }
            self.steps += 1;
            if let Some(trace) = &mut self.trace {
                if trace.len() < TRACE_CAP {
                    let f = self.frames.first().unwrap();
                    trace.push(TraceState {
                        block,
                        instr: idx,
                        locals: f
                            .locals
                            .iter()
                            .map(|v| match v {
                                Value::Int(n) => *n,
                                Value::Ref(_, off) => *off,
                            })
                            .collect(),
                    });
                }
            }
            let bb = &self.program.blocks[block];
            if idx < bb.instrs.len() {
                let loc = Loc { block, instr: idx };
                match self.instr(&bb.instrs[idx], block, idx) {
                    Ok(ControlFlow::Next) => idx += 1,
                    Ok(ControlFlow::Jump(b, i)) => {
                        block = b;
                        idx = i;
                    }
                    Err(kind) => return ExecStatus::Fault { kind, loc },
                    Ok(ControlFlow::Exhausted) => return ExecStatus::BudgetExhausted,
                }
            } else {
                match &bb.term {
                    Terminator::Goto(t) => {
                        self.edges.insert(self.program.edge_ids[block][0]);
                        block = *t;
                        idx = 0;
                    }
                    Terminator::Branch { cond, then_bb, else_bb } => {
                        let c = match self.eval(cond) {
                            Ok(v) => v,
                            Err(kind) => {
                                return ExecStatus::Fault { kind, loc: Loc { block, instr: idx } }
                            }
                        };
                        let taken = c != 0;
                        self.path.push((block as u32, taken));
                        let slot = if taken { 0 } else { 1 };
                        self.edges.insert(self.program.edge_ids[block][slot]);
                        block = if taken { *then_bb } else { *else_bb };
                        idx = 0;
                    }
                    Terminator::Return(e) => {
                        let v = match e {
                            Some(e) => match self.eval(e) {
                                Ok(v) => v,
                                Err(kind) => {
                                    return ExecStatus::Fault {
                                        kind,
                                        loc: Loc { block, instr: idx },
                                    }
                                }
                            },
                            None => 0,
                        };
                        let frame = self.frames.pop().unwrap();
                        if self.frames.is_empty() {
                            return ExecStatus::Completed { ret: v };
                        }
                        if let Some(dest) = frame.ret_dest {
                            self.top().locals[dest] = Value::Int(v);
                        }
                        block = frame.ret_block;
                        idx = frame.ret_instr;
                    }
                }
            }
        }
    }

    fn top(&mut self) -> &mut Frame {
        self.frames.last_mut().unwrap()
    }

    fn frame(&self) -> &Frame {
        self.frames.last().unwrap()
    }

    fn instr(
        &mut self,
        instr: &Instr,
        block: BlockId,
        idx: usize,
    ) -> Result<ControlFlow, FaultKind> {
        match instr {
            Instr::Assign(dest, e) => {
                let v = self.eval(e)?;
                self.top().locals[*dest] = Value::Int(v);
                Ok(ControlFlow::Next)
            }
            Instr::ArrayStore(arr, idx_e, val_e) => {
                let i = self.eval(idx_e)?;
                let v = self.eval(val_e)?;
                let a = &mut self.top().arrays[*arr];
                if i < 0 || i as usize >= a.len() {
                    return Err(FaultKind::BufferOverflow);
                }
                a[i as usize] = v;
                Ok(ControlFlow::Next)
            }
            Instr::RefNull(r) => {
                self.top().locals[*r] = Value::Ref(0, 0);
                Ok(ControlFlow::Next)
            }
            Instr::RefMake(r, arr, off_e) => {
                let off = self.eval(off_e)?;
                self.top().locals[*r] = Value::Ref(*arr as u32 + 1, off);
                Ok(ControlFlow::Next)
            }
            Instr::RefStore(r, val_e) => {
                let v = self.eval(val_e)?;
                let (region, off) = match self.frame().locals[*r] {
                    Value::Ref(region, off) => (region, off),
                    Value::Int(_) => unreachable!("validated ref slot"),
                };
                if region == 0 {
                    return Err(FaultKind::NullDeref);
                }
                let a = &mut self.top().arrays[region as usize - 1];
                if off < 0 || off as usize >= a.len() {
                    return Err(FaultKind::BufferOverflow);
                }
                a[off as usize] = v;
                Ok(ControlFlow::Next)
            }
            Instr::Input(dest, width) => {
                let v = self.read_input(*width);
                self.top().locals[*dest] = Value::Int(v);
                Ok(ControlFlow::Next)
            }
            Instr::Assert(e) => {
                let v = self.eval(e)?;
                if v == 0 {
                    Err(FaultKind::AssertViolation)
                } else {
                    Ok(ControlFlow::Next)
                }
            }
            Instr::Call { dest, func, args } => {
                if self.frames.len() >= self.limits.call_depth {
                    return Ok(ControlFlow::Exhausted);
                }
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a)?);
                }
                let frame = new_frame(self.program, *func, &vals, *dest, block, idx + 1);
                self.frames.push(frame);
                Ok(ControlFlow::Jump(
                    self.program.functions[*func].entry_block,
                    0,
                ))
            }
        }
    }

    fn read_input(&mut self, width: InputWidth) -> i32 {
        let mut bytes = [0u8; 4];
        for (i, b) in bytes.iter_mut().enumerate().take(width.bytes()) {
            *b = self.input.get(self.cursor + i).copied().unwrap_or(0);
        }
        self.cursor += width.bytes();
        i32::from_le_bytes(bytes)
    }

    fn eval(&self, e: &Expr) -> Result<i32, FaultKind> {
        match e {
            Expr::Const(c) => Ok(*c),
            Expr::Var(v) => match self.frame().locals[*v] {
                Value::Int(n) => Ok(n),
                Value::Ref(..) => unreachable!("validated scalar slot"),
            },
            Expr::ArrayLoad(arr, idx) => {
                let i = self.eval(idx)?;
                let a = &self.frame().arrays[*arr];
                if i < 0 || i as usize >= a.len() {
                    return Err(FaultKind::BufferOverflow);
                }
                Ok(a[i as usize])
            }
            Expr::RefLoad(r) => {
                let (region, off) = match self.frame().locals[*r] {
                    Value::Ref(region, off) => (region, off),
                    Value::Int(_) => unreachable!("validated ref slot"),
                };
                if region == 0 {
                    return Err(FaultKind::NullDeref);
                }
                let a = &self.frame().arrays[region as usize - 1];
                if off < 0 || off as usize >= a.len() {
                    return Err(FaultKind::BufferOverflow);
                }
                Ok(a[off as usize])
            }
            Expr::Unary(op, a) => {
                let a = self.eval(a)?;
                match op {
                    UnOp::Neg => check_range(-(a as i64)),
                    UnOp::LogicalNot => Ok((a == 0) as i32),
                    UnOp::BitNot => Ok(!a),
                }
            }
            Expr::Binary(op, a, b) => {
                let a = self.eval(a)?;
                let b = self.eval(b)?;
                eval_binop(*op, a, b)
            }
        }
    }
}

enum ControlFlow {
    Next,
    Jump(BlockId, usize),
    Exhausted,
}

/// Arithmetic is evaluated in 64 bits and checked against the signed 32-bit
/// range; out-of-range results fault instead of wrapping.
pub fn eval_binop(op: BinOp, a: i32, b: i32) -> Result<i32, FaultKind> {
    let (wa, wb) = (a as i64, b as i64);
    match op {
        BinOp::Add => check_range(wa + wb),
        BinOp::Sub => check_range(wa - wb),
        BinOp::Mul => check_range(wa * wb),
        BinOp::Div => {
            if b == 0 {
                Err(FaultKind::DivByZero)
            } else {
                check_range(wa / wb)
            }
        }
        BinOp::Rem => {
            if b == 0 {
                Err(FaultKind::DivByZero)
            } else {
                check_range(wa % wb)
            }
        }
        BinOp::BitAnd => Ok(a & b),
        BinOp::BitOr => Ok(a | b),
        BinOp::BitXor => Ok(a ^ b),
        // shift amounts are masked to 0..31; shifts never fault
        BinOp::Shl => Ok(a.wrapping_shl(b as u32 & 31)),
        BinOp::Shr => Ok(a.wrapping_shr(b as u32 & 31)),
        BinOp::Eq => Ok((a == b) as i32),
        BinOp::Ne => Ok((a != b) as i32),
        BinOp::Lt => Ok((a < b) as i32),
        BinOp::Le => Ok((a <= b) as i32),
        BinOp::Gt => Ok((a > b) as i32),
        BinOp::Ge => Ok((a >= b) as i32),
    }
}

fn check_range(v: i64) -> Result<i32, FaultKind> {
    if v > i32::MAX as i64 {
        Err(FaultKind::SignedOverflow)
    } else if v < i32::MIN as i64 {
        Err(FaultKind::SignedUnderflow)
    } else {
        Ok(v as i32)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReplayError {
    #[error(
        "counterexample claims {expected_kind} at {expected_loc}, concrete run gave {actual}"
    )]
    Mismatch {
        expected_kind: FaultKind,
        expected_loc: Loc,
        actual: String,
    },
}

/// Re-runs a counterexample input and checks that the concrete fault matches
/// the claim; a mismatch signals an encoder bug.
pub fn replay(
    program: &Program,
    input: &[u8],
    expected_kind: FaultKind,
    expected_loc: Loc,
) -> Result<ExecOutcome, ReplayError> {
    let outcome = run(program, input, DEFAULT_STEP_BUDGET);
    match &outcome.status {
        ExecStatus::Fault { kind, loc } if *kind == expected_kind && *loc == expected_loc => {
            Ok(outcome)
        }
        other => Err(ReplayError::Mismatch {
            expected_kind,
            expected_loc,
            actual: format!("{other:?}"),
        }),
    }
}
