//! Path-wise symbolic execution over the CFG: depth-first enumeration of
//! unrolled paths, fault side conditions mirrored from the concrete
//! interpreter, and on-the-fly VC solving. Every loop may unroll at most k
//! times per frame; truncation is recorded and downgrades completeness.

use std::collections::{HashMap, HashSet};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::exec::{self, path_id, ExecutionPath};
use crate::mini_ir::{
    ArrayId, BinOp, BlockId, Expr, FaultKind, Instr, InputWidth, LocalKind, Loc, Program,
    SafetyProperty, Terminator, UnOp, VarId,
};

use super::blast::{Blaster, CnfFormula};
use super::bv::{BvBuilder, Node, NodeId};
use super::sat::{SatResult, Solver};
use super::{BmcStats, Counterexample};

/// Hard per-path budget on symbolic steps, mirroring the concrete budget's
/// role of bounding runaway paths.
const PATH_STEP_CAP: u64 = 200_000;
/// Ceiling on enumerated paths before giving up with Unknown(memory).
const MAX_PATHS: u64 = 1 << 17;
const CALL_DEPTH: usize = 64;

/// One symbolic input read: its bit-vector variable tag, width, and byte
/// offset in the input stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputSite {
    pub tag: u32,
    pub width: InputWidth,
    pub offset: usize,
}

/// A fully enumerated CFG path (possibly truncated at the unroll bound).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymPath {
    pub decisions: Vec<(u32, bool)>,
    pub id: u64,
    pub truncated: bool,
}

/// An encoded verification condition: CNF plus the input-site mapping
/// needed to decode a model back into input bytes.
#[derive(Debug, Clone)]
pub struct VerificationCondition {
    pub property: SafetyProperty,
    pub bound: u32,
    pub formula: CnfFormula,
    pub inputs: Vec<InputSite>,
    pub input_len: usize,
}

impl VerificationCondition {
    /// Decodes a SAT model into the input byte sequence; unconstrained
    /// input bits default to 0.
    pub fn decode_model(&self, model: &[bool]) -> Vec<u8> {
        decode_input(&self.formula, model, &self.inputs, self.input_len)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("path does not reach the property at {0}")]
    Inconsistent(Loc),
}

pub(super) struct ExploreRun {
    pub cex: Option<Counterexample>,
    pub stats: BmcStats,
    pub truncated: bool,
    pub timed_out: bool,
    pub overflowed: bool,
    pub replay_mismatch: bool,
    pub paths: Vec<SymPath>,
    pub captured: Option<VerificationCondition>,
}

/// Enumerates the unrolled CFG paths of `program` (excluding path ids in
/// `exclude`), pruning infeasible prefixes by satisfiability checks.
pub fn enumerate_paths(program: &Program, k: u32, exclude: &HashSet<u64>) -> Vec<SymPath> {
    explore(program, k, exclude, Duration::from_secs(60), false, true, None).paths
}

/// Encodes the VC for `property` along the concrete decision sequence
/// `path`; satisfiable iff some input drives execution down `path` into the
/// violation.
pub fn encode(
    program: &Program,
    path: &ExecutionPath,
    property: SafetyProperty,
) -> Result<VerificationCondition, EncodeError> {
    let run = explore(
        program,
        u32::MAX - 1,
        &HashSet::new(),
        Duration::from_secs(60),
        false,
        false,
        Some((path.decisions.clone(), property)),
    );
    run.captured.ok_or(EncodeError::Inconsistent(property.loc))
}

#[derive(Debug, Clone, Copy)]
enum SymValue {
    Int(NodeId),
    /// (region, offset): region 0 is null, region r > 0 is frame array r-1.
    Ref(u32, NodeId),
}

#[derive(Clone)]
struct SymFrame {
    locals: Vec<SymValue>,
    arrays: Vec<Vec<NodeId>>,
    visits: HashMap<BlockId, u32>,
    ret_dest: Option<VarId>,
    ret_block: BlockId,
    ret_instr: usize,
}

#[derive(Clone)]
struct SymState {
    frames: Vec<SymFrame>,
    /// Path constraints: branch conditions, negated earlier faults, and
    /// division definitional constraints (all width-1 nodes).
    conds: Vec<NodeId>,
    decisions: Vec<(u32, bool)>,
    cursor: usize,
    inputs: Vec<InputSite>,
    steps: u64,
}

struct PathDead;

struct Engine<'a> {
    program: &'a Program,
    k: u32,
    exclude: &'a HashSet<u64>,
    deadline: Instant,
    vc_timeout: Duration,
    solve_vcs: bool,
    collect_paths: bool,
    directed: Option<(Vec<(u32, bool)>, SafetyProperty)>,
    bv: BvBuilder,
    run: ExploreRun,
}

pub(super) fn explore(
    program: &Program,
    k: u32,
    exclude: &HashSet<u64>,
    timeout: Duration,
    solve_vcs: bool,
    collect_paths: bool,
    directed: Option<(Vec<(u32, bool)>, SafetyProperty)>,
) -> ExploreRun {
    let mut eng = Engine {
        program,
        k,
        exclude,
        deadline: Instant::now() + timeout,
        vc_timeout: timeout,
        solve_vcs,
        collect_paths,
        directed,
        bv: BvBuilder::new(),
        run: ExploreRun {
            cex: None,
            stats: BmcStats::default(),
            truncated: false,
            timed_out: false,
            overflowed: false,
            replay_mismatch: false,
            paths: Vec::new(),
            captured: None,
        },
    };
    let entry_fn = &program.functions[program.entry];
    let frame = eng.new_frame(program.entry, &[]);
    let st = SymState {
        frames: vec![frame],
        conds: Vec::new(),
        decisions: Vec::new(),
        cursor: 0,
        inputs: Vec::new(),
        steps: 0,
    };
    let entry = entry_fn.entry_block;
    eng.go(st, entry, 0);
    eng.run
}

impl<'a> Engine<'a> {
    fn stop(&mut self) -> bool {
        if self.run.cex.is_some() || self.run.captured.is_some() || self.run.overflowed {
            return true;
        }
        if Instant::now() >= self.deadline {
            self.run.timed_out = true;
            return true;
        }
        false
    }

    fn new_frame(&mut self, func: usize, args: &[NodeId]) -> SymFrame {
        let f = &self.program.functions[func];
        let zero = self.bv.const_i32(0);
        let mut locals = Vec::with_capacity(f.locals.len());
        for (i, d) in f.locals.iter().enumerate() {
            let v = if i < f.n_params {
                SymValue::Int(args[i])
            } else {
                match d.kind {
                    LocalKind::Scalar => SymValue::Int(zero),
                    LocalKind::Ref => SymValue::Ref(0, zero),
                }
            };
            locals.push(v);
        }
        SymFrame {
            locals,
            arrays: f.arrays.iter().map(|a| vec![zero; a.size]).collect(),
            visits: HashMap::new(),
            ret_dest: None,
            ret_block: 0,
            ret_instr: 0,
        }
    }

    fn end_path(&mut self, st: SymState, truncated: bool) {
        let id = path_id(&st.decisions);
        if self.exclude.contains(&id) {
            return;
        }
        self.run.stats.paths_enumerated += 1;
        if self.run.stats.paths_enumerated > MAX_PATHS {
            self.run.overflowed = true;
        }
        if self.collect_paths {
            self.run.paths.push(SymPath { decisions: st.decisions, id, truncated });
        }
    }

    fn go(&mut self, mut st: SymState, mut block: BlockId, mut idx: usize) {
        loop {
            if self.stop() {
                return;
            }
            st.steps += 1;
            if st.steps > PATH_STEP_CAP {
                self.run.truncated = true;
                self.end_path(st, true);
                return;
            }
            if idx == 0 {
                let frame = st.frames.last_mut().unwrap();
                let v = frame.visits.entry(block).or_insert(0);
                *v += 1;
                if *v > self.k.saturating_add(1) {
                    self.run.truncated = true;
                    self.end_path(st, true);
                    return;
                }
            }
            let bb = &self.program.blocks[block];
            if idx < bb.instrs.len() {
                let loc = Loc { block, instr: idx };
                match self.instr(&mut st, &bb.instrs[idx].clone(), loc) {
                    Ok(Flow::Next) => idx += 1,
                    Ok(Flow::Jump(b, i)) => {
                        block = b;
                        idx = i;
                    }
                    Ok(Flow::End) => {
                        self.run.truncated = true;
                        self.end_path(st, true);
                        return;
                    }
                    Err(PathDead) => {
                        self.end_path(st, false);
                        return;
                    }
                }
                continue;
            }
            let loc = Loc { block, instr: bb.instrs.len() };
            match bb.term.clone() {
                Terminator::Goto(t) => {
                    block = t;
                    idx = 0;
                }
                Terminator::Branch { cond, then_bb, else_bb } => {
                    let c = match self.eval(&mut st, &cond, loc) {
                        Ok(c) => c,
                        Err(PathDead) => {
                            self.end_path(st, false);
                            return;
                        }
                    };
                    let b1 = self.bv.is_nonzero(c);
                    if let Some(v) = self.bv.const_val(b1) {
                        let taken = v == 1;
                        st.decisions.push((block as u32, taken));
                        block = if taken { then_bb } else { else_bb };
                        idx = 0;
                        continue;
                    }
                    if let Some((script, _)) = &self.directed {
                        // follow the scripted decision only
                        let pos = st.decisions.len();
                        let Some(&(site, taken)) = script.get(pos) else {
                            return;
                        };
                        if site != block as u32 {
                            return;
                        }
                        let cnode = if taken { b1 } else { self.bv.not(b1) };
                        st.conds.push(cnode);
                        st.decisions.push((block as u32, taken));
                        block = if taken { then_bb } else { else_bb };
                        idx = 0;
                        continue;
                    }
                    for (taken, target) in [(true, then_bb), (false, else_bb)] {
                        if self.stop() {
                            return;
                        }
                        let mut child = st.clone();
                        let cnode = if taken { b1 } else { self.bv.not(b1) };
                        child.conds.push(cnode);
                        if !self.feasible(&child.conds) {
                            self.run.stats.pruned_infeasible += 1;
                            continue;
                        }
                        child.decisions.push((block as u32, taken));
                        self.go(child, target, 0);
                    }
                    return;
                }
                Terminator::Return(e) => {
                    let v = match e {
                        Some(e) => match self.eval(&mut st, &e, loc) {
                            Ok(v) => v,
                            Err(PathDead) => {
                                self.end_path(st, false);
                                return;
                            }
                        },
                        None => self.bv.const_i32(0),
                    };
                    let frame = st.frames.pop().unwrap();
                    if st.frames.is_empty() {
                        self.end_path(st, false);
                        return;
                    }
                    if let Some(dest) = frame.ret_dest {
                        st.frames.last_mut().unwrap().locals[dest] = SymValue::Int(v);
                    }
                    block = frame.ret_block;
                    idx = frame.ret_instr;
                }
            }
        }
    }

    fn instr(&mut self, st: &mut SymState, instr: &Instr, loc: Loc) -> Result<Flow, PathDead> {
        match instr {
            Instr::Assign(dest, e) => {
                let v = self.eval(st, e, loc)?;
                st.frames.last_mut().unwrap().locals[*dest] = SymValue::Int(v);
                Ok(Flow::Next)
            }
            Instr::ArrayStore(arr, idx_e, val_e) => {
                let i = self.eval(st, idx_e, loc)?;
                let v = self.eval(st, val_e, loc)?;
                self.bounds_fault(st, *arr, i, loc)?;
                let elems =
                    &mut st.frames.last_mut().unwrap().arrays[*arr];
                let mut elems = std::mem::take(elems);
                self.store(&mut elems, i, v);
                st.frames.last_mut().unwrap().arrays[*arr] = elems;
                Ok(Flow::Next)
            }
            Instr::RefNull(r) => {
                let zero = self.bv.const_i32(0);
                st.frames.last_mut().unwrap().locals[*r] = SymValue::Ref(0, zero);
                Ok(Flow::Next)
            }
            Instr::RefMake(r, arr, off_e) => {
                let off = self.eval(st, off_e, loc)?;
                st.frames.last_mut().unwrap().locals[*r] =
                    SymValue::Ref(*arr as u32 + 1, off);
                Ok(Flow::Next)
            }
            Instr::RefStore(r, val_e) => {
                let v = self.eval(st, val_e, loc)?;
                let (region, off) = match st.frames.last().unwrap().locals[*r] {
                    SymValue::Ref(region, off) => (region, off),
                    SymValue::Int(_) => unreachable!("validated ref slot"),
                };
                if region == 0 {
                    let t = self.bv.bool_const(true);
                    self.fault(st, FaultKind::NullDeref, loc, t)?;
                    unreachable!("const-true fault kills the path");
                }
                let arr = region as usize - 1;
                self.bounds_fault(st, arr, off, loc)?;
                let elems = &mut st.frames.last_mut().unwrap().arrays[arr];
                let mut elems = std::mem::take(elems);
                self.store(&mut elems, off, v);
                st.frames.last_mut().unwrap().arrays[arr] = elems;
                Ok(Flow::Next)
            }
            Instr::Input(dest, width) => {
                let w = match width {
                    InputWidth::Word => 32,
                    InputWidth::Byte => 8,
                };
                let var = self.bv.fresh_var(w);
                let tag = match *self.bv.node(var) {
                    Node::Var { tag, .. } => tag,
                    _ => unreachable!(),
                };
                st.inputs.push(InputSite { tag, width: *width, offset: st.cursor });
                st.cursor += width.bytes();
                let v32 = self.bv.zext(var, 32);
                st.frames.last_mut().unwrap().locals[*dest] = SymValue::Int(v32);
                Ok(Flow::Next)
            }
            Instr::Assert(e) => {
                let v = self.eval(st, e, loc)?;
                let zero = self.bv.const_i32(0);
                let is_zero = self.bv.eq(v, zero);
                self.fault(st, FaultKind::AssertViolation, loc, is_zero)?;
                Ok(Flow::Next)
            }
            Instr::Call { dest, func, args } => {
                if st.frames.len() >= CALL_DEPTH {
                    // concrete execution reports BudgetExhausted here; the
                    // path ends without proof, so completeness degrades
                    return Ok(Flow::End);
                }
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(st, a, loc)?);
                }
                let mut frame = self.new_frame(*func, &vals);
                frame.ret_dest = *dest;
                frame.ret_block = loc.block;
                frame.ret_instr = loc.instr + 1;
                st.frames.push(frame);
                Ok(Flow::Jump(self.program.functions[*func].entry_block, 0))
            }
        }
    }

    fn eval(&mut self, st: &mut SymState, e: &Expr, loc: Loc) -> Result<NodeId, PathDead> {
        match e {
            Expr::Const(c) => Ok(self.bv.const_i32(*c)),
            Expr::Var(v) => match st.frames.last().unwrap().locals[*v] {
                SymValue::Int(n) => Ok(n),
                SymValue::Ref(..) => unreachable!("validated scalar slot"),
            },
            Expr::ArrayLoad(arr, idx) => {
                let i = self.eval(st, idx, loc)?;
                self.bounds_fault(st, *arr, i, loc)?;
                let elems = st.frames.last().unwrap().arrays[*arr].clone();
                Ok(self.select(&elems, i))
            }
            Expr::RefLoad(r) => {
                let (region, off) = match st.frames.last().unwrap().locals[*r] {
                    SymValue::Ref(region, off) => (region, off),
                    SymValue::Int(_) => unreachable!("validated ref slot"),
                };
                if region == 0 {
                    let t = self.bv.bool_const(true);
                    self.fault(st, FaultKind::NullDeref, loc, t)?;
                    unreachable!("const-true fault kills the path");
                }
                let arr = region as usize - 1;
                self.bounds_fault(st, arr, off, loc)?;
                let elems = st.frames.last().unwrap().arrays[arr].clone();
                Ok(self.select(&elems, off))
            }
            Expr::Unary(op, a) => {
                let a = self.eval(st, a, loc)?;
                match op {
                    UnOp::Neg => {
                        let a33 = self.bv.sext(a, 33);
                        let zero = self.bv.constant(33, 0);
                        let r = self.bv.sub(zero, a33);
                        self.range_fault(st, r, 33, loc)?;
                        Ok(self.bv.trunc(r, 32))
                    }
                    UnOp::LogicalNot => {
                        let zero = self.bv.const_i32(0);
                        let b = self.bv.eq(a, zero);
                        Ok(self.bv.zext(b, 32))
                    }
                    UnOp::BitNot => Ok(self.bv.not(a)),
                }
            }
            Expr::Binary(op, a, b) => {
                let a = self.eval(st, a, loc)?;
                let b = self.eval(st, b, loc)?;
                self.binop(st, *op, a, b, loc)
            }
        }
    }

    fn binop(
        &mut self,
        st: &mut SymState,
        op: BinOp,
        a: NodeId,
        b: NodeId,
        loc: Loc,
    ) -> Result<NodeId, PathDead> {
        let bool32 = |eng: &mut Self, c: NodeId| eng.bv.zext(c, 32);
        match op {
            BinOp::Add | BinOp::Sub => {
                let a33 = self.bv.sext(a, 33);
                let b33 = self.bv.sext(b, 33);
                let r = if op == BinOp::Add {
                    self.bv.add(a33, b33)
                } else {
                    self.bv.sub(a33, b33)
                };
                self.range_fault(st, r, 33, loc)?;
                Ok(self.bv.trunc(r, 32))
            }
            BinOp::Mul => {
                let a64 = self.bv.sext(a, 64);
                let b64 = self.bv.sext(b, 64);
                let r = self.bv.mul(a64, b64);
                self.range_fault(st, r, 64, loc)?;
                Ok(self.bv.trunc(r, 32))
            }
            BinOp::Div | BinOp::Rem => self.divrem(st, op, a, b, loc),
            BinOp::BitAnd => Ok(self.bv.and(a, b)),
            BinOp::BitOr => Ok(self.bv.or(a, b)),
            BinOp::BitXor => Ok(self.bv.xor(a, b)),
            BinOp::Shl | BinOp::Shr => {
                let m31 = self.bv.const_i32(31);
                let amt = self.bv.and(b, m31);
                Ok(match op {
                    BinOp::Shl => self.bv.shl(a, amt),
                    _ => self.bv.ashr(a, amt),
                })
            }
            BinOp::Eq => {
                let c = self.bv.eq(a, b);
                Ok(bool32(self, c))
            }
            BinOp::Ne => {
                let c = self.bv.ne(a, b);
                Ok(bool32(self, c))
            }
            BinOp::Lt => {
                let c = self.bv.slt(a, b);
                Ok(bool32(self, c))
            }
            BinOp::Le => {
                let c = self.bv.sle(a, b);
                Ok(bool32(self, c))
            }
            BinOp::Gt => {
                let c = self.bv.slt(b, a);
                Ok(bool32(self, c))
            }
            BinOp::Ge => {
                let c = self.bv.sle(b, a);
                Ok(bool32(self, c))
            }
        }
    }

    /// Division and remainder via the multiplication relation
    /// q·d + r = n  ∧  |r| < |d|  ∧  (r = 0 ∨ sign(r) = sign(n)),
    /// guarded by d ≠ 0 and the INT_MIN / −1 overflow check.
    fn divrem(
        &mut self,
        st: &mut SymState,
        op: BinOp,
        n: NodeId,
        d: NodeId,
        loc: Loc,
    ) -> Result<NodeId, PathDead> {
        let zero = self.bv.const_i32(0);
        let dz = self.bv.eq(d, zero);
        self.fault(st, FaultKind::DivByZero, loc, dz)?;
        if op == BinOp::Div {
            let min = self.bv.const_i32(i32::MIN);
            let m1 = self.bv.const_i32(-1);
            let nm = self.bv.eq(n, min);
            let dm = self.bv.eq(d, m1);
            let ov = self.bv.bool_and(nm, dm);
            self.fault(st, FaultKind::SignedOverflow, loc, ov)?;
        }
        // q needs 33 bits so that INT_MIN % -1 (q = 2^31, r = 0) stays
        // representable; the Div case never reaches that q after the
        // overflow guard above.
        let q = self.bv.fresh_var(33);
        let r = self.bv.fresh_var(32);
        let q64 = self.bv.sext(q, 64);
        let d64 = self.bv.sext(d, 64);
        let r64 = self.bv.sext(r, 64);
        let n64 = self.bv.sext(n, 64);
        let prod = self.bv.mul(q64, d64);
        let sum = self.bv.add(prod, r64);
        let def = self.bv.eq(sum, n64);
        st.conds.push(def);
        let abs_r = self.abs33(r);
        let abs_d = self.abs33(d);
        let bounded = self.bv.ult(abs_r, abs_d);
        st.conds.push(bounded);
        let r_zero = self.bv.eq(r, zero);
        let r_neg = self.bv.slt(r, zero);
        let n_neg = self.bv.slt(n, zero);
        let same_sign = self.bv.eq(r_neg, n_neg);
        let sign_ok = self.bv.bool_or(r_zero, same_sign);
        st.conds.push(sign_ok);
        Ok(match op {
            BinOp::Div => self.bv.trunc(q, 32),
            _ => r,
        })
    }

    fn abs33(&mut self, x: NodeId) -> NodeId {
        let zero32 = self.bv.const_i32(0);
        let neg = self.bv.slt(x, zero32);
        let x33 = self.bv.sext(x, 33);
        let zero33 = self.bv.constant(33, 0);
        let nx = self.bv.sub(zero33, x33);
        self.bv.ite(neg, nx, x33)
    }

    /// Emits SignedOverflow / SignedUnderflow obligations for a widened
    /// arithmetic result, mirroring the interpreter's 64-bit range check.
    fn range_fault(
        &mut self,
        st: &mut SymState,
        r: NodeId,
        w: u8,
        loc: Loc,
    ) -> Result<(), PathDead> {
        let max = self.bv.constant(w, i32::MAX as u32 as u64);
        let min = self.bv.constant(w, i32::MIN as i64 as u64);
        let over = self.bv.slt(max, r);
        self.fault(st, FaultKind::SignedOverflow, loc, over)?;
        let under = self.bv.slt(r, min);
        self.fault(st, FaultKind::SignedUnderflow, loc, under)?;
        Ok(())
    }

    fn bounds_fault(
        &mut self,
        st: &mut SymState,
        arr: ArrayId,
        idx: NodeId,
        loc: Loc,
    ) -> Result<(), PathDead> {
        let n = st.frames.last().unwrap().arrays[arr].len();
        let nc = self.bv.const_i32(n as i32);
        // unsigned comparison covers both idx < 0 and idx >= n
        let inb = self.bv.ult(idx, nc);
        let out = self.bv.not(inb);
        self.fault(st, FaultKind::BufferOverflow, loc, out)
    }

    /// Handles one fault obligation: emits (and optionally solves) the VC
    /// `path-conds ∧ cond`, then adds ¬cond to the path. A constantly true
    /// condition ends the path at the error state.
    fn fault(
        &mut self,
        st: &mut SymState,
        kind: FaultKind,
        loc: Loc,
        cond: NodeId,
    ) -> Result<(), PathDead> {
        if self.bv.const_val(cond) == Some(0) {
            return Ok(());
        }
        if let Some((script, prop)) = self.directed.clone() {
            if prop.kind == kind && prop.loc == loc && st.decisions.len() == script.len() {
                let mut conds = st.conds.clone();
                conds.push(cond);
                let formula = self.build_formula(&conds);
                self.run.captured = Some(VerificationCondition {
                    property: prop,
                    bound: self.k,
                    formula,
                    inputs: st.inputs.clone(),
                    input_len: st.cursor,
                });
                return Err(PathDead);
            }
        }
        if self.solve_vcs && !self.exclude.contains(&path_id(&st.decisions)) {
            self.check_vc(st, kind, loc, cond);
            if self.run.cex.is_some() {
                return Err(PathDead);
            }
        }
        if self.bv.const_val(cond) == Some(1) {
            return Err(PathDead);
        }
        let ncond = self.bv.not(cond);
        st.conds.push(ncond);
        Ok(())
    }

    fn build_formula(&mut self, conds: &[NodeId]) -> CnfFormula {
        let mut bl = Blaster::new();
        for &c in conds {
            bl.assert_true(&self.bv, c);
        }
        bl.finish()
    }

    fn solver_budget(&self) -> Duration {
        let remaining = self.deadline.saturating_duration_since(Instant::now());
        self.vc_timeout.min(remaining)
    }

    fn check_vc(&mut self, st: &SymState, kind: FaultKind, loc: Loc, cond: NodeId) {
        self.run.stats.vcs_checked += 1;
        let mut conds = st.conds.clone();
        conds.push(cond);
        let formula = self.build_formula(&conds);
        let mut solver = Solver::from_clauses(formula.num_vars as usize, &formula.clauses);
        match solver.solve(self.solver_budget()) {
            SatResult::Timeout => {
                self.run.stats.timeouts += 1;
                self.run.timed_out = true;
            }
            SatResult::Unsat => self.run.stats.unsat += 1,
            SatResult::Sat(model) => {
                self.run.stats.sat += 1;
                let input = decode_input(&formula, &model, &st.inputs, st.cursor);
                match exec::replay(self.program, &input, kind, loc) {
                    Ok(_) => {
                        let (_, trace) =
                            exec::run_traced(self.program, &input, exec::DEFAULT_STEP_BUDGET);
                        let depth = trace.len() as u32;
                        self.run.cex = Some(Counterexample {
                            input,
                            trace,
                            property: SafetyProperty { kind, loc },
                            depth,
                        });
                    }
                    Err(_) => {
                        // an encoder/solver inconsistency: never report an
                        // unconfirmed counterexample
                        self.run.replay_mismatch = true;
                    }
                }
            }
        }
    }

    fn feasible(&mut self, conds: &[NodeId]) -> bool {
        if conds.iter().all(|&c| self.bv.const_val(c) == Some(1)) {
            return true;
        }
        let formula = self.build_formula(conds);
        let mut solver = Solver::from_clauses(formula.num_vars as usize, &formula.clauses);
        match solver.solve(self.solver_budget()) {
            SatResult::Unsat => false,
            // on timeout, conservatively keep exploring the arm
            _ => true,
        }
    }

    fn select(&mut self, elems: &[NodeId], idx: NodeId) -> NodeId {
        if let Some(c) = self.bv.const_val(idx) {
            return elems[c as usize];
        }
        let mut acc = elems[0];
        for (j, &e) in elems.iter().enumerate().skip(1) {
            let jc = self.bv.const_i32(j as i32);
            let hit = self.bv.eq(idx, jc);
            acc = self.bv.ite(hit, e, acc);
        }
        acc
    }

    fn store(&mut self, elems: &mut [NodeId], idx: NodeId, val: NodeId) {
        if let Some(c) = self.bv.const_val(idx) {
            elems[c as usize] = val;
            return;
        }
        for (j, slot) in elems.iter_mut().enumerate() {
            let jc = self.bv.const_i32(j as i32);
            let hit = self.bv.eq(idx, jc);
            *slot = self.bv.ite(hit, val, *slot);
        }
    }
}

enum Flow {
    Next,
    Jump(BlockId, usize),
    End,
}

fn decode_input(
    formula: &CnfFormula,
    model: &[bool],
    inputs: &[InputSite],
    len: usize,
) -> Vec<u8> {
    let mut out = vec![0u8; len];
    for site in inputs {
        let val = match formula.var_bits.get(&site.tag) {
            Some(lits) => formula.decode_bits(model, lits),
            None => 0, // input never reached the cone of influence
        };
        for j in 0..site.width.bytes() {
            out[site.offset + j] = (val >> (8 * j)) as u8;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mini_ir::parse_program;

    #[test]
    fn straight_line_program_has_one_path() {
        let p = parse_program("fn main() { i32 x; x = 1; }").unwrap();
        let paths = enumerate_paths(&p, 1, &HashSet::new());
        assert_eq!(paths.len(), 1);
        assert!(paths[0].decisions.is_empty());
    }

    #[test]
    fn excluding_both_paths_yields_empty_stream() {
        let src = "fn main() { i32 x; x = input(); if (x > 0) { x = 1; } else { x = 2; } }";
        let p = parse_program(src).unwrap();
        let all = enumerate_paths(&p, 1, &HashSet::new());
        assert_eq!(all.len(), 2);
        let exclude: HashSet<u64> = all.iter().map(|p| p.id).collect();
        assert!(enumerate_paths(&p, 1, &exclude).is_empty());
    }

    #[test]
    fn loop_paths_truncated_at_k() {
        // loop runs up to 10 iterations; with k = 5 only iteration counts
        // 0..=5 survive as paths (the 6th attempt is truncated)
        let src = "fn main() {\n i32 n;\n i32 i;\n n = input();\n i = 0;\n \
                   while (i < n) { i = i + 1; }\n}";
        let p = parse_program(src).unwrap();
        let paths = enumerate_paths(&p, 5, &HashSet::new());
        let complete: Vec<_> = paths.iter().filter(|p| !p.truncated).collect();
        // i < n is still satisfiable after 5 iterations, so one truncated
        // path exists alongside the 6 complete ones (0..=5 iterations)
        assert_eq!(complete.len(), 6);
        assert_eq!(paths.len() - complete.len(), 1);
    }

    #[test]
    fn infeasible_arm_is_pruned() {
        let src = "fn main() { i32 x; x = 3; if (x == 4) { x = 0; } }";
        let p = parse_program(src).unwrap();
        // branch folds constant, so only the else path exists
        let paths = enumerate_paths(&p, 1, &HashSet::new());
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].decisions, vec![(paths[0].decisions[0].0, false)]);
    }

    #[test]
    fn encode_yields_satisfiable_vc_for_real_fault() {
        let src = "fn main() { i32 x; x = input(); if (x > 10) { assert(x < 20); } }";
        let p = parse_program(src).unwrap();
        let out = exec::run(&p, &25i32.to_le_bytes(), 1_000_000);
        let (kind, loc) = match out.status {
            exec::ExecStatus::Fault { kind, loc } => (kind, loc),
            other => panic!("expected fault, got {other:?}"),
        };
        let vc = encode(&p, &out.path, SafetyProperty { kind, loc }).unwrap();
        let mut solver =
            Solver::from_clauses(vc.formula.num_vars as usize, &vc.formula.clauses);
        match solver.solve(Duration::from_secs(30)) {
            SatResult::Sat(model) => {
                let input = vc.decode_model(&model);
                exec::replay(&p, &input, kind, loc).unwrap();
            }
            other => panic!("expected Sat, got {other:?}"),
        }
    }

    #[test]
    fn encode_tautological_guard_is_unsat() {
        let src = "fn main() { i32 x; x = input(); assert(1); }";
        let p = parse_program(src).unwrap();
        // assert(1) never faults; the obligation is constant-false so the
        // property is never reachable along any path
        let out = exec::run(&p, &[], 1_000_000);
        let prop = SafetyProperty {
            kind: FaultKind::AssertViolation,
            loc: Loc { block: 0, instr: 2 },
        };
        assert!(encode(&p, &out.path, prop).is_err());
    }
}
