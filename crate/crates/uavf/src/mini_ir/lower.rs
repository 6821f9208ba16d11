//! AST validation and lowering to the basic-block CFG.

use std::collections::HashMap;

use super::parser::{AExpr, AStmt, AstFunction};
use super::{
    ArrayDecl, ArrayId, BasicBlock, BlockId, Expr, FrontendError, FuncId, Function, Instr,
    LocalDecl, LocalKind, Program, Terminator, UnOp, VarId, MAX_ARRAY_SIZE,
};

#[derive(Clone, Copy)]
enum Sym {
    Scalar(VarId),
    Ref(VarId),
    Array(ArrayId),
}

pub fn lower(ast: Vec<AstFunction>) -> Result<Program, FrontendError> {
    let mut sigs: HashMap<String, (FuncId, usize)> = HashMap::new();
    for (i, f) in ast.iter().enumerate() {
        if sigs.insert(f.name.clone(), (i, f.params.len())).is_some() {
            return Err(FrontendError::Validate(format!(
                "duplicate function `{}`",
                f.name
            )));
        }
    }
    let entry = match sigs.get("main") {
        Some((id, 0)) => *id,
        Some(_) => {
            return Err(FrontendError::Validate(
                "entry function `main` must take no parameters".into(),
            ))
        }
        None => {
            return Err(FrontendError::Validate(
                "missing entry function `main`".into(),
            ))
        }
    };

    let mut blocks: Vec<BasicBlock> = Vec::new();
    let mut functions: Vec<Function> = Vec::new();
    for (fid, f) in ast.iter().enumerate() {
        let mut b = FnBuilder {
            fid,
            blocks: &mut blocks,
            sigs: &sigs,
            syms: HashMap::new(),
            locals: Vec::new(),
            arrays: Vec::new(),
            loop_headers: Vec::new(),
        };
        for p in &f.params {
            b.declare_scalar(p)?;
        }
        let entry_block = b.new_block();
        let out = b.lower_body(&f.body, entry_block)?;
        if let Some(tail) = out {
            b.blocks[tail].term = Terminator::Return(None);
        }
        functions.push(Function {
            name: f.name.clone(),
            n_params: f.params.len(),
            locals: b.locals,
            arrays: b.arrays,
            entry_block,
            loop_headers: b.loop_headers,
        });
    }

    // Edge numbering over every terminator successor slot.
    let mut edge_ids = Vec::with_capacity(blocks.len());
    let mut next = 0u32;
    for b in &blocks {
        let n = match &b.term {
            Terminator::Goto(_) => 1,
            Terminator::Branch { .. } => 2,
            Terminator::Return(_) => 0,
        };
        let ids: Vec<u32> = (0..n).map(|k| next + k).collect();
        next += n;
        edge_ids.push(ids);
    }

    let program = Program {
        functions,
        entry,
        blocks,
        edge_ids,
        total_edges: next,
        ast,
    };
    check_reachability(&program)?;
    Ok(program)
}

fn check_reachability(p: &Program) -> Result<(), FrontendError> {
    for f in &p.functions {
        let mine: Vec<BlockId> = (0..p.blocks.len())
            .filter(|&b| p.functions[p.blocks[b].func].name == f.name)
            .collect();
        let mut seen = vec![false; p.blocks.len()];
        let mut stack = vec![f.entry_block];
        seen[f.entry_block] = true;
        while let Some(b) = stack.pop() {
            for s in p.successors(b) {
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        if let Some(&b) = mine.iter().find(|&&b| !seen[b]) {
            return Err(FrontendError::Validate(format!(
                "unreachable block bb{b} in function `{}`",
                f.name
            )));
        }
    }
    Ok(())
}

struct FnBuilder<'a> {
    fid: FuncId,
    blocks: &'a mut Vec<BasicBlock>,
    sigs: &'a HashMap<String, (FuncId, usize)>,
    syms: HashMap<String, Sym>,
    locals: Vec<LocalDecl>,
    arrays: Vec<ArrayDecl>,
    loop_headers: Vec<BlockId>,
}

impl FnBuilder<'_> {
    fn new_block(&mut self) -> BlockId {
        self.blocks.push(BasicBlock {
            func: self.fid,
            instrs: Vec::new(),
            term: Terminator::Return(None),
        });
        self.blocks.len() - 1
    }

    fn declare_scalar(&mut self, name: &str) -> Result<VarId, FrontendError> {
        self.check_fresh(name)?;
        let id = self.locals.len();
        self.locals.push(LocalDecl { name: name.to_string(), kind: LocalKind::Scalar });
        self.syms.insert(name.to_string(), Sym::Scalar(id));
        Ok(id)
    }

    fn check_fresh(&self, name: &str) -> Result<(), FrontendError> {
        if self.syms.contains_key(name) {
            Err(FrontendError::Validate(format!("`{name}` is already declared")))
        } else {
            Ok(())
        }
    }

    fn scalar(&self, name: &str) -> Result<VarId, FrontendError> {
        match self.syms.get(name) {
            Some(Sym::Scalar(v)) => Ok(*v),
            Some(_) => Err(FrontendError::Validate(format!(
                "`{name}` is not a scalar variable"
            ))),
            None => Err(FrontendError::Validate(format!("`{name}` is not declared"))),
        }
    }

    fn ref_var(&self, name: &str) -> Result<VarId, FrontendError> {
        match self.syms.get(name) {
            Some(Sym::Ref(v)) => Ok(*v),
            Some(_) => Err(FrontendError::Validate(format!("`{name}` is not a ref"))),
            None => Err(FrontendError::Validate(format!("`{name}` is not declared"))),
        }
    }

    fn array(&self, name: &str) -> Result<ArrayId, FrontendError> {
        match self.syms.get(name) {
            Some(Sym::Array(a)) => Ok(*a),
            Some(_) => Err(FrontendError::Validate(format!("`{name}` is not an array"))),
            None => Err(FrontendError::Validate(format!("`{name}` is not declared"))),
        }
    }

    /// Lowers a statement list into `cur`; returns the fall-through block, or
    /// `None` when every path ends in `return`.
    fn lower_body(
        &mut self,
        stmts: &[AStmt],
        mut cur: BlockId,
    ) -> Result<Option<BlockId>, FrontendError> {
        for (i, stmt) in stmts.iter().enumerate() {
            let trailing = i + 1 < stmts.len();
            match stmt {
                AStmt::DeclScalar(name) => {
                    self.declare_scalar(name)?;
                }
                AStmt::DeclArray(name, size) => {
                    self.check_fresh(name)?;
                    if *size <= 0 || *size > MAX_ARRAY_SIZE {
                        return Err(FrontendError::Validate(format!(
                            "array `{name}` size must be a positive constant up to {MAX_ARRAY_SIZE}"
                        )));
                    }
                    let id = self.arrays.len();
                    self.arrays.push(ArrayDecl { name: name.clone(), size: *size as usize });
                    self.syms.insert(name.clone(), Sym::Array(id));
                }
                AStmt::DeclRef(name) => {
                    self.check_fresh(name)?;
                    let id = self.locals.len();
                    self.locals.push(LocalDecl { name: name.clone(), kind: LocalKind::Ref });
                    self.syms.insert(name.clone(), Sym::Ref(id));
                }
                AStmt::Assign(name, e) => {
                    let dest = self.scalar(name)?;
                    let e = self.expr(e)?;
                    self.blocks[cur].instrs.push(Instr::Assign(dest, e));
                }
                AStmt::ArrayStore(name, idx, val) => {
                    let arr = self.array(name)?;
                    let idx = self.expr(idx)?;
                    let val = self.expr(val)?;
                    self.blocks[cur].instrs.push(Instr::ArrayStore(arr, idx, val));
                }
                AStmt::RefNull(name) => {
                    let r = self.ref_var(name)?;
                    self.blocks[cur].instrs.push(Instr::RefNull(r));
                }
                AStmt::RefMake(name, arr, off) => {
                    let r = self.ref_var(name)?;
                    let a = self.array(arr)?;
                    let off = self.expr(off)?;
                    self.blocks[cur].instrs.push(Instr::RefMake(r, a, off));
                }
                AStmt::RefStore(name, val) => {
                    let r = self.ref_var(name)?;
                    let val = self.expr(val)?;
                    self.blocks[cur].instrs.push(Instr::RefStore(r, val));
                }
                AStmt::Input(name, width) => {
                    let dest = self.scalar(name)?;
                    self.blocks[cur].instrs.push(Instr::Input(dest, *width));
                }
                AStmt::Assert(e) => {
                    let e = self.expr(e)?;
                    self.blocks[cur].instrs.push(Instr::Assert(e));
                }
                AStmt::Call { dest, func, args } => {
                    let dest = match dest {
                        Some(d) => Some(self.scalar(d)?),
                        None => None,
                    };
                    let (fid, arity) = *self.sigs.get(func).ok_or_else(|| {
                        FrontendError::Validate(format!("call to undeclared function `{func}`"))
                    })?;
                    if args.len() != arity {
                        return Err(FrontendError::Validate(format!(
                            "`{func}` takes {arity} arguments, got {}",
                            args.len()
                        )));
                    }
                    let args = args
                        .iter()
                        .map(|a| self.expr(a))
                        .collect::<Result<Vec<_>, _>>()?;
                    self.blocks[cur].instrs.push(Instr::Call { dest, func: fid, args });
                }
                AStmt::Return(e) => {
                    let e = match e {
                        Some(e) => Some(self.expr(e)?),
                        None => None,
                    };
                    self.blocks[cur].term = Terminator::Return(e);
                    if trailing {
                        return Err(FrontendError::Validate(
                            "unreachable code after `return`".into(),
                        ));
                    }
                    return Ok(None);
                }
                AStmt::If { cond, then_body, else_body } => {
                    let cond = self.expr(cond)?;
                    let then_b = self.new_block();
                    let else_b = if else_body.is_empty() {
                        None
                    } else {
                        Some(self.new_block())
                    };
                    let t_out = self.lower_body(then_body, then_b)?;
                    let e_out = match else_b {
                        Some(b) => self.lower_body(else_body, b)?,
                        None => None,
                    };
                    let falls = t_out.is_some() || e_out.is_some() || else_b.is_none();
                    if !falls {
                        self.blocks[cur].term = Terminator::Branch {
                            cond,
                            then_bb: then_b,
                            else_bb: else_b.unwrap(),
                        };
                        if trailing {
                            return Err(FrontendError::Validate(
                                "unreachable code after `if` whose branches both return".into(),
                            ));
                        }
                        return Ok(None);
                    }
                    let join = self.new_block();
                    self.blocks[cur].term = Terminator::Branch {
                        cond,
                        then_bb: then_b,
                        else_bb: else_b.unwrap_or(join),
                    };
                    if let Some(t) = t_out {
                        self.blocks[t].term = Terminator::Goto(join);
                    }
                    if let Some(e) = e_out {
                        self.blocks[e].term = Terminator::Goto(join);
                    }
                    cur = join;
                }
                AStmt::While { cond, body } => {
                    let cond = self.expr(cond)?;
                    let header = self.new_block();
                    self.loop_headers.push(header);
                    self.blocks[cur].term = Terminator::Goto(header);
                    let body_b = self.new_block();
                    let exit = self.new_block();
                    self.blocks[header].term = Terminator::Branch {
                        cond,
                        then_bb: body_b,
                        else_bb: exit,
                    };
                    if let Some(tail) = self.lower_body(body, body_b)? {
                        self.blocks[tail].term = Terminator::Goto(header);
                    }
                    cur = exit;
                }
            }
        }
        Ok(Some(cur))
    }

    fn expr(&mut self, e: &AExpr) -> Result<Expr, FrontendError> {
        match e {
            AExpr::Num(n) => self.const_i32(*n),
            AExpr::Var(name) => Ok(Expr::Var(self.scalar(name)?)),
            AExpr::Index(name, idx) => {
                let a = self.array(name)?;
                Ok(Expr::ArrayLoad(a, Box::new(self.expr(idx)?)))
            }
            AExpr::Deref(name) => Ok(Expr::RefLoad(self.ref_var(name)?)),
            AExpr::Un(UnOp::Neg, inner) => {
                // fold `-literal` so i32::MIN is writable
                if let AExpr::Num(n) = **inner {
                    return self.const_i32(-n);
                }
                Ok(Expr::Unary(UnOp::Neg, Box::new(self.expr(inner)?)))
            }
            AExpr::Un(op, inner) => Ok(Expr::Unary(*op, Box::new(self.expr(inner)?))),
            AExpr::Bin(op, a, b) => Ok(Expr::Binary(
                *op,
                Box::new(self.expr(a)?),
                Box::new(self.expr(b)?),
            )),
        }
    }

    fn const_i32(&self, n: i64) -> Result<Expr, FrontendError> {
        if n < i32::MIN as i64 || n > i32::MAX as i64 {
            return Err(FrontendError::Validate(format!(
                "integer literal {n} outside the 32-bit signed range"
            )));
        }
        Ok(Expr::Const(n as i32))
    }
}
