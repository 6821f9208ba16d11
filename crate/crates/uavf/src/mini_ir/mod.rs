//! Textual frontend and in-memory representation of the target language.
//!
//! Source text (`.uir` files) is parsed into an AST, validated, and lowered
//! to a per-function control-flow graph of basic blocks. All scalar values
//! are 32-bit two's complement; array sizes are static positive constants.
//! See `docs/grammar.md` for the concrete grammar.

mod lexer;
mod parser;
mod lower;
mod pretty;
mod threshold;

pub use parser::parse_source;
pub use pretty::pretty_print;
pub use threshold::{compute_completeness_threshold, LoopBound, ThresholdInfo};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VarId = usize;
pub type ArrayId = usize;
pub type BlockId = usize;
pub type FuncId = usize;

/// Maximum static array size accepted by validation.
pub const MAX_ARRAY_SIZE: i64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    BitAnd,
    BitOr,
    BitXor,
    Shl,
    Shr,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    /// Arithmetic negation (checked against the i32 range).
    Neg,
    /// Logical not: `!x` is 1 when x == 0, else 0.
    LogicalNot,
    /// Bitwise complement.
    BitNot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InputWidth {
    /// Four little-endian bytes per read.
    Word,
    /// One byte, zero-extended.
    Byte,
}

impl InputWidth {
    pub fn bytes(self) -> usize {
        match self {
            InputWidth::Word => 4,
            InputWidth::Byte => 1,
        }
    }
}

/// Expression over 32-bit values, evaluated left-to-right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(i32),
    Var(VarId),
    /// Load from a function-local array at a computed index.
    ArrayLoad(ArrayId, Box<Expr>),
    /// Load through a nullable reference variable.
    RefLoad(VarId),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instr {
    Assign(VarId, Expr),
    ArrayStore(ArrayId, Expr, Expr),
    /// `r = null;` — region 0 is the null region.
    RefNull(VarId),
    /// `r = &a[offset];`
    RefMake(VarId, ArrayId, Expr),
    /// `*r = value;`
    RefStore(VarId, Expr),
    Input(VarId, InputWidth),
    Assert(Expr),
    Call {
        dest: Option<VarId>,
        func: FuncId,
        args: Vec<Expr>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Terminator {
    Goto(BlockId),
    Branch {
        cond: Expr,
        then_bb: BlockId,
        else_bb: BlockId,
    },
    Return(Option<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicBlock {
    pub func: FuncId,
    pub instrs: Vec<Instr>,
    pub term: Terminator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalKind {
    Scalar,
    Ref,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalDecl {
    pub name: String,
    pub kind: LocalKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayDecl {
    pub name: String,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub n_params: usize,
    pub locals: Vec<LocalDecl>,
    pub arrays: Vec<ArrayDecl>,
    pub entry_block: BlockId,
    /// Loop header blocks in source order, used to line CFG loops up with
    /// the AST-level threshold analysis.
    pub loop_headers: Vec<BlockId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaultKind {
    AssertViolation,
    BufferOverflow,
    DivByZero,
    SignedOverflow,
    SignedUnderflow,
    NullDeref,
}

impl std::fmt::Display for FaultKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FaultKind::AssertViolation => "assert-violation",
            FaultKind::BufferOverflow => "buffer-overflow",
            FaultKind::DivByZero => "div-by-zero",
            FaultKind::SignedOverflow => "signed-overflow",
            FaultKind::SignedUnderflow => "signed-underflow",
            FaultKind::NullDeref => "null-deref",
        };
        f.write_str(s)
    }
}

/// Location of an instruction: block id plus index within the block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Loc {
    pub block: BlockId,
    pub instr: usize,
}

impl std::fmt::Display for Loc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "bb{}:{}", self.block, self.instr)
    }
}

/// An implicit or explicit safety property attached to an instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SafetyProperty {
    pub kind: FaultKind,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub functions: Vec<Function>,
    pub entry: FuncId,
    pub blocks: Vec<BasicBlock>,
    /// Outgoing edge ids per block, parallel to the terminator's successor
    /// order (goto: one, branch: then/else).
    pub edge_ids: Vec<Vec<u32>>,
    pub total_edges: u32,
    /// AST kept alongside the CFG for pretty-printing and loop analysis.
    pub ast: Vec<parser::AstFunction>,
}

impl Program {
    pub fn block(&self, id: BlockId) -> &BasicBlock {
        &self.blocks[id]
    }

    pub fn function_of_block(&self, id: BlockId) -> &Function {
        &self.functions[self.blocks[id].func]
    }

    /// Successor blocks of `id` in edge order.
    pub fn successors(&self, id: BlockId) -> Vec<BlockId> {
        match &self.blocks[id].term {
            Terminator::Goto(t) => vec![*t],
            Terminator::Branch { then_bb, else_bb, .. } => vec![*then_bb, *else_bb],
            Terminator::Return(_) => vec![],
        }
    }

    /// All safety properties implied by instruction opcodes, plus explicit
    /// asserts, in (block, instr) order.
    pub fn properties(&self) -> Vec<SafetyProperty> {
        let mut out = Vec::new();
        for (bid, block) in self.blocks.iter().enumerate() {
            for (i, instr) in block.instrs.iter().enumerate() {
                let loc = Loc { block: bid, instr: i };
                let mut kinds = Vec::new();
                let mut exprs: Vec<&Expr> = Vec::new();
                match instr {
                    Instr::Assign(_, e) => exprs.push(e),
                    Instr::ArrayStore(_, idx, val) => {
                        kinds.push(FaultKind::BufferOverflow);
                        exprs.push(idx);
                        exprs.push(val);
                    }
                    Instr::RefMake(_, _, off) => exprs.push(off),
                    Instr::RefStore(_, val) => {
                        kinds.push(FaultKind::NullDeref);
                        kinds.push(FaultKind::BufferOverflow);
                        exprs.push(val);
                    }
                    Instr::Assert(e) => {
                        kinds.push(FaultKind::AssertViolation);
                        exprs.push(e);
                    }
                    Instr::Call { args, .. } => exprs.extend(args.iter()),
                    Instr::RefNull(_) | Instr::Input(_, _) => {}
                }
                for e in exprs {
                    collect_expr_kinds(e, &mut kinds);
                }
                kinds.sort_by_key(|k| format!("{k:?}"));
                kinds.dedup();
                for kind in kinds {
                    out.push(SafetyProperty { kind, loc });
                }
            }
        }
        out
    }
}

fn collect_expr_kinds(e: &Expr, kinds: &mut Vec<FaultKind>) {
    match e {
        Expr::Const(_) | Expr::Var(_) => {}
        Expr::ArrayLoad(_, idx) => {
            kinds.push(FaultKind::BufferOverflow);
            collect_expr_kinds(idx, kinds);
        }
        Expr::RefLoad(_) => {
            kinds.push(FaultKind::NullDeref);
            kinds.push(FaultKind::BufferOverflow);
        }
        Expr::Unary(op, a) => {
            if *op == UnOp::Neg {
                kinds.push(FaultKind::SignedOverflow);
            }
            collect_expr_kinds(a, kinds);
        }
        Expr::Binary(op, a, b) => {
            match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul => {
                    kinds.push(FaultKind::SignedOverflow);
                    kinds.push(FaultKind::SignedUnderflow);
                }
                BinOp::Div | BinOp::Rem => {
                    kinds.push(FaultKind::DivByZero);
                    kinds.push(FaultKind::SignedOverflow);
                }
                _ => {}
            }
            collect_expr_kinds(a, kinds);
            collect_expr_kinds(b, kinds);
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("validation error: {0}")]
    Validate(String),
}

/// Parse and validate a source text into a lowered [`Program`].
pub fn parse_program(source: &str) -> Result<Program, FrontendError> {
    let ast = parse_source(source)?;
    lower::lower(ast)
}
