//! Recursive-descent parser producing the AST that lowering consumes.

use super::lexer::{lex, SpannedTok, Tok};
use super::{BinOp, FrontendError, InputWidth, UnOp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstFunction {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<AStmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AStmt {
    DeclScalar(String),
    DeclArray(String, i64),
    DeclRef(String),
    Assign(String, AExpr),
    ArrayStore(String, AExpr, AExpr),
    RefNull(String),
    RefMake(String, String, AExpr),
    RefStore(String, AExpr),
    Input(String, InputWidth),
    Assert(AExpr),
    Call { dest: Option<String>, func: String, args: Vec<AExpr> },
    Return(Option<AExpr>),
    If { cond: AExpr, then_body: Vec<AStmt>, else_body: Vec<AStmt> },
    While { cond: AExpr, body: Vec<AStmt> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AExpr {
    Num(i64),
    Var(String),
    Index(String, Box<AExpr>),
    Deref(String),
    Un(UnOp, Box<AExpr>),
    Bin(BinOp, Box<AExpr>, Box<AExpr>),
}

pub fn parse_source(src: &str) -> Result<Vec<AstFunction>, FrontendError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut funcs = Vec::new();
    while p.peek() != &Tok::Eof {
        funcs.push(p.function()?);
    }
    Ok(funcs)
}

struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: &str) -> FrontendError {
        let st = &self.toks[self.pos];
        FrontendError::Parse { line: st.line, col: st.col, msg: msg.to_string() }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), FrontendError> {
        if self.peek() == &t {
            self.bump();
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}, found {:?}", self.peek())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, FrontendError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.err(&format!("expected {what}"))),
        }
    }

    fn function(&mut self) -> Result<AstFunction, FrontendError> {
        self.expect(Tok::KwFn, "`fn`")?;
        let name = self.ident("function name")?;
        self.expect(Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                self.expect(Tok::KwI32, "`i32` parameter type")?;
                params.push(self.ident("parameter name")?);
                if self.peek() == &Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        let body = self.block()?;
        Ok(AstFunction { name, params, body })
    }

    fn block(&mut self) -> Result<Vec<AStmt>, FrontendError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while self.peek() != &Tok::RBrace {
            if self.peek() == &Tok::Eof {
                return Err(self.err("unexpected end of input inside block"));
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(stmts)
    }

    fn stmt(&mut self) -> Result<AStmt, FrontendError> {
        match self.peek().clone() {
            Tok::KwI32 => {
                self.bump();
                if self.peek() == &Tok::LBracket {
                    // i32[N] name;
                    self.bump();
                    let size = match self.bump() {
                        Tok::Int(n) => n,
                        _ => return Err(self.err("expected constant array size")),
                    };
                    self.expect(Tok::RBracket, "`]`")?;
                    let name = self.ident("array name")?;
                    self.expect(Tok::Semi, "`;`")?;
                    Ok(AStmt::DeclArray(name, size))
                } else {
                    let name = self.ident("variable name")?;
                    self.expect(Tok::Semi, "`;`")?;
                    Ok(AStmt::DeclScalar(name))
                }
            }
            Tok::KwRef => {
                self.bump();
                let name = self.ident("ref name")?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(AStmt::DeclRef(name))
            }
            Tok::KwIf => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let then_body = self.block()?;
                let else_body = if self.peek() == &Tok::KwElse {
                    self.bump();
                    self.block()?
                } else {
                    Vec::new()
                };
                Ok(AStmt::If { cond, then_body, else_body })
            }
            Tok::KwWhile => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                let body = self.block()?;
                Ok(AStmt::While { cond, body })
            }
            Tok::KwAssert => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(AStmt::Assert(e))
            }
            Tok::KwReturn => {
                self.bump();
                if self.peek() == &Tok::Semi {
                    self.bump();
                    Ok(AStmt::Return(None))
                } else {
                    let e = self.expr()?;
                    self.expect(Tok::Semi, "`;`")?;
                    Ok(AStmt::Return(Some(e)))
                }
            }
            Tok::Star => {
                // *r = expr;
                self.bump();
                let name = self.ident("ref name after `*`")?;
                self.expect(Tok::Assign, "`=`")?;
                let e = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(AStmt::RefStore(name, e))
            }
            Tok::Ident(name) => {
                match self.peek2().clone() {
                    Tok::LBracket => {
                        self.bump();
                        self.bump();
                        let idx = self.expr()?;
                        self.expect(Tok::RBracket, "`]`")?;
                        self.expect(Tok::Assign, "`=`")?;
                        let val = self.expr()?;
                        self.expect(Tok::Semi, "`;`")?;
                        Ok(AStmt::ArrayStore(name, idx, val))
                    }
                    Tok::LParen => {
                        // bare call statement
                        self.bump();
                        let (func, args) = self.call_tail()?;
                        self.expect(Tok::Semi, "`;`")?;
                        Ok(AStmt::Call { dest: None, func, args })
                    }
                    Tok::Assign => {
                        self.bump();
                        self.bump();
                        self.assign_rhs(name)
                    }
                    _ => Err(self.err("expected `=`, `[` or `(` after identifier")),
                }
            }
            _ => Err(self.err("expected statement")),
        }
    }

    /// Everything after `name =`, covering the special RHS forms.
    fn assign_rhs(&mut self, dest: String) -> Result<AStmt, FrontendError> {
        match self.peek().clone() {
            Tok::KwInput => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(AStmt::Input(dest, InputWidth::Word))
            }
            Tok::KwInputByte => {
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(AStmt::Input(dest, InputWidth::Byte))
            }
            Tok::KwNull => {
                self.bump();
                self.expect(Tok::Semi, "`;`")?;
                Ok(AStmt::RefNull(dest))
            }
            Tok::Amp => {
                self.bump();
                let arr = self.ident("array name after `&`")?;
                self.expect(Tok::LBracket, "`[`")?;
                let off = self.expr()?;
                self.expect(Tok::RBracket, "`]`")?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(AStmt::RefMake(dest, arr, off))
            }
            Tok::Ident(_) if self.peek2() == &Tok::LParen => {
                let (func, args) = self.call_tail()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(AStmt::Call { dest: Some(dest), func, args })
            }
            _ => {
                let e = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(AStmt::Assign(dest, e))
            }
        }
    }

    fn call_tail(&mut self) -> Result<(String, Vec<AExpr>), FrontendError> {
        let func = self.ident("function name")?;
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                args.push(self.expr()?);
                if self.peek() == &Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok((func, args))
    }

    // Precedence climbing, lowest first: | ^ & (==/!=) (< <= > >=) (<< >>) (+ -) (* / %) unary.
    fn expr(&mut self) -> Result<AExpr, FrontendError> {
        self.bin_level(0)
    }

    fn bin_level(&mut self, level: usize) -> Result<AExpr, FrontendError> {
        const LEVELS: &[&[(Tok, BinOp)]] = &[
            &[(Tok::Pipe, BinOp::BitOr)],
            &[(Tok::Caret, BinOp::BitXor)],
            &[(Tok::Amp, BinOp::BitAnd)],
            &[(Tok::EqEq, BinOp::Eq), (Tok::NotEq, BinOp::Ne)],
            &[
                (Tok::Lt, BinOp::Lt),
                (Tok::Le, BinOp::Le),
                (Tok::Gt, BinOp::Gt),
                (Tok::Ge, BinOp::Ge),
            ],
            &[(Tok::Shl, BinOp::Shl), (Tok::Shr, BinOp::Shr)],
            &[(Tok::Plus, BinOp::Add), (Tok::Minus, BinOp::Sub)],
            &[(Tok::Star, BinOp::Mul), (Tok::Slash, BinOp::Div), (Tok::Percent, BinOp::Rem)],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.bin_level(level + 1)?;
        loop {
            let mut matched = None;
            for (tok, op) in LEVELS[level] {
                if self.peek() == tok {
                    matched = Some(*op);
                    break;
                }
            }
            match matched {
                Some(op) => {
                    self.bump();
                    let rhs = self.bin_level(level + 1)?;
                    lhs = AExpr::Bin(op, Box::new(lhs), Box::new(rhs));
                }
                None => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<AExpr, FrontendError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(AExpr::Un(UnOp::Neg, Box::new(self.unary()?)))
            }
            Tok::Bang => {
                self.bump();
                Ok(AExpr::Un(UnOp::LogicalNot, Box::new(self.unary()?)))
            }
            Tok::Tilde => {
                self.bump();
                Ok(AExpr::Un(UnOp::BitNot, Box::new(self.unary()?)))
            }
            Tok::Star => {
                self.bump();
                let name = self.ident("ref name after `*`")?;
                Ok(AExpr::Deref(name))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<AExpr, FrontendError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(AExpr::Num(n))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek() == &Tok::LBracket {
                    self.bump();
                    let idx = self.expr()?;
                    self.expect(Tok::RBracket, "`]`")?;
                    Ok(AExpr::Index(name, Box::new(idx)))
                } else if self.peek() == &Tok::LParen {
                    Err(self.err("calls are statements, not expressions"))
                } else {
                    Ok(AExpr::Var(name))
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.err("expected expression")),
        }
    }
}
