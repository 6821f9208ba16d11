//! Pretty-printer over the AST. Output reparses to a structurally
//! identical program (expressions are fully parenthesized).

use super::parser::{AExpr, AStmt, AstFunction};
use super::{BinOp, InputWidth, Program, UnOp};

pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    for f in &p.ast {
        fmt_function(f, &mut out);
        out.push('\n');
    }
    out
}

fn fmt_function(f: &AstFunction, out: &mut String) {
    out.push_str("fn ");
    out.push_str(&f.name);
    out.push('(');
    for (i, p) in f.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str("i32 ");
        out.push_str(p);
    }
    out.push_str(") {\n");
    fmt_body(&f.body, 1, out);
    out.push_str("}\n");
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn fmt_body(stmts: &[AStmt], depth: usize, out: &mut String) {
    for s in stmts {
        indent(depth, out);
        match s {
            AStmt::DeclScalar(n) => {
                out.push_str(&format!("i32 {n};\n"));
            }
            AStmt::DeclArray(n, size) => {
                out.push_str(&format!("i32[{size}] {n};\n"));
            }
            AStmt::DeclRef(n) => {
                out.push_str(&format!("ref {n};\n"));
            }
            AStmt::Assign(n, e) => {
                out.push_str(&format!("{n} = {};\n", fmt_expr(e)));
            }
            AStmt::ArrayStore(n, idx, val) => {
                out.push_str(&format!("{n}[{}] = {};\n", fmt_expr(idx), fmt_expr(val)));
            }
            AStmt::RefNull(n) => {
                out.push_str(&format!("{n} = null;\n"));
            }
            AStmt::RefMake(n, arr, off) => {
                out.push_str(&format!("{n} = &{arr}[{}];\n", fmt_expr(off)));
            }
            AStmt::RefStore(n, val) => {
                out.push_str(&format!("*{n} = {};\n", fmt_expr(val)));
            }
            AStmt::Input(n, InputWidth::Word) => {
                out.push_str(&format!("{n} = input();\n"));
            }
            AStmt::Input(n, InputWidth::Byte) => {
                out.push_str(&format!("{n} = input_byte();\n"));
            }
            AStmt::Assert(e) => {
                out.push_str(&format!("assert({});\n", fmt_expr(e)));
            }
            AStmt::Call { dest, func, args } => {
                if let Some(d) = dest {
                    out.push_str(&format!("{d} = "));
                }
                out.push_str(func);
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&fmt_expr(a));
                }
                out.push_str(");\n");
            }
            AStmt::Return(None) => out.push_str("return;\n"),
            AStmt::Return(Some(e)) => {
                out.push_str(&format!("return {};\n", fmt_expr(e)));
            }
            AStmt::If { cond, then_body, else_body } => {
                out.push_str(&format!("if ({}) {{\n", fmt_expr(cond)));
                fmt_body(then_body, depth + 1, out);
                indent(depth, out);
                if else_body.is_empty() {
                    out.push_str("}\n");
                } else {
                    out.push_str("} else {\n");
                    fmt_body(else_body, depth + 1, out);
                    indent(depth, out);
                    out.push_str("}\n");
                }
            }
            AStmt::While { cond, body } => {
                out.push_str(&format!("while ({}) {{\n", fmt_expr(cond)));
                fmt_body(body, depth + 1, out);
                indent(depth, out);
                out.push_str("}\n");
            }
        }
    }
}

fn fmt_expr(e: &AExpr) -> String {
    match e {
        // negative literals only arise from hex bit patterns; print them back as hex
        AExpr::Num(n) if *n < 0 => format!("0x{:X}", *n as i32 as u32),
        AExpr::Num(n) => n.to_string(),
        AExpr::Var(n) => n.clone(),
        AExpr::Index(n, idx) => format!("{n}[{}]", fmt_expr(idx)),
        AExpr::Deref(n) => format!("(*{n})"),
        AExpr::Un(op, a) => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::LogicalNot => "!",
                UnOp::BitNot => "~",
            };
            format!("({sym}{})", fmt_expr(a))
        }
        AExpr::Bin(op, a, b) => {
            let sym = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::Rem => "%",
                BinOp::BitAnd => "&",
                BinOp::BitOr => "|",
                BinOp::BitXor => "^",
                BinOp::Shl => "<<",
                BinOp::Shr => ">>",
                BinOp::Eq => "==",
                BinOp::Ne => "!=",
                BinOp::Lt => "<",
                BinOp::Le => "<=",
                BinOp::Gt => ">",
                BinOp::Ge => ">=",
            };
            format!("({} {sym} {})", fmt_expr(a), fmt_expr(b))
        }
    }
}
