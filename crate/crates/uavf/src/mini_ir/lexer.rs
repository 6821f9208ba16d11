use super::FrontendError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    KwFn,
    KwIf,
    KwElse,
    KwWhile,
    KwAssert,
    KwReturn,
    KwInput,
    KwInputByte,
    KwNull,
    KwI32,
    KwRef,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Amp,
    Pipe,
    Caret,
    Shl,
    Shr,
    Bang,
    Tilde,
    Eof,
}

#[derive(Debug, Clone)]
pub struct SpannedTok {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn lex(src: &str) -> Result<Vec<SpannedTok>, FrontendError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    macro_rules! push {
        ($t:expr, $len:expr) => {{
            toks.push(SpannedTok { tok: $t, line, col });
            i += $len;
            col += $len;
        }};
    }
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            b' ' | b'\t' | b'\r' => {
                i += 1;
                col += 1;
            }
            b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'0'..=b'9' => {
                let start = i;
                let val = if c == b'0' && i + 1 < bytes.len() && (bytes[i + 1] | 0x20) == b'x' {
                    i += 2;
                    let hs = i;
                    while i < bytes.len() && bytes[i].is_ascii_hexdigit() {
                        i += 1;
                    }
                    if i == hs {
                        return Err(err(line, col, "empty hex literal"));
                    }
                    let text = &src[hs..i];
                    let v = u64::from_str_radix(text, 16)
                        .map_err(|_| err(line, col, "hex literal too large"))?;
                    if v > u32::MAX as u64 {
                        return Err(err(line, col, "hex literal exceeds 32 bits"));
                    }
                    // hex literals denote 32-bit patterns
                    (v as u32) as i32 as i64
                } else {
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    src[start..i]
                        .parse::<i64>()
                        .map_err(|_| err(line, col, "integer literal too large"))?
                };
                toks.push(SpannedTok { tok: Tok::Int(val), line, col });
                col += i - start;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &src[start..i];
                let tok = match word {
                    "fn" => Tok::KwFn,
                    "if" => Tok::KwIf,
                    "else" => Tok::KwElse,
                    "while" => Tok::KwWhile,
                    "assert" => Tok::KwAssert,
                    "return" => Tok::KwReturn,
                    "input" => Tok::KwInput,
                    "input_byte" => Tok::KwInputByte,
                    "null" => Tok::KwNull,
                    "i32" => Tok::KwI32,
                    "ref" => Tok::KwRef,
                    _ => Tok::Ident(word.to_string()),
                };
                toks.push(SpannedTok { tok, line, col });
                col += i - start;
            }
            b'(' => push!(Tok::LParen, 1),
            b')' => push!(Tok::RParen, 1),
            b'{' => push!(Tok::LBrace, 1),
            b'}' => push!(Tok::RBrace, 1),
            b'[' => push!(Tok::LBracket, 1),
            b']' => push!(Tok::RBracket, 1),
            b';' => push!(Tok::Semi, 1),
            b',' => push!(Tok::Comma, 1),
            b'=' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    push!(Tok::EqEq, 2)
                } else {
                    push!(Tok::Assign, 1)
                }
            }
            b'!' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    push!(Tok::NotEq, 2)
                } else {
                    push!(Tok::Bang, 1)
                }
            }
            b'<' => {
                if bytes.get(i + 1) == Some(&b'<') {
                    push!(Tok::Shl, 2)
                } else if bytes.get(i + 1) == Some(&b'=') {
                    push!(Tok::Le, 2)
                } else {
                    push!(Tok::Lt, 1)
                }
            }
            b'>' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    push!(Tok::Shr, 2)
                } else if bytes.get(i + 1) == Some(&b'=') {
                    push!(Tok::Ge, 2)
                } else {
                    push!(Tok::Gt, 1)
                }
            }
            b'+' => push!(Tok::Plus, 1),
            b'-' => push!(Tok::Minus, 1),
            b'*' => push!(Tok::Star, 1),
            b'/' => push!(Tok::Slash, 1),
            b'%' => push!(Tok::Percent, 1),
            b'&' => push!(Tok::Amp, 1),
            b'|' => push!(Tok::Pipe, 1),
            b'^' => push!(Tok::Caret, 1),
            b'~' => push!(Tok::Tilde, 1),
            _ => {
                return Err(err(line, col, &format!("unexpected character {:?}", c as char)));
            }
        }
    }
    toks.push(SpannedTok { tok: Tok::Eof, line, col });
    Ok(toks)
}

fn err(line: usize, col: usize, msg: &str) -> FrontendError {
    FrontendError::Parse { line, col, msg: msg.to_string() }
}
