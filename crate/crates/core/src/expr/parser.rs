//! Recursive-descent parser for the metric expression language.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := primary ('^' exponent)?
//! exponent := int_atom ('^' exponent)?          (right-associative)
//! int_atom := '-'? INTEGER | '(' '-'? INTEGER ')'
//! primary  := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'
//! ```
//!
//! Unary minus binds looser than `^`, so `-x3^2` is `-(x3^2)`.

use thiserror::Error;

use super::ast::{BinaryOp, Expr, UnaryOp, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {}, found {found}", expected.join(" | "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Int(u64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number {x}"),
            Tok::Int(k) => format!("number {k}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                let mut is_int = true;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b'.' {
                    is_int = false;
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        is_int = false;
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let text = &src[i..j];
                i = j;
                if is_int {
                    if let Ok(k) = text.parse::<u64>() {
                        out.push((Tok::Int(k), start));
                        continue;
                    }
                }
                match text.parse::<f64>() {
                    Ok(x) if x.is_finite() => Tok::Num(x),
                    _ => {
                        return Err(ParseError::Syntax {
                            offset: start,
                            expected: vec!["number"],
                            found: format!("`{text}`"),
                        })
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                    j += 1;
                }
                let name = src[i..j].to_string();
                i = j;
                out.push((Tok::Ident(name), start));
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    offset: start,
                    expected: vec!["expression"],
                    found: format!("character `{ch}`"),
                });
            }
        };
        if !matches!(tok, Tok::Num(_)) {
            i += 1;
        }
        out.push((tok, start));
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

const PRIMARY_START: &[&str] = &["number", "x1", "x2", "x3", "function", "`(`", "`-`"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected: expected.to_vec(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::unary(UnaryOp::Neg, inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let k = self.exponent()?;
            return Ok(Expr::powi(base, k));
        }
        Ok(base)
    }

    fn int_atom(&mut self) -> Result<i64, ParseError> {
        let paren = if *self.peek() == Tok::LParen {
            self.bump();
            true
        } else {
            false
        };
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let value = match self.peek().clone() {
            Tok::Int(k) => {
                self.bump();
                i64::try_from(k).map_err(|_| self.error(&["integer exponent"]))?
            }
            _ => return Err(self.error(&["integer exponent"])),
        };
        if paren {
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(if neg { -value } else { value })
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let start = self.offset();
        let base = self.int_atom()?;
        let value = if *self.peek() == Tok::Caret {
            self.bump();
            let e = self.exponent()?;
            if e < 0 {
                if base.abs() == 1 {
                    if e % 2 == 0 { 1 } else { base }
                } else {
                    return Err(ParseError::Syntax {
                        offset: start,
                        expected: vec!["integer exponent"],
                        found: "fractional exponent".into(),
                    });
                }
            } else {
                base.checked_pow(e as u32).unwrap_or(i64::MAX)
            }
        } else {
            base
        };
        i32::try_from(value).map_err(|_| ParseError::Syntax {
            offset: start,
            expected: vec!["integer exponent in i32 range"],
            found: format!("{value}"),
        })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Expr::Const(x))
            }
            Tok::Int(k) => {
                self.bump();
                Ok(Expr::Const(k as f64))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(v) = Var::from_name(&name) {
                    return Ok(Expr::Var(v));
                }
                if let Some(op) = UnaryOp::from_function_name(&name) {
                    self.expect(Tok::LParen, "`(`")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::unary(op, arg));
                }
                Err(ParseError::UnknownIdentifier { name, offset })
            }
            _ => Err(self.error(PRIMARY_START)),
        }
    }
}

/// Parse DSL source text into an expression tree.
pub fn parse_expression(source: &str) -> Result<Expr, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}
