//! Recursive-descent parser for the ASCII expression grammar.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := ('-' | '+') unary | power
//! power    := primary ('^' exponent)*
//! exponent := ['-'] number | '(' ['-'] number ['/' number] ')'
//! primary  := number | 'pi' | variable | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Variables are `x t p q`, plus the auxiliary unknowns `y<k>` and `d<i>_<j>`.

use std::sync::Arc;

use num_rational::Rational64;

use super::{Expr, ExprError, Func, Var};

/// Decimal literals with at most this many digits are stored as exact rationals.
const EXACT_DIGITS: usize = 15;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(String),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

struct Lexer;

impl Lexer {
    fn tokens(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
        let bytes = src.as_bytes();
        let mut out = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                let mut seen_dot = false;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || (bytes[i] == b'.' && !seen_dot)) {
                    seen_dot |= bytes[i] == b'.';
                    i += 1;
                }
                let text = &src[start..i];
                if text == "." {
                    return Err(ExprError::Syntax { offset: start, message: "lone '.'".into() });
                }
                out.push((start, Tok::Number(text.to_string())));
            } else if c.is_ascii_alphabetic() {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_string())));
            } else {
                let tok = match c {
                    '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    _ => {
                        return Err(ExprError::Syntax {
                            offset: i,
                            message: format!("unexpected character '{c}'"),
                        })
                    }
                };
                out.push((i, tok));
                i += c.len_utf8();
            }
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

/// Parses `text` into an (unsimplified) expression tree.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let e = p.expr()?;
    if let Some((off, tok)) = p.toks.get(p.pos) {
        return Err(ExprError::Syntax { offset: *off, message: format!("unexpected token {tok:?}") });
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::RParen) => Ok(()),
            _ => Err(ExprError::Syntax { offset: off, message: "expected ')'".into() }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { lhs + rhs } else { lhs - rhs };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { lhs * rhs } else { lhs / rhs };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let mut base = self.primary()?;
        while let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let r = self.exponent()?;
            base = Expr::Pow(Arc::new(base), r);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Rational64, ExprError> {
        let start = self.offset();
        let malformed = |message: &str| ExprError::MalformedExponent { offset: start, message: message.into() };
        let parens = matches!(self.peek(), Some(Tok::LParen));
        if parens {
            self.pos += 1;
        }
        let negative = matches!(self.peek(), Some(Tok::Op('-')));
        if negative {
            self.pos += 1;
        }
        let mut value = match self.bump() {
            Some(Tok::Number(s)) => decimal_to_rational(&s).ok_or_else(|| malformed("exponent literal too long"))?,
            _ => return Err(malformed("exponent must be a numeric or rational literal")),
        };
        if parens {
            if let Some(Tok::Op('/')) = self.peek() {
                self.pos += 1;
                let denom = match self.bump() {
                    Some(Tok::Number(s)) => decimal_to_rational(&s).ok_or_else(|| malformed("exponent literal too long"))?,
                    _ => return Err(malformed("expected denominator")),
                };
                if *denom.numer() == 0 {
                    return Err(malformed("zero denominator"));
                }
                value /= denom;
            }
            match self.bump() {
                Some(Tok::RParen) => {}
                _ => return Err(malformed("expected ')' closing the exponent")),
            }
        }
        Ok(if negative { -value } else { value })
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Number(s)) => Ok(number_literal(&s)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => self.identifier(off, name),
            Some(tok) => Err(ExprError::Syntax { offset: off, message: format!("unexpected token {tok:?}") }),
            None => Err(ExprError::Syntax { offset: off, message: "unexpected end of input".into() }),
        }
    }

    fn identifier(&mut self, off: usize, name: String) -> Result<Expr, ExprError> {
        if let Some(func) = Func::from_name(&name) {
            match self.bump() {
                Some(Tok::LParen) => {}
                _ => {
                    return Err(ExprError::Syntax {
                        offset: off,
                        message: format!("function `{name}` requires parentheses"),
                    })
                }
            }
            let arg = self.expr()?;
            self.expect_rparen()?;
            return Ok(arg.apply(func));
        }
        if name == "pi" {
            return Ok(Expr::Pi);
        }
        match variable_named(&name) {
            Some(v) => Ok(Expr::Var(v)),
            None => Err(ExprError::UnknownIdentifier { offset: off, name }),
        }
    }
}

fn variable_named(name: &str) -> Option<Var> {
    match name {
        "x" => Some(Var::X),
        "t" => Some(Var::T),
        "p" => Some(Var::P),
        "q" => Some(Var::Q),
        _ => {
            if let Some(k) = name.strip_prefix('y') {
                return k.parse::<u8>().ok().map(Var::Y);
            }
            let rest = name.strip_prefix('d')?;
            let (i, j) = rest.split_once('_')?;
            Some(Var::Jet(i.parse().ok()?, j.parse().ok()?))
        }
    }
}

fn decimal_to_rational(s: &str) -> Option<Rational64> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits = format!("{int}{frac}");
    let significant = digits.trim_start_matches('0');
    if significant.len() > EXACT_DIGITS || frac.len() > EXACT_DIGITS {
        return None;
    }
    let numer: i64 = if significant.is_empty() { 0 } else { significant.parse().ok()? };
    let denom = 10i64.checked_pow(frac.len() as u32)?;
    Some(Rational64::new(numer, denom))
}

fn number_literal(s: &str) -> Expr {
    match decimal_to_rational(s) {
        Some(r) => Expr::Num(r),
        None => Expr::Real(s.parse::<f64>().unwrap_or(f64::NAN)),
    }
}
