//! Recursive-descent parser for component expressions.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := "-" factor | power
//! power  := atom ("^" factor)?
//! atom   := number | "x" | "y" | "pi"
//!         | func "(" expr ("," expr)? ")" | "(" expr ")"
//! func   := exp | atan | atan2 | sqrt | sin | cos
//! ```
//!
//! `^` binds tightest and is right-associative; unary minus sits between
//! `^` and `*`/`/`.

use thiserror::Error;

use super::Expr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error in {component} at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
    pub component: String,
}

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            position,
            message: message.into(),
            component: "expression".to_string(),
        }
    }

    pub(crate) fn component(mut self, name: &str) -> ParseError {
        self.component = name.to_string();
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut toks = Vec::new();
        loop {
            lx.skip_ws();
            if lx.pos >= lx.src.len() {
                break;
            }
            let start = lx.pos;
            let c = lx.src[lx.pos];
            let tok = match c {
                b'+' => {
                    lx.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    lx.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    lx.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    lx.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    lx.pos += 1;
                    Tok::Caret
                }
                b'(' => {
                    lx.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Tok::RParen
                }
                b',' => {
                    lx.pos += 1;
                    Tok::Comma
                }
                b'0'..=b'9' | b'.' => lx.lex_number()?,
                c if c.is_ascii_alphabetic() || c == b'_' => lx.lex_ident(),
                other => {
                    return Err(ParseError::new(
                        start,
                        format!("unexpected character {:?}", other as char),
                    ))
                }
            };
            toks.push((tok, start));
        }
        Ok(toks)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn lex_number(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        // exponent part, e.g. 1e-3
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len()
                && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // not an exponent after all; "e" belongs to the next token
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|_| ParseError::new(start, format!("invalid number {:?}", text)))
    }

    fn lex_ident(&mut self) -> Tok {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        Tok::Ident(
            std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .to_string(),
        )
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.idx += 1;
            Ok(())
        } else {
            Err(ParseError::new(self.pos(), format!("expected {}", what)))
        }
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.idx += 1;
                    let rhs = self.parse_term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.idx += 1;
                    let rhs = self.parse_term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.idx += 1;
                    let rhs = self.parse_factor()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.idx += 1;
                    let rhs = self.parse_factor()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn parse_factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.idx += 1;
            let inner = self.parse_factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, ParseError> {
        let base = self.parse_atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            let exponent = self.parse_factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen, "closing parenthesis")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "x" => Ok(Expr::X),
                "y" => Ok(Expr::Y),
                "pi" => Ok(Expr::Pi),
                "exp" | "sqrt" | "sin" | "cos" | "atan" | "atan2" => {
                    self.expect(Tok::LParen, &format!("'(' after {}", name))?;
                    let first = self.parse_expr()?;
                    let second = if self.peek() == Some(&Tok::Comma) {
                        self.idx += 1;
                        Some(self.parse_expr()?)
                    } else {
                        None
                    };
                    self.expect(Tok::RParen, "closing parenthesis")?;
                    match (name.as_str(), second) {
                        ("exp", None) => Ok(Expr::Exp(Box::new(first))),
                        ("sqrt", None) => Ok(Expr::Sqrt(Box::new(first))),
                        ("sin", None) => Ok(Expr::Sin(Box::new(first))),
                        ("cos", None) => Ok(Expr::Cos(Box::new(first))),
                        ("atan", None) => Ok(Expr::Atan(Box::new(first))),
                        ("atan2", Some(second)) => {
                            Ok(Expr::Atan2(Box::new(first), Box::new(second)))
                        }
                        ("atan2", None) => Err(ParseError::new(pos, "atan2 takes two arguments")),
                        (_, Some(_)) => {
                            Err(ParseError::new(pos, format!("{} takes one argument", name)))
                        }
                        _ => unreachable!(),
                    }
                }
                other => Err(ParseError::new(
                    pos,
                    format!("unknown identifier {:?}", other),
                )),
            },
            Some(_) => Err(ParseError::new(pos, "expected a value")),
            None => Err(ParseError::new(pos, "unexpected end of input")),
        }
    }
}

/// Parses one component expression.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = Lexer::tokenize(src)?;
    let mut parser = Parser {
        toks,
        idx: 0,
        end: src.len(),
    };
    let expr = parser.parse_expr()?;
    if parser.idx < parser.toks.len() {
        return Err(ParseError::new(parser.pos(), "unexpected trailing input"));
    }
    Ok(expr)
}
