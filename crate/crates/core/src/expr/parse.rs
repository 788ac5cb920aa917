//! Recursive-descent parser for single-variable profile expressions.
//!
//! Grammar, loosest to tightest binding:
//!
//! ```text
//! sum     := product (("+" | "-") product)*
//! product := unary (("*" | "/") unary)*
//! unary   := "-" unary | "+" unary | power
//! power   := atom ("^" unary)?            right-associative
//! atom    := number | ident | func "(" sum ")" | "(" sum ")"
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)` while
//! `2^-x` is `2^(-x)`.

use super::ast::{BinOp, Func, Node};
use super::{Expr, MAX_DEPTH};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown function `{name}` at position {position}")]
    UnknownFunction { name: String, position: usize },
    #[error("invalid variable name `{0}`")]
    InvalidVariable(String),
    #[error("expression nesting exceeds {MAX_DEPTH} levels at position {position}")]
    TooDeep { position: usize },
}

impl ParseError {
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { position, .. }
            | ParseError::UnknownFunction { position, .. }
            | ParseError::TooDeep { position } => Some(*position),
            ParseError::Empty | ParseError::InvalidVariable(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_char)
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit = &text[start..i];
            let value: f64 = lit
                .parse()
                .map_err(|_| ParseError::Syntax { position: start, message: format!("malformed number `{lit}`") })?;
            if !value.is_finite() {
                return Err(ParseError::Syntax { position: start, message: format!("number `{lit}` is out of range") });
            }
            out.push(Token { tok: Tok::Num(value), pos: start });
            continue;
        }
        if is_ident_start(c) {
            while i < bytes.len() && is_ident_char(bytes[i] as char) {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(text[start..i].to_string()), pos: start });
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => {
                let ch = text[start..].chars().next().unwrap_or(c);
                return Err(ParseError::Syntax { position: start, message: format!("unexpected character `{ch}`") });
            }
        };
        out.push(Token { tok, pos: start });
        i += 1;
    }
    out.push(Token { tok: Tok::End, pos: text.len() });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    at: usize,
    variable: &'a str,
    nesting: usize,
}

/// A parsed node with the depth of its subtree.
type Sized = (Node, usize);

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self) -> ParseError {
        let t = self.peek();
        let message = match &t.tok {
            Tok::End => "unexpected end of input".to_string(),
            Tok::Num(v) => format!("unexpected number {v}"),
            Tok::Ident(s) => format!("unexpected identifier `{s}`"),
            Tok::Op(c) => format!("unexpected operator `{c}`"),
            Tok::LParen => "unexpected `(`".to_string(),
            Tok::RParen => "unexpected `)`".to_string(),
        };
        ParseError::Syntax { position: t.pos, message }
    }

    fn join(&self, op: BinOp, lhs: Sized, rhs: Sized, pos: usize) -> Result<Sized, ParseError> {
        let depth = 1 + lhs.1.max(rhs.1);
        if depth > MAX_DEPTH {
            return Err(ParseError::TooDeep { position: pos });
        }
        Ok((Node::binary(op, lhs.0, rhs.0), depth))
    }

    fn wrap(&self, inner: Sized, pos: usize, f: impl FnOnce(Node) -> Node) -> Result<Sized, ParseError> {
        let depth = inner.1 + 1;
        if depth > MAX_DEPTH {
            return Err(ParseError::TooDeep { position: pos });
        }
        Ok((f(inner.0), depth))
    }

    fn enter(&mut self, pos: usize) -> Result<(), ParseError> {
        self.nesting += 1;
        if self.nesting > MAX_DEPTH {
            Err(ParseError::TooDeep { position: pos })
        } else {
            Ok(())
        }
    }

    fn sum(&mut self) -> Result<Sized, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let pos = self.bump().pos;
            let rhs = self.product()?;
            lhs = self.join(op, lhs, rhs, pos)?;
        }
    }

    fn product(&mut self) -> Result<Sized, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            let pos = self.bump().pos;
            let rhs = self.unary()?;
            lhs = self.join(op, lhs, rhs, pos)?;
        }
    }

    fn unary(&mut self) -> Result<Sized, ParseError> {
        match self.peek().tok {
            Tok::Op('-') => {
                let pos = self.bump().pos;
                self.enter(pos)?;
                let inner = self.unary()?;
                self.nesting -= 1;
                self.wrap(inner, pos, Node::neg)
            }
            Tok::Op('+') => {
                let pos = self.bump().pos;
                self.enter(pos)?;
                let inner = self.unary();
                self.nesting -= 1;
                inner
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Sized, ParseError> {
        let base = self.atom()?;
        if let Tok::Op('^') = self.peek().tok {
            let pos = self.bump().pos;
            self.enter(pos)?;
            let exponent = self.unary()?;
            self.nesting -= 1;
            return self.join(BinOp::Pow, base, exponent, pos);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Sized, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Num(v) => {
                self.bump();
                Ok((Node::Num(v), 1))
            }
            Tok::Ident(name) => {
                self.bump();
                if let Tok::LParen = self.peek().tok {
                    let func = Func::from_name(&name)
                        .ok_or(ParseError::UnknownFunction { name: name.clone(), position: t.pos })?;
                    self.bump();
                    self.enter(t.pos)?;
                    let arg = self.sum()?;
                    self.nesting -= 1;
                    self.expect_rparen()?;
                    self.wrap(arg, t.pos, |a| Node::call(func, a))
                } else if name == self.variable {
                    Ok((Node::Var, 1))
                } else {
                    Ok((Node::Param(name), 1))
                }
            }
            Tok::LParen => {
                self.bump();
                self.enter(t.pos)?;
                let inner = self.sum()?;
                self.nesting -= 1;
                self.expect_rparen()?;
                Ok(inner)
            }
            _ => Err(self.unexpected()),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if let Tok::RParen = self.peek().tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }
}

pub(crate) fn parse(text: &str, variable: &str) -> Result<Expr, ParseError> {
    if !valid_identifier(variable) || Func::from_name(variable).is_some() {
        return Err(ParseError::InvalidVariable(variable.to_string()));
    }
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let tokens = lex(text)?;
    let mut p = Parser { tokens, at: 0, variable, nesting: 0 };
    let (root, _) = p.sum()?;
    if p.peek().tok != Tok::End {
        return Err(p.unexpected());
    }
    Ok(Expr::from_node(root, variable))
}
