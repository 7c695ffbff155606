use std::cell::Cell;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::lexer::{lex, Tok, Token};
use super::{Func, OpId, Pred, SrcPos, Term, Typ, TypeContext};

/// A parse failure at the first offending token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{pos}: {msg}")]
pub struct SyntaxError {
    pub pos: SrcPos,
    pub msg: String,
}

thread_local! {
    static PARSE_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of term-parser invocations on the current thread so far.
pub fn parse_count() -> u64 {
    PARSE_CALLS.with(Cell::get)
}

const MAX_DEPTH: usize = 200;

/// Parses a term.
///
/// Precedence from loosest to tightest: comparisons `= < <=` (non-chaining),
/// `+ -`, `* /`, unary `-`, `^` (right associative), application of
/// `sin`/`cos`. A leading capitalised identifier followed by an argument is
/// a descriptor application, e.g. `Constants [r = 7]`.
pub fn parse_term(src: &str, ctx: &TypeContext) -> Result<Term, SyntaxError> {
    PARSE_CALLS.with(|c| c.set(c.get() + 1));
    let mut p = Parser::new(src, ctx)?;
    let t = p.top()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parses a command-style call `head (arg, ...)`, as used by CAS commands.
pub fn parse_call(src: &str, ctx: &TypeContext) -> Result<(String, Vec<Term>), SyntaxError> {
    PARSE_CALLS.with(|c| c.set(c.get() + 1));
    let mut p = Parser::new(src, ctx)?;
    let head = match p.peek().clone() {
        Tok::Ident(name) => {
            p.bump();
            name
        }
        other => return Err(p.error(format!("expected a command name, found {}", other.describe()))),
    };
    p.expect(Tok::LParen)?;
    let args = p.comma_list(Tok::RParen)?;
    p.expect_eof()?;
    Ok((head, args))
}

struct Parser<'c> {
    toks: Vec<Token>,
    at: usize,
    depth: usize,
    ctx: &'c TypeContext,
}

impl<'c> Parser<'c> {
    fn new(src: &str, ctx: &'c TypeContext) -> Result<Self, SyntaxError> {
        let toks = lex(src).map_err(|e| SyntaxError { pos: e.pos, msg: e.msg })?;
        Ok(Parser { toks, at: 0, depth: 0, ctx })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.at + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn pos(&self) -> SrcPos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError { pos: self.pos(), msg: msg.into() }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", tok.describe(), self.peek().describe())))
        }
    }

    fn expect_eof(&self) -> Result<(), SyntaxError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            other => Err(self.error(format!("unexpected {}", other.describe()))),
        }
    }

    fn enter(&mut self) -> Result<(), SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("expression nested too deeply"));
        }
        Ok(())
    }

    fn top(&mut self) -> Result<Term, SyntaxError> {
        if let Tok::Ident(name) = self.peek() {
            let descriptor_like = name.starts_with(|c: char| c.is_ascii_uppercase())
                && Func::from_name(name).is_none()
                && Pred::from_name(name).is_none()
                && matches!(self.peek_at(1), Tok::Ident(_) | Tok::Num(_) | Tok::LParen | Tok::LBracket | Tok::LBrace);
            if descriptor_like {
                let name = name.clone();
                self.bump();
                let arg = self.expr()?;
                return Ok(Term::descriptor(name, arg));
            }
        }
        self.expr()
    }

    fn expr(&mut self) -> Result<Term, SyntaxError> {
        self.enter()?;
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Eq => OpId::Eq,
            Tok::Lt => OpId::Lt,
            Tok::Le => OpId::Le,
            _ => {
                self.depth -= 1;
                return Ok(lhs);
            }
        };
        self.bump();
        let rhs = self.additive()?;
        if matches!(self.peek(), Tok::Eq | Tok::Lt | Tok::Le) {
            return Err(self.error("comparisons do not chain; add parentheses"));
        }
        self.depth -= 1;
        Ok(Term::binary(op, lhs, rhs))
    }

    fn additive(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => OpId::Add,
                Tok::Minus => OpId::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = Term::binary(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => OpId::Mul,
                Tok::Slash => OpId::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Term::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Term, SyntaxError> {
        self.enter()?;
        let t = if *self.peek() == Tok::Minus {
            self.bump();
            Term::app(OpId::Neg, vec![self.unary()?])
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(t)
    }

    fn power(&mut self) -> Result<Term, SyntaxError> {
        let base = self.application()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Term::binary(OpId::Pow, base, exponent));
        }
        Ok(base)
    }

    fn application(&mut self) -> Result<Term, SyntaxError> {
        let Tok::Ident(name) = self.peek() else {
            return self.primary();
        };
        if let Some(f) = Func::from_name(name) {
            if !self.ctx.functions.contains(&f) {
                return Err(self.error(format!("unknown function '{}' in theory {}", f.name(), self.ctx.theory)));
            }
            self.bump();
            self.enter()?;
            let arg = self.application()?;
            self.depth -= 1;
            return Ok(Term::app(OpId::Fn(f), vec![arg]));
        }
        if let Some(pred) = Pred::from_name(name) {
            let at = self.pos();
            self.bump();
            self.expect(Tok::LParen)?;
            let args = self.comma_list(Tok::RParen)?;
            if args.len() != pred.arity() {
                return Err(SyntaxError {
                    pos: at,
                    msg: format!("{} expects {} argument(s), got {}", pred.name(), pred.arity(), args.len()),
                });
            }
            return Ok(Term::App(OpId::Pred(pred), args));
        }
        self.primary()
    }

    /// Parses `expr, expr, ...` up to and including `close`.
    fn comma_list(&mut self, close: Tok) -> Result<Vec<Term>, SyntaxError> {
        let mut items = Vec::new();
        if *self.peek() == close {
            self.bump();
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                t if *t == close => {
                    self.bump();
                    return Ok(items);
                }
                other => {
                    return Err(self.error(format!("expected ',' or {}, found {}", close.describe(), other.describe())))
                }
            }
        }
    }

    fn primary(&mut self) -> Result<Term, SyntaxError> {
        let start = self.pos();
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Term::Num(n))
            }
            Tok::Ident(name) => {
                self.bump();
                let typ = self.ctx.bindings.get(&name).cloned().unwrap_or(Typ::Unknown);
                Ok(Term::Var { name, typ })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                let t = if *self.peek() == Tok::ColonColon {
                    self.bump();
                    let typ = self.typ()?;
                    match inner {
                        Term::Var { name, .. } => Term::Var { name, typ },
                        other => other,
                    }
                } else {
                    inner
                };
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LBracket => {
                self.bump();
                let elems = self.comma_list(Tok::RBracket)?;
                if elems.iter().any(|e| matches!(e, Term::List(_))) {
                    return Err(SyntaxError { pos: start, msg: "nested lists are not supported".into() });
                }
                Ok(Term::List(elems))
            }
            Tok::LBrace => {
                self.bump();
                let lo = self.additive()?;
                self.expect(Tok::OpenInterval)?;
                let hi = self.additive()?;
                self.expect(Tok::RBrace)?;
                Ok(Term::interval(lo, hi))
            }
            other => Err(self.error(format!("expected an expression, found {}", other.describe()))),
        }
    }

    fn typ(&mut self) -> Result<Typ, SyntaxError> {
        let base = match self.peek() {
            Tok::Ident(n) if n == "real" => Typ::Real,
            Tok::Ident(n) if n == "bool" => Typ::Bool,
            other => return Err(self.error(format!("expected a type, found {}", other.describe()))),
        };
        self.bump();
        match self.peek() {
            Tok::Ident(n) if n == "list" => {
                self.bump();
                Ok(Typ::ListOf(Box::new(base)))
            }
            Tok::Ident(n) if n == "set" && base == Typ::Real => {
                self.bump();
                Ok(Typ::SetOfReal)
            }
            _ => Ok(base),
        }
    }
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}
