//! Recursive-descent parser for sets, expressions, predicates and functions.

use crate::expr::{parse_exact, CmpOp, Expr, Func, Pred, Scalar};
use crate::functions::{liminf, limsup, Fun, FunStream, SimpleFunction};
use crate::term::{Majorant, Stream, Term};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{pos}: expected {}, found {found}", expected.join(" or "))]
    Unexpected {
        pos: Pos,
        expected: Vec<String>,
        found: String,
    },
    #[error("{pos}: index variable `{name}` is not bound by an enclosing stream")]
    UnboundIndexVariable { pos: Pos, name: String },
    #[error("{pos}: {msg}")]
    Invalid { pos: Pos, msg: String },
}

impl SyntaxError {
    pub fn pos(&self) -> &Pos {
        match self {
            SyntaxError::Unexpected { pos, .. }
            | SyntaxError::UnboundIndexVariable { pos, .. }
            | SyntaxError::Invalid { pos, .. } => pos,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(s) => write!(f, "number `{s}`"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const SYMBOLS: [&str; 18] = [
    "..", "<=", ">=", "==", "!=", "(", ")", ",", "+", "-", "*", "/", "^", "|", "&", "!", "<", ">",
];

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, SyntaxError> {
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut out = Vec::new();
    let digit_at = |j: usize| chars.get(j).is_some_and(|c| c.is_ascii_digit());
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let start = i;
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() {
            while digit_at(i) {
                i += 1;
            }
            // `1..` is a range, not a decimal
            if chars.get(i) == Some(&'.') && digit_at(i + 1) {
                i += 1;
                while digit_at(i) {
                    i += 1;
                }
            }
            if matches!(chars.get(i), Some('e' | 'E')) {
                let sign = matches!(chars.get(i + 1), Some('+' | '-')) as usize;
                if digit_at(i + 1 + sign) {
                    i += 1 + sign;
                    while digit_at(i) {
                        i += 1;
                    }
                }
            }
            out.push((Tok::Num(chars[start..i].iter().collect()), pos));
        } else if c.is_alphabetic() || c == '_' {
            while chars.get(i).is_some_and(|c| c.is_alphanumeric() || *c == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let sym = SYMBOLS.iter().find(|s| rest.starts_with(**s)).ok_or_else(|| SyntaxError::Unexpected {
                pos: pos.clone(),
                expected: vec!["a token".into()],
                found: format!("`{c}`"),
            })?;
            i += sym.len();
            out.push((Tok::Sym(sym), pos));
        }
        col += i - start;
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    scope: Vec<String>,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn new(src: &str, bound: &[&str]) -> PResult<Parser> {
        Ok(Parser {
            toks: lex(src)?,
            at: 0,
            scope: bound.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1.clone()
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(SyntaxError::Unexpected {
            pos: self.pos(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn invalid<T>(&self, pos: Pos, msg: impl Into<String>) -> PResult<T> {
        Err(SyntaxError::Invalid { pos, msg: msg.into() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> PResult<()> {
        if self.eat(s) {
            Ok(())
        } else {
            self.fail(&[&format!("`{s}`")])
        }
    }

    fn is_ident(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == name)
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.fail(&["an identifier"]),
        }
    }

    fn keyword(&mut self, k: &str) -> PResult<()> {
        if self.is_ident(k) {
            self.bump();
            Ok(())
        } else {
            self.fail(&[&format!("`{k}`")])
        }
    }

    fn finish(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.fail(&["end of input"])
        }
    }

    // ---- expressions

    fn expr(&mut self) -> PResult<Expr> {
        let mut e = self.mul_expr()?;
        loop {
            if self.eat("+") {
                e = e.add(&self.mul_expr()?);
            } else if self.eat("-") {
                e = e.sub(&self.mul_expr()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut e = self.unary()?;
        loop {
            if self.eat("*") {
                e = e.mul(&self.unary()?);
            } else if self.eat("/") {
                e = e.div(&self.unary()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat("-") {
            return Ok(self.unary()?.neg());
        }
        let base = self.expr_atom()?;
        if self.eat("^") {
            return Ok(base.pow(&self.unary()?));
        }
        Ok(base)
    }

    fn number(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.fail(&["a number"]),
        }
    }

    fn float_literal(&mut self) -> PResult<f64> {
        let pos = self.pos();
        let neg = self.eat("-");
        let text = self.number()?;
        match text.parse::<f64>() {
            Ok(x) if neg => Ok(-x),
            Ok(x) => Ok(x),
            Err(_) => self.invalid(pos, format!("bad float `{text}`")),
        }
    }

    fn expr_atom(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(text) => {
                self.bump();
                match parse_exact(&text) {
                    Some(r) => Ok(Expr::rational(r)),
                    None => self.invalid(pos, format!("bad number `{text}`")),
                }
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if name == "inf" {
                    return Ok(Expr::inf());
                }
                if name == "fl" && self.is_sym("(") {
                    self.bump();
                    let x = self.float_literal()?;
                    self.expect(")")?;
                    return match Scalar::float(x) {
                        Ok(s) => Ok(Expr::constant(s)),
                        Err(e) => self.invalid(pos, e.to_string()),
                    };
                }
                if self.is_sym("(") {
                    let Some(func) = Func::from_name(&name) else {
                        return self.invalid(pos, format!("unknown function `{name}`"));
                    };
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while self.eat(",") {
                        args.push(self.expr()?);
                    }
                    self.expect(")")?;
                    if args.len() != func.arity() {
                        return self.invalid(
                            pos,
                            format!("`{name}` takes {} argument(s), got {}", func.arity(), args.len()),
                        );
                    }
                    return Ok(Expr::call(func, args));
                }
                if !self.scope.contains(&name) {
                    return Err(SyntaxError::UnboundIndexVariable { pos, name });
                }
                Ok(Expr::var(&name))
            }
            _ => self.fail(&["an expression"]),
        }
    }

    fn pred(&mut self) -> PResult<Pred> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Sym(s @ ("<" | "<=" | "==" | "!=" | ">" | ">=")) => *s,
            _ => return self.fail(&["`<`", "`<=`", "`==`", "`!=`", "`>`", "`>=`"]),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(match op {
            "<" => Pred::new(lhs, CmpOp::Lt, rhs),
            "<=" => Pred::new(lhs, CmpOp::Le, rhs),
            "==" => Pred::new(lhs, CmpOp::Eq, rhs),
            "!=" => Pred::new(lhs, CmpOp::Ne, rhs),
            ">" => Pred::new(rhs, CmpOp::Lt, lhs),
            _ => Pred::new(rhs, CmpOp::Le, lhs),
        })
    }

    /// `v in start..`; pushes `v` onto the scope.
    fn binder(&mut self) -> PResult<(String, Expr)> {
        let v = self.ident()?;
        self.keyword("in")?;
        let start = self.expr()?;
        self.expect("..")?;
        self.scope.push(v.clone());
        Ok((v, start))
    }

    // ---- sets

    fn set(&mut self) -> PResult<Term> {
        let mut items = vec![self.set_xor()?];
        while self.eat("|") {
            items.push(self.set_xor()?);
        }
        Ok(Term::or(items))
    }

    fn set_xor(&mut self) -> PResult<Term> {
        let mut t = self.set_and()?;
        while self.eat("^") {
            t = t.xor(&self.set_and()?);
        }
        Ok(t)
    }

    fn set_and(&mut self) -> PResult<Term> {
        let mut items = vec![self.set_unary()?];
        while self.eat("&") {
            items.push(self.set_unary()?);
        }
        Ok(Term::and(items))
    }

    fn set_unary(&mut self) -> PResult<Term> {
        if self.eat("!") {
            return Ok(self.set_unary()?.not());
        }
        self.set_atom()
    }

    fn set_atom(&mut self) -> PResult<Term> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Num(s) if s == "0" => {
                self.bump();
                Ok(Term::zero())
            }
            Tok::Num(s) if s == "1" => {
                self.bump();
                Ok(Term::one())
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.set()?;
                self.expect(")")?;
                Ok(t)
            }
            Tok::Ident(name) => {
                self.bump();
                self.expect("(")?;
                let t = match name.as_str() {
                    "cyl" | "cylc" => {
                        let coord = self.expr()?;
                        self.expect(",")?;
                        let lo = self.expr()?;
                        self.expect(",")?;
                        let hi = self.expr()?;
                        if name == "cyl" {
                            Term::cyl(coord, lo, hi)
                        } else {
                            Term::cylc(coord, lo, hi)
                        }
                    }
                    "Vee" | "Wedge" => {
                        let (v, start) = self.binder()?;
                        self.expect(",")?;
                        let body = self.set()?;
                        let mut s = Stream::new(&v, start, body);
                        while self.eat(",") {
                            if self.is_ident("mono") {
                                self.bump();
                                s = s.monotone();
                            } else {
                                self.keyword("tail")?;
                                s = s.with_tail(self.majorant()?);
                            }
                        }
                        self.scope.pop();
                        if name == "Vee" {
                            Term::join(s)
                        } else {
                            Term::meet(s)
                        }
                    }
                    "if" => {
                        let p = self.pred()?;
                        self.expect(",")?;
                        let a = self.set()?;
                        self.expect(",")?;
                        let b = self.set()?;
                        Term::cond(p, a, b)
                    }
                    _ => return self.invalid(pos, format!("unknown set former `{name}`")),
                };
                self.expect(")")?;
                Ok(t)
            }
            _ => self.fail(&["`0`", "`1`", "`cyl`", "`cylc`", "`Vee`", "`Wedge`", "`if`", "`!`", "`(`"]),
        }
    }

    fn majorant(&mut self) -> PResult<Majorant> {
        let pos = self.pos();
        let kind = self.ident()?;
        self.expect("(")?;
        let a = self.float_literal()?;
        self.expect(",")?;
        let b = self.float_literal()?;
        self.expect(")")?;
        let m = match kind.as_str() {
            "geom" => Majorant::Geom { c: a, r: b },
            "pow" => Majorant::Pow { c: a, p: b },
            "gauss" => Majorant::GaussTail { alpha: a, beta: b },
            _ => return self.invalid(pos, format!("unknown tail rule `{kind}`")),
        };
        if !m.is_valid() {
            return self.invalid(pos, "tail rule parameters out of range");
        }
        Ok(m)
    }

    // ---- functions

    fn fun(&mut self) -> PResult<Fun> {
        let mut f = self.fun_atom()?;
        while self.eat("+") {
            f = Fun::sum(&f, &self.fun_atom()?);
        }
        Ok(f)
    }

    fn fun_stream(&mut self) -> PResult<FunStream> {
        let (v, start) = self.binder()?;
        self.expect(",")?;
        let body = self.fun()?;
        self.scope.pop();
        Ok(FunStream::new(&v, start, body))
    }

    fn fun_atom(&mut self) -> PResult<Fun> {
        let pos = self.pos();
        if self.eat("(") {
            let f = self.fun()?;
            self.expect(")")?;
            return Ok(f);
        }
        let name = match self.peek().clone() {
            Tok::Ident(name) => name,
            _ => return self.fail(&["a function"]),
        };
        if !matches!(self.peek2(), Tok::Sym("(")) {
            self.bump();
            return self.fail(&["`(`"]);
        }
        self.bump();
        self.bump();
        let f = match name.as_str() {
            "ind" => Fun::indicator(&self.set()?),
            "const" => Fun::constant(self.expr()?),
            "coord" => Fun::coord(self.expr()?),
            "negcoord" => Fun::neg_coord(self.expr()?),
            "min" | "max" | "monus" | "hypot" => {
                let a = self.fun()?;
                self.expect(",")?;
                let b = self.fun()?;
                match name.as_str() {
                    "min" => Fun::min(&a, &b),
                    "max" => Fun::max(&a, &b),
                    "monus" => Fun::monus(&a, &b),
                    _ => Fun::hypot(&a, &b),
                }
            }
            "scale" => {
                let c = self.expr()?;
                self.expect(",")?;
                Fun::scale(c, &self.fun()?)
            }
            "approx" => {
                let f = self.fun()?;
                self.expect(",")?;
                Fun::approx(&f, self.expr()?)
            }
            "sup" | "limup" => Fun::sup(self.fun_stream()?),
            "inf" | "limdown" => Fun::inf(self.fun_stream()?),
            "liminf" => liminf(&self.fun_stream()?),
            "limsup" => limsup(&self.fun_stream()?),
            "if" => {
                let p = self.pred()?;
                self.expect(",")?;
                let a = self.fun()?;
                self.expect(",")?;
                let b = self.fun()?;
                Fun::cond(p, &a, &b)
            }
            "simple" => {
                let mut parts = Vec::new();
                loop {
                    self.expect("(")?;
                    let a = self.set()?;
                    self.expect(",")?;
                    let vpos = self.pos();
                    let x = match self.expr()?.eval() {
                        Ok(x) => x,
                        Err(e) => return self.invalid(vpos, e.to_string()),
                    };
                    self.expect(")")?;
                    parts.push((a, x));
                    if !self.eat(",") {
                        break;
                    }
                }
                match Fun::simple(SimpleFunction::new(parts)) {
                    Ok(f) => f,
                    Err(e) => return self.invalid(pos, e.to_string()),
                }
            }
            _ => return self.invalid(pos, format!("unknown function former `{name}`")),
        };
        self.expect(")")?;
        Ok(f)
    }
}

/// Parses a closed σ-term.
pub fn parse_term(src: &str) -> Result<Term, SyntaxError> {
    parse_term_in(src, &[])
}

/// Parses a σ-term whose free index variables are among `bound`.
pub fn parse_term_in(src: &str, bound: &[&str]) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(src, bound)?;
    let t = p.set()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_expr_in(src: &str, bound: &[&str]) -> Result<Expr, SyntaxError> {
    let mut p = Parser::new(src, bound)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    parse_expr_in(src, &[])
}

pub fn parse_pred_in(src: &str, bound: &[&str]) -> Result<Pred, SyntaxError> {
    let mut p = Parser::new(src, bound)?;
    let e = p.pred()?;
    p.finish()?;
    Ok(e)
}

/// Parses a closed measurable function.
pub fn parse_fun(src: &str) -> Result<Fun, SyntaxError> {
    parse_fun_in(src, &[])
}

pub fn parse_fun_in(src: &str, bound: &[&str]) -> Result<Fun, SyntaxError> {
    let mut p = Parser::new(src, bound)?;
    let f = p.fun()?;
    p.finish()?;
    Ok(f)
}
