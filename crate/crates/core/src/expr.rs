//! Program syntax, parsing, and evaluation.
//!
//! Surface grammar (prefix, whitespace-insensitive):
//!
//! ```text
//! expr   ::= NUMBER | VAR | IDENT "(" expr { "," expr } ")"
//!          | "if" "(" expr ">" "0" ")" expr "else" expr
//! VAR    ::= "x" DIGITS          (1-based)
//! NUMBER ::= decimal literal with optional sign and exponent
//! ```

use std::fmt;

use crate::error::{EvalError, ParseError};
use crate::primitives::PrimOp;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    /// 1-based input index.
    Input(usize),
    Call(PrimOp, Vec<Expr>),
    /// `if (guard > 0) then else otherwise`
    Cond(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn call(op: PrimOp, args: Vec<Expr>) -> Expr {
        assert_eq!(args.len(), op.arity(), "arity of {}", op.name());
        Expr::Call(op, args)
    }

    pub fn cond(guard: Expr, then: Expr, otherwise: Expr) -> Expr {
        Expr::Cond(Box::new(guard), Box::new(then), Box::new(otherwise))
    }

    /// Largest input index read by the program (0 if none).
    pub fn max_input(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Input(i) => *i,
            Expr::Call(_, args) => args.iter().map(Expr::max_input).max().unwrap_or(0),
            Expr::Cond(g, t, f) => g.max_input().max(t.max_input()).max(f.max_input()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Input(_) => 0,
            Expr::Call(_, args) => 1 + args.iter().map(Expr::depth).max().unwrap_or(0),
            Expr::Cond(g, t, f) => 1 + g.depth().max(t.depth()).max(f.depth()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Input(_) => 1,
            Expr::Call(_, args) => 1 + args.iter().map(Expr::size).sum::<usize>(),
            Expr::Cond(g, t, f) => 1 + g.size() + t.size() + f.size(),
        }
    }
}

/// Shortest decimal that round-trips, with `-0` printed as `0`.
pub fn format_number(c: f64) -> String {
    if c == 0.0 {
        return "0".to_string();
    }
    format!("{c}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{}", format_number(*c)),
            Expr::Input(i) => write!(f, "x{i}"),
            Expr::Call(op, args) => {
                write!(f, "{}(", op.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Cond(g, t, e) => write!(f, "if ({g} > 0) {t} else {e}"),
        }
    }
}

/// Validated program input: finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct InputVector(Vec<f64>);

impl InputVector {
    pub fn new(values: Vec<f64>) -> Result<Self, EvalError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(EvalError::NonFiniteInput(i));
        }
        Ok(InputVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<&[f64]> for InputVector {
    type Error = EvalError;
    fn try_from(v: &[f64]) -> Result<Self, EvalError> {
        InputVector::new(v.to_vec())
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Gt,
    Eof,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn syntax(&self, pos: usize, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { pos, msg: msg.into() }
    }

    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(self.pos) else {
            return Ok((start, Tok::Eof));
        };
        let single = match b {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b'>' => Some(Tok::Gt),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            return Ok((start, t));
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            return Ok((start, Tok::Ident(self.src[start..self.pos].to_string())));
        }
        if b.is_ascii_digit() || b == b'.' || b == b'-' || b == b'+' {
            return self.number(start);
        }
        Err(self.syntax(start, format!("unexpected character `{}`", b as char)))
    }

    fn number(&mut self, start: usize) -> Result<(usize, Tok), ParseError> {
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        if matches!(bytes[i], b'-' | b'+') {
            i += 1;
        }
        let digits = |i: &mut usize| {
            let s = *i;
            while *i < bytes.len() && bytes[*i].is_ascii_digit() {
                *i += 1;
            }
            *i - s
        };
        let mut mantissa = digits(&mut i);
        if i < bytes.len() && bytes[i] == b'.' {
            i += 1;
            mantissa += digits(&mut i);
        }
        if mantissa == 0 {
            return Err(self.syntax(start, "malformed number"));
        }
        if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
            let mut j = i + 1;
            if j < bytes.len() && matches!(bytes[j], b'-' | b'+') {
                j += 1;
            }
            if digits(&mut j) == 0 {
                return Err(self.syntax(i, "malformed exponent"));
            }
            i = j;
        }
        let text = &self.src[start..i];
        let value: f64 = text
            .parse()
            .map_err(|_| self.syntax(start, format!("malformed number `{text}`")))?;
        if !value.is_finite() {
            return Err(self.syntax(start, format!("number `{text}` is out of range")));
        }
        self.pos = i;
        Ok((start, Tok::Num(value)))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: (usize, Tok),
    arity: usize,
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(usize, Tok), ParseError> {
        let next = self.lexer.next()?;
        Ok(std::mem::replace(&mut self.peeked, next))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<usize, ParseError> {
        let (pos, tok) = self.advance()?;
        if tok == want {
            Ok(pos)
        } else {
            Err(ParseError::Syntax {
                pos,
                msg: format!("expected {what}, found {}", describe(&tok)),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let (pos, tok) = self.advance()?;
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Ident(name) if name == "if" => self.conditional(),
            Tok::Ident(name) => {
                if let Some(index) = parse_var(&name) {
                    if index == 0 || index > self.arity {
                        return Err(ParseError::InputOutOfRange {
                            pos,
                            index,
                            arity: self.arity,
                        });
                    }
                    return Ok(Expr::Input(index));
                }
                self.call(pos, name)
            }
            other => Err(ParseError::Syntax {
                pos,
                msg: format!("expected an expression, found {}", describe(&other)),
            }),
        }
    }

    fn call(&mut self, pos: usize, name: String) -> Result<Expr, ParseError> {
        let op = PrimOp::from_name(&name).ok_or(ParseError::UnknownPrimitive {
            pos,
            name: name.clone(),
        })?;
        self.expect(Tok::LParen, "`(`")?;
        let mut args = vec![self.expr()?];
        loop {
            match self.advance()? {
                (_, Tok::Comma) => args.push(self.expr()?),
                (_, Tok::RParen) => break,
                (p, t) => {
                    return Err(ParseError::Syntax {
                        pos: p,
                        msg: format!("expected `,` or `)`, found {}", describe(&t)),
                    })
                }
            }
        }
        if args.len() != op.arity() {
            return Err(ParseError::ArityMismatch {
                pos,
                name,
                expected: op.arity(),
                found: args.len(),
            });
        }
        Ok(Expr::Call(op, args))
    }

    fn conditional(&mut self) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let guard = self.expr()?;
        self.expect(Tok::Gt, "`>`")?;
        match self.advance()? {
            (_, Tok::Num(0.0)) => {}
            (p, t) => {
                return Err(ParseError::Syntax {
                    pos: p,
                    msg: format!("guards compare against `0`, found {}", describe(&t)),
                })
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        let then = self.expr()?;
        self.expect(Tok::Ident("else".into()), "`else`")?;
        let otherwise = self.expr()?;
        Ok(Expr::cond(guard, then, otherwise))
    }
}

fn parse_var(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some(digits.parse().unwrap_or(usize::MAX))
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number `{v}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Gt => "`>`".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses a program over inputs `x1..=x{arity}`.
pub fn parse(text: &str, arity: usize) -> Result<Expr, ParseError> {
    let mut lexer = Lexer { src: text, pos: 0 };
    let first = lexer.next()?;
    let mut p = Parser {
        lexer,
        peeked: first,
        arity,
    };
    let e = p.expr()?;
    match p.advance()? {
        (_, Tok::Eof) => Ok(e),
        (pos, t) => Err(ParseError::Syntax {
            pos,
            msg: format!("trailing input starting with {}", describe(&t)),
        }),
    }
}

/// Parses a program and takes its arity from the largest input it reads.
pub fn parse_inferred(text: &str) -> Result<(Expr, usize), ParseError> {
    let e = parse(text, usize::MAX)?;
    let n = e.max_input().max(1);
    Ok((e, n))
}

// ---------------------------------------------------------------------------
// Evaluation

/// Evaluates `e` in any scalar carrier. Only the taken branch of a
/// conditional is evaluated; `calls` counts primitive applications.
pub(crate) fn eval_in<T: Scalar>(e: &Expr, inputs: &[T], calls: &mut usize) -> Result<T, EvalError> {
    match e {
        Expr::Const(c) => Ok(T::from_f64(*c)),
        Expr::Input(i) => inputs.get(i - 1).cloned().ok_or(EvalError::InputOutOfRange {
            index: *i,
            arity: inputs.len(),
        }),
        Expr::Call(op, args) => {
            let vals = args
                .iter()
                .map(|a| eval_in(a, inputs, calls))
                .collect::<Result<Vec<T>, _>>()?;
            *calls += 1;
            T::apply_primitive(*op, &vals)
        }
        Expr::Cond(g, t, f) => {
            if eval_in(g, inputs, calls)?.primal() > 0.0 {
                eval_in(t, inputs, calls)
            } else {
                eval_in(f, inputs, calls)
            }
        }
    }
}

/// `⟦e⟧v`.
pub fn eval(e: &Expr, v: &InputVector) -> Result<f64, EvalError> {
    eval_in(e, v.as_slice(), &mut 0)
}

/// `⟦e⟧v` plus the number of primitive calls made.
pub fn eval_counting(e: &Expr, v: &InputVector) -> Result<(f64, usize), EvalError> {
    let mut calls = 0;
    let value = eval_in(e, v.as_slice(), &mut calls)?;
    Ok((value, calls))
}

/// Convenience: evaluate at a raw slice (validated).
pub fn eval_at(e: &Expr, v: &[f64]) -> Result<f64, EvalError> {
    eval(e, &InputVector::try_from(v)?)
}
