//! A small arithmetic language for user-supplied nonlinearities.
//!
//! Grammar (precedence from loosest to tightest):
//!
//! ```text
//! expr    := expr ('+' | '-') term | term
//! term    := term ('*' | '/') unary | unary
//! unary   := '-' unary | atom
//! atom    := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Variables are `u` and `v` for reaction terms, `x` for initial profiles.
//! Functions: `min`, `max` (two arguments), `abs`, `pospart`, `negpart`,
//! `sin`, `cos`, `exp` (one argument). The constant `pi` is predefined.
//! `negpart(z)` is `max(-z, 0)`.

use std::fmt;

use thiserror::Error;

/// Default threshold below which a denominator is rejected.
pub const DEFAULT_DIVISION_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    SyntaxError { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unbalanced parenthesis at byte {offset}")]
    UnbalancedParen { offset: usize },
    #[error("division by a value of magnitude below {guard}")]
    DivisionNearZero { guard: f64 },
    #[error("at least two samples per axis are required")]
    InvalidSampleCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    U,
    V,
    X,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::U => "u",
            Var::V => "v",
            Var::X => "x",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Min,
    Max,
    Abs,
    PosPart,
    NegPart,
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "min" => Func::Min,
            "max" => Func::Max,
            "abs" => Func::Abs,
            "pospart" => Func::PosPart,
            "negpart" => Func::NegPart,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
            Func::Abs => "abs",
            Func::PosPart => "pospart",
            Func::NegPart => "negpart",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div { guard: f64 },
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div { .. } => '/',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Which variables an expression may refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// `u` and `v`.
    Reaction,
    /// `x`.
    Profile,
}

impl Scope {
    fn var(self, name: &str) -> Option<Var> {
        match (self, name) {
            (Scope::Reaction, "u") => Some(Var::U),
            (Scope::Reaction, "v") => Some(Var::V),
            (Scope::Profile, "x") => Some(Var::X),
            _ => None,
        }
    }
}

/// Parses a reaction expression in `u`, `v`.
pub fn parse(src: &str) -> Result<Expr, ExprError> {
    parse_in(src, Scope::Reaction)
}

/// Parses an initial profile in `x`.
pub fn parse_profile(src: &str) -> Result<Expr, ExprError> {
    parse_in(src, Scope::Profile)
}

pub fn parse_in(src: &str, scope: Scope) -> Result<Expr, ExprError> {
    let tokens = lex(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        scope,
    };
    let e = p.expr(0)?;
    let t = p.peek();
    match t.kind {
        Tok::End => Ok(e),
        Tok::RParen => Err(ExprError::UnbalancedParen { offset: t.offset }),
        _ => Err(ExprError::SyntaxError {
            offset: t.offset,
            message: "unexpected token after expression".into(),
        }),
    }
}

impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr::Num(x)
    }

    pub fn eval(&self, u: f64, v: f64) -> Result<f64, ExprError> {
        self.eval_env(&Env { u, v, x: 0.0 })
    }

    pub fn eval_x(&self, x: f64) -> Result<f64, ExprError> {
        self.eval_env(&Env { u: 0.0, v: 0.0, x })
    }

    fn eval_env(&self, env: &Env) -> Result<f64, ExprError> {
        Ok(match self {
            Expr::Num(c) => *c,
            Expr::Var(Var::U) => env.u,
            Expr::Var(Var::V) => env.v,
            Expr::Var(Var::X) => env.x,
            Expr::Neg(e) => -e.eval_env(env)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval_env(env)?;
                let b = b.eval_env(env)?;
                match *op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div { guard } => {
                        if !(b.abs() >= guard) {
                            return Err(ExprError::DivisionNearZero { guard });
                        }
                        a / b
                    }
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval_env(env)?;
                match f {
                    Func::Min => a.min(args[1].eval_env(env)?),
                    Func::Max => a.max(args[1].eval_env(env)?),
                    Func::Abs => a.abs(),
                    Func::PosPart => a.max(0.0),
                    Func::NegPart => (-a).max(0.0),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                }
            }
        })
    }

    /// True for a literal zero, the default for absent source terms.
    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(c) if *c == 0.0)
    }

    pub fn mentions(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(w) => *w == var,
            Expr::Neg(e) => e.mentions(var),
            Expr::Binary(_, a, b) => a.mentions(var) || b.mentions(var),
            Expr::Call(_, args) => args.iter().any(|a| a.mentions(var)),
        }
    }
}

struct Env {
    u: f64,
    v: f64,
    x: f64,
}

/// Fully parenthesized canonical form; reparses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) if *c < 0.0 => write!(f, "(-{})", -c),
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Lower bound on the Lipschitz constant (w.r.t. `|du| + |dv|`) over a box.
///
/// Takes the largest difference quotient between neighbouring nodes of an
/// `n × n` grid, separately along `u` and along `v`, and returns the larger of
/// the two.
pub fn lipschitz_estimate(
    e: &Expr,
    u_range: (f64, f64),
    v_range: (f64, f64),
    n: usize,
) -> Result<f64, ExprError> {
    if n < 2 {
        return Err(ExprError::InvalidSampleCount);
    }
    let axis = |(lo, hi): (f64, f64)| -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    };
    let us = axis(u_range);
    let vs = axis(v_range);
    let mut values = vec![0.0; n * n];
    for (i, &u) in us.iter().enumerate() {
        for (j, &v) in vs.iter().enumerate() {
            values[i * n + j] = e.eval(u, v)?;
        }
    }
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let f = values[i * n + j];
            if i + 1 < n && us[i + 1] > us[i] {
                best = best.max((values[(i + 1) * n + j] - f).abs() / (us[i + 1] - us[i]));
            }
            if j + 1 < n && vs[j + 1] > vs[j] {
                best = best.max((values[i * n + j + 1] - f).abs() / (vs[j + 1] - vs[j]));
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let kind = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
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
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ExprError::SyntaxError {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                out.push(Token {
                    kind: Tok::Num(value),
                    offset: start,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: Tok::Ident(src[start..i].to_string()),
                    offset: start,
                });
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ExprError::SyntaxError {
                    offset: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        i += 1;
        out.push(Token { kind, offset: start });
    }
    out.push(Token {
        kind: Tok::End,
        offset: src.len(),
    });
    Ok(out)
}

const UNARY_BP: u8 = 30;

fn infix_bp(t: &Tok) -> Option<(u8, BinOp)> {
    match t {
        Tok::Plus => Some((10, BinOp::Add)),
        Tok::Minus => Some((10, BinOp::Sub)),
        Tok::Star => Some((20, BinOp::Mul)),
        Tok::Slash => Some((
            20,
            BinOp::Div {
                guard: DEFAULT_DIVISION_GUARD,
            },
        )),
        _ => None,
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    scope: Scope,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ExprError> {
        let mut lhs = self.prefix()?;
        while let Some((bp, op)) = infix_bp(&self.peek().kind) {
            if bp <= min_bp {
                break;
            }
            self.next();
            let rhs = self.expr(bp)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ExprError> {
        let t = self.next();
        match t.kind {
            Tok::Num(c) => Ok(Expr::Num(c)),
            Tok::Minus => Ok(Expr::Neg(Box::new(self.expr(UNARY_BP)?))),
            Tok::LParen => {
                let e = self.expr(0)?;
                self.close_paren(t.offset)?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, t.offset),
            Tok::RParen => Err(ExprError::UnbalancedParen { offset: t.offset }),
            Tok::End => Err(ExprError::SyntaxError {
                offset: t.offset,
                message: "unexpected end of input".into(),
            }),
            other => Err(ExprError::SyntaxError {
                offset: t.offset,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }

    fn close_paren(&mut self, open: usize) -> Result<(), ExprError> {
        let t = self.next();
        match t.kind {
            Tok::RParen => Ok(()),
            Tok::End => Err(ExprError::UnbalancedParen { offset: open }),
            _ => Err(ExprError::SyntaxError {
                offset: t.offset,
                message: "expected `)`".into(),
            }),
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Expr, ExprError> {
        if let Some(func) = Func::lookup(&name) {
            let open = self.next();
            if open.kind != Tok::LParen {
                return Err(ExprError::SyntaxError {
                    offset: open.offset,
                    message: format!("expected `(` after `{name}`"),
                });
            }
            let mut args = vec![self.expr(0)?];
            while self.peek().kind == Tok::Comma {
                self.next();
                args.push(self.expr(0)?);
            }
            self.close_paren(open.offset)?;
            if args.len() != func.arity() {
                return Err(ExprError::SyntaxError {
                    offset,
                    message: format!(
                        "`{name}` takes {} argument(s), got {}",
                        func.arity(),
                        args.len()
                    ),
                });
            }
            return Ok(Expr::Call(func, args));
        }
        if name == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        self.scope
            .var(&name)
            .map(Expr::Var)
            .ok_or(ExprError::UnknownIdentifier { name, offset })
    }
}
