//! A small expression language for test functions on ℝ^N.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr  := expr ('+' | '-') expr | expr ('*' | '/') expr
//!        | '-' expr | expr '^' expr | atom
//! atom  := number | x1..xN | r | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x1^2`
//! is `-(x1^2)` and `2^-1` is `2^(-1)`. Functions: exp, abs, sin, cos, sqrt
//! (one argument) and pow (two). `r` is the Euclidean norm of the point.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Func {
    Exp,
    Abs,
    Sin,
    Cos,
    Sqrt,
    Pow,
}

impl Func {
    const ALL: [Func; 6] = [Func::Exp, Func::Abs, Func::Sin, Func::Cos, Func::Sqrt, Func::Pow];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        if self == Func::Pow {
            2
        } else {
            1
        }
    }

    fn lookup(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Expr {
    Num(f64),
    /// x_i, 1-based.
    Var(usize),
    R,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorKind {
    Syntax,
    UnknownIdent,
    Arity,
}

/// Parse failure at a byte offset into the source.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseError {
    pub kind: ErrorKind,
    pub offset: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.offset, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

/// Renders a diagnostic with the source line and a caret under the offset.
pub fn render_diagnostic(src: &str, e: &ParseError) -> String {
    let col = src[..e.offset.min(src.len())].chars().count();
    format!("{src}\n{}^\nerror: {e}", " ".repeat(col))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Op(c) => format!("'{c}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>, expected: &[&str]) -> ParseError {
    ParseError {
        kind: ErrorKind::Syntax,
        offset,
        message: message.into(),
        expected: expected.iter().map(|s| s.to_string()).collect(),
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
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent only when digits follow, so "2e" stays a syntax error below
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
            match text.parse::<f64>() {
                Ok(v) => out.push((Tok::Num(v), start)),
                Err(_) => return Err(syntax(start, format!("malformed number '{text}'"), &["number"])),
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
            continue;
        }
        let tok = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character '{ch}'"), &[]));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

const MAX_DEPTH: usize = 200;

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
    depth: usize,
}

const OPERAND: [&str; 4] = ["number", "identifier", "'('", "'-'"];

impl Parser {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn infix(tok: &Tok) -> Option<(BinOp, u8, u8)> {
        match tok {
            Tok::Op('+') => Some((BinOp::Add, 1, 2)),
            Tok::Op('-') => Some((BinOp::Sub, 1, 2)),
            Tok::Op('*') => Some((BinOp::Mul, 3, 4)),
            Tok::Op('/') => Some((BinOp::Div, 3, 4)),
            Tok::Op('^') => Some((BinOp::Pow, 8, 7)),
            _ => None,
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(syntax(self.peek().1, "expression nested too deeply", &[]));
        }
        let mut lhs = self.prefix()?;
        while let Some((op, lbp, rbp)) = Self::infix(&self.peek().0) {
            if lbp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.expr(rbp)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            // binds looser than '^' and tighter than '*'
            Tok::Op('-') => Ok(Expr::Neg(Box::new(self.expr(5)?))),
            Tok::LParen => {
                let e = self.expr(0)?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, at),
            other => Err(syntax(at, format!("unexpected {}", other.describe()), &OPERAND)),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.bump();
        if tok == Tok::RParen {
            Ok(())
        } else {
            Err(syntax(at, format!("unexpected {}", tok.describe()), &["operator", "')'"]))
        }
    }

    fn ident(&mut self, name: String, at: usize) -> Result<Expr, ParseError> {
        if self.peek().0 == Tok::LParen {
            let func = Func::lookup(&name).ok_or_else(|| ParseError {
                kind: ErrorKind::UnknownIdent,
                offset: at,
                message: format!("unknown function '{name}'"),
                expected: Func::ALL.iter().map(|f| f.name().to_string()).collect(),
            })?;
            self.bump();
            let mut args = vec![self.expr(0)?];
            while self.peek().0 == Tok::Comma {
                self.bump();
                args.push(self.expr(0)?);
            }
            self.expect_rparen()?;
            if args.len() != func.arity() {
                return Err(ParseError {
                    kind: ErrorKind::Arity,
                    offset: at,
                    message: format!("{} takes {} argument(s), got {}", func.name(), func.arity(), args.len()),
                    expected: Vec::new(),
                });
            }
            return Ok(Expr::Call(func, args));
        }
        if name == "r" {
            return Ok(Expr::R);
        }
        if let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            if (1..=self.dim).contains(&idx) && !name[1..].starts_with('0') {
                return Ok(Expr::Var(idx));
            }
        }
        let mut expected: Vec<String> = (1..=self.dim).map(|i| format!("x{i}")).collect();
        expected.push("r".into());
        Err(ParseError {
            kind: ErrorKind::UnknownIdent,
            offset: at,
            message: format!("unknown identifier '{name}'"),
            expected,
        })
    }
}

/// Parses `src` for points in ℝ^`dim`.
pub fn parse(src: &str, dim: usize) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, dim, depth: 0 };
    let e = p.expr(0)?;
    let (tok, at) = p.peek().clone();
    if tok != Tok::End {
        return Err(syntax(at, format!("unexpected {}", tok.describe()), &["operator", "end of input"]));
    }
    Ok(e)
}

// 0^p = 0 for p > 0; otherwise the IEEE power
fn power(base: f64, p: f64) -> f64 {
    if base == 0.0 && p > 0.0 {
        0.0
    } else {
        base.powf(p)
    }
}

impl Expr {
    /// IEEE evaluation; domain errors come back as NaN or ±inf.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x.get(i - 1).copied().unwrap_or(f64::NAN),
            Expr::R => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => power(a, b),
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(x);
                match f {
                    Func::Exp => a.exp(),
                    Func::Abs => a.abs(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Sqrt => a.sqrt(),
                    Func::Pow => power(a, args[1].eval(x)),
                }
            }
        }
    }

    /// Value plus a flag that is set when the result is not finite.
    pub fn eval_flagged(&self, x: &[f64]) -> (f64, bool) {
        let v = self.eval(x);
        (v, !v.is_finite())
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints with the fewest parentheses that reparse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::R => write!(f, "r"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                wrap(f, e, e.prec() < 3)
            }
            Expr::Bin(op, a, b) => {
                let p = self.prec();
                let sym = match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                if *op == BinOp::Pow {
                    wrap(f, a, a.prec() <= p)?;
                    write!(f, "{sym}")?;
                    wrap(f, b, b.prec() < p)
                } else {
                    wrap(f, a, a.prec() < p)?;
                    write!(f, "{sym}")?;
                    wrap(f, b, b.prec() <= p)
                }
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}
