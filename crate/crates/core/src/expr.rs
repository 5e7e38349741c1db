//! Arithmetic expressions in one variable `x`, used for forcing terms given as text.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := unary ('^' factor)?
//! unary  := '-' unary | atom
//! atom   := number | 'x' | call '(' expr ')' | '(' expr ')'
//! call   := sin | cos | sinh | cosh | exp | sqrt | abs
//! ```
//!
//! There is no implicit multiplication; `2x` and `cos 11x` are errors.

use std::fmt;

use crate::beam::{ForcingTerm, Singularity};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Sqrt,
    Abs,
}

impl Func {
    const ALL: [Func; 7] = [Func::Sin, Func::Cos, Func::Sinh, Func::Cosh, Func::Exp, Func::Sqrt, Func::Abs];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Exp => v.exp(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Num(f64),
    Var,
    Neg(Box<ExprAst>),
    Binary(BinOp, Box<ExprAst>, Box<ExprAst>),
    Call(Func, Box<ExprAst>),
}

/// Counts of nodes that can produce singular values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SingularFlags {
    pub divisions: usize,
    pub roots: usize,
    pub powers: usize,
}

impl ExprAst {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ExprAst::Num(v) => *v,
            ExprAst::Var => x,
            ExprAst::Neg(e) => -e.eval(x),
            ExprAst::Binary(op, l, r) => {
                let (a, b) = (l.eval(x), r.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            ExprAst::Call(f, e) => f.apply(e.eval(x)),
        }
    }

    pub fn depends_on_x(&self) -> bool {
        match self {
            ExprAst::Num(_) => false,
            ExprAst::Var => true,
            ExprAst::Neg(e) | ExprAst::Call(_, e) => e.depends_on_x(),
            ExprAst::Binary(_, l, r) => l.depends_on_x() || r.depends_on_x(),
        }
    }

    /// Value of an expression without `x`.
    pub fn eval_constant(&self) -> Result<f64> {
        if self.depends_on_x() {
            return Err(Error::InvalidParameter(format!("expression {self} is not constant")));
        }
        Ok(self.eval(0.0))
    }

    /// Division, square-root and power nodes, where a singularity may hide.
    pub fn singular_flags(&self) -> SingularFlags {
        let mut f = SingularFlags::default();
        self.collect_flags(&mut f);
        f
    }

    /// Subexpressions whose vanishing makes the whole expression singular:
    /// denominators, square-root arguments and bases of powers.
    pub fn singular_operands(&self) -> Vec<&ExprAst> {
        let mut out = Vec::new();
        self.collect_operands(&mut out);
        out
    }

    fn collect_operands<'a>(&'a self, out: &mut Vec<&'a ExprAst>) {
        match self {
            ExprAst::Num(_) | ExprAst::Var => {}
            ExprAst::Neg(e) => e.collect_operands(out),
            ExprAst::Call(func, e) => {
                if *func == Func::Sqrt && e.depends_on_x() {
                    out.push(e);
                }
                e.collect_operands(out);
            }
            ExprAst::Binary(op, l, r) => {
                match op {
                    BinOp::Div if r.depends_on_x() => out.push(r),
                    BinOp::Pow if l.depends_on_x() => out.push(l),
                    _ => {}
                }
                l.collect_operands(out);
                r.collect_operands(out);
            }
        }
    }

    fn collect_flags(&self, f: &mut SingularFlags) {
        match self {
            ExprAst::Num(_) | ExprAst::Var => {}
            ExprAst::Neg(e) => e.collect_flags(f),
            ExprAst::Call(func, e) => {
                if *func == Func::Sqrt {
                    f.roots += 1;
                }
                e.collect_flags(f);
            }
            ExprAst::Binary(op, l, r) => {
                match op {
                    BinOp::Div => f.divisions += 1,
                    BinOp::Pow => f.powers += 1,
                    _ => {}
                }
                l.collect_flags(f);
                r.collect_flags(f);
            }
        }
    }
}

/// Fully parenthesized form; parses back to the same tree.
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Num(v) => write!(f, "{v}"),
            ExprAst::Var => write!(f, "x"),
            ExprAst::Neg(e) => write!(f, "(-{e})"),
            ExprAst::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            ExprAst::Call(func, e) => write!(f, "{}({e})", func.name()),
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

struct Lexer {
    chars: Vec<char>,
    pos: usize,
}

impl Lexer {
    fn syntax(pos: usize, message: impl Into<String>) -> Error {
        Error::Syntax {
            pos,
            message: message.into(),
        }
    }

    fn tokens(src: &str) -> Result<Vec<(usize, Tok)>> {
        let mut lx = Lexer {
            chars: src.chars().collect(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            let t = lx.next()?;
            let end = t.1 == Tok::End;
            out.push(t);
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(usize, Tok)> {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.chars.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        let tok = match c {
            '0'..='9' | '.' => self.number()?,
            'a'..='z' | 'A'..='Z' | '_' => {
                while self.pos < self.chars.len() && (self.chars[self.pos].is_ascii_alphanumeric() || self.chars[self.pos] == '_') {
                    self.pos += 1;
                }
                Tok::Ident(self.chars[start..self.pos].iter().collect())
            }
            '+' | '*' | '/' | '^' | '-' => {
                self.pos += 1;
                Tok::Op(c)
            }
            '\u{2212}' => {
                self.pos += 1;
                Tok::Op('-')
            }
            '(' => {
                self.pos += 1;
                Tok::LParen
            }
            ')' => {
                self.pos += 1;
                Tok::RParen
            }
            other => return Err(Self::syntax(start, format!("unexpected character '{other}'"))),
        };
        Ok((start, tok))
    }

    fn number(&mut self) -> Result<Tok> {
        let start = self.pos;
        let digits = |lx: &mut Lexer| {
            let s = lx.pos;
            while lx.pos < lx.chars.len() && lx.chars[lx.pos].is_ascii_digit() {
                lx.pos += 1;
            }
            lx.pos - s
        };
        let mut n = digits(self);
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(Self::syntax(start, "malformed number"));
        }
        if matches!(self.chars.get(self.pos), Some('e') | Some('E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.chars.get(self.pos), Some('+') | Some('-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // not an exponent; leave 'e' for the identifier check below
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let v: f64 = text
            .parse()
            .map_err(|_| Self::syntax(start, format!("malformed number '{text}'")))?;
        if !v.is_finite() {
            return Err(Self::syntax(start, format!("number '{text}' out of range")));
        }
        Ok(Tok::Num(v))
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].1
    }

    fn pos(&self) -> usize {
        self.toks[self.i].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].1.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Lexer::syntax(self.pos(), message))
    }

    fn expr(&mut self) -> Result<ExprAst> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<ExprAst> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<ExprAst> {
        let base = self.unary()?;
        if self.peek() == &Tok::Op('^') {
            self.bump();
            let exp = self.factor()?;
            return Ok(ExprAst::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<ExprAst> {
        if self.peek() == &Tok::Op('-') {
            self.bump();
            return Ok(ExprAst::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<ExprAst> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(ExprAst::Num(v))
            }
            Tok::Ident(name) if name == "x" => {
                self.bump();
                Ok(ExprAst::Var)
            }
            Tok::Ident(name) => {
                let Some(func) = Func::from_name(&name) else {
                    return self.err(format!("unknown identifier '{name}'"));
                };
                self.bump();
                if self.peek() != &Tok::LParen {
                    return self.err(format!("expected '(' after '{name}'"));
                }
                self.bump();
                let arg = self.expr()?;
                self.expect_rparen()?;
                Ok(ExprAst::Call(func, Box::new(arg)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::End => self.err("unexpected end of input"),
            t => self.err(format!("unexpected token {t:?}")),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek() != &Tok::RParen {
            return self.err("expected ')'");
        }
        self.bump();
        Ok(())
    }
}

/// Parses an expression; errors carry the character offset.
pub fn parse(src: &str) -> Result<ExprAst> {
    if src.trim().is_empty() {
        return Err(Lexer::syntax(0, "empty expression"));
    }
    let toks = Lexer::tokens(src)?;
    let mut p = Parser { toks, i: 0 };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => {}
        Tok::Num(_) | Tok::Ident(_) | Tok::LParen => return p.err("implicit multiplication is not supported"),
        _ => return p.err("unexpected trailing input"),
    }
    Ok(e)
}

/// Half-width of the window in which a hint is snapped onto an exact zero.
pub const HINT_SNAP_RADIUS: f64 = 1e-3;

/// Minimizes `|e|` over `[lo, hi]`: a coarse scan, golden-section refinement,
/// then a few neighbouring floats.
fn min_abs_on(e: &ExprAst, lo: f64, hi: f64) -> (f64, f64) {
    let f = |x: f64| {
        let v = e.eval(x).abs();
        if v.is_nan() { f64::INFINITY } else { v }
    };
    const SCAN: usize = 64;
    let step = (hi - lo) / SCAN as f64;
    let best = (0..=SCAN)
        .map(|i| lo + i as f64 * step)
        .min_by(|&a, &b| f(a).total_cmp(&f(b)))
        .unwrap_or(lo);
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let mut x = 0.5 * (a + b);
    let mut y = x;
    for _ in 0..8 {
        y = y.next_down();
        if f(y) < f(x) {
            x = y;
        }
    }
    y = 0.5 * (a + b);
    for _ in 0..8 {
        y = y.next_up();
        if f(y) < f(x) {
            x = y;
        }
    }
    (x, f(x))
}

/// Moves `hint` onto the nearest point within [`HINT_SNAP_RADIUS`] where a
/// singular operand of `ast` vanishes; `None` if there is none.
pub fn snap_hint(ast: &ExprAst, hint: f64) -> Option<f64> {
    let (lo, hi) = (hint - HINT_SNAP_RADIUS, hint + HINT_SNAP_RADIUS);
    ast.singular_operands()
        .into_iter()
        .filter_map(|op| {
            let (x, v) = min_abs_on(op, lo, hi);
            let scale = op.eval(lo).abs().max(op.eval(hi).abs()).max(f64::MIN_POSITIVE);
            (v <= 1e-12 * scale).then_some(x)
        })
        .min_by(|a, b| (a - hint).abs().total_cmp(&(b - hint).abs()))
}

/// Wraps an expression as a forcing term with declared singularities `(location, exponent)`.
///
/// Each hint is snapped onto the exact singular point when one lies within
/// [`HINT_SNAP_RADIUS`], so `0.6667` stands for `2/3`.
pub fn to_forcing(ast: &ExprAst, singular_hints: &[(f64, f64)]) -> Result<ForcingTerm> {
    let sing = singular_hints
        .iter()
        .map(|&(l, e)| Singularity::new(snap_hint(ast, l).unwrap_or(l), e))
        .collect::<Result<Vec<_>>>()?;
    if sing.is_empty() && *ast == ExprAst::Num(0.0) {
        return Ok(ForcingTerm::zero());
    }
    let label = ast.to_string();
    let ast = ast.clone();
    ForcingTerm::new(move |x| ast.eval(x), sing, label)
}

/// `loc:exp` with each side a constant expression, e.g. `2/3:-0.5`.
pub fn parse_singularity_hint(s: &str) -> Result<(f64, f64)> {
    let (l, e) = s
        .rsplit_once(':')
        .ok_or_else(|| Error::InvalidParameter(format!("singularity hint '{s}' must have the form loc:exp")))?;
    Ok((parse(l)?.eval_constant()?, parse(e)?.eval_constant()?))
}
