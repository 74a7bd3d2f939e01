//! NC rational expressions: lexer, LL(1) parser, printer and matrix evaluation,
//! plus the [`NcFunction`] interface shared by the calculus modules.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor ("*" factor)*
//! factor := "-" factor | "inv" "(" expr ")" | "(" expr ")" | number | ident
//! ident  := "x" digits          (1-based, at most d)
//! number := digits "/" digits | digits ["." digits]
//! ```
//!
//! A numeric literal written directly before `*` parses as a [`NodeKind::Scale`]
//! of the factor that follows it.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use crate::blockops::MatTuple;
use crate::error::{NcError, ParseError, Result, Span};
use crate::matrix::Matrix;
use crate::ncalg::NcPoly;
use crate::scalar::{parse_rational, Rational, Scalar};
use crate::words::Word;

#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
}

/// Structural equality; spans are ignored.
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Const(Rational),
    /// 1-based coordinate index.
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Scale(Rational, Box<Node>),
    Inv(Box<Node>),
}

impl Node {
    fn new(kind: NodeKind, start: usize, end: usize) -> Self {
        Node { kind, span: Span::new(start, end) }
    }

    pub fn has_inverse(&self) -> bool {
        match &self.kind {
            NodeKind::Const(_) | NodeKind::Var(_) => false,
            NodeKind::Inv(_) => true,
            NodeKind::Neg(a) | NodeKind::Scale(_, a) => a.has_inverse(),
            NodeKind::Add(a, b) | NodeKind::Sub(a, b) | NodeKind::Mul(a, b) => a.has_inverse() || b.has_inverse(),
        }
    }
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone)]
pub struct NcExpr {
    pub source: String,
    pub d: usize,
    pub root: Node,
}

impl PartialEq for NcExpr {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.root == other.root
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    Inv,
    Var(usize),
    Num(Rational),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Inv => "'inv'".into(),
            Tok::Var(j) => format!("variable x{j}"),
            Tok::Num(q) => format!("number {q}"),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexed {
    tok: Tok,
    start: usize,
    end: usize,
}

fn lex(src: &str) -> Result<Vec<Lexed>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |offset: usize, message: String| ParseError { offset, expected: Vec::new(), message };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            i += 1;
            out.push(Lexed { tok, start, end: i });
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'/' || bytes[i] == b'.') {
                let sep = i;
                i += 1;
                let digits = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i == digits {
                    return Err(err(sep, "expected digits after the separator".into()));
                }
            }
            let q = parse_rational(&src[start..i]).map_err(|e| err(start, e.to_string()))?;
            out.push(Lexed { tok: Tok::Num(q), start, end: i });
            continue;
        }
        if c.is_ascii_alphabetic() {
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let word = &src[start..i];
            let tok = if word == "inv" {
                Tok::Inv
            } else if let Some(j) = word
                .strip_prefix('x')
                .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                .and_then(|d| d.parse::<usize>().ok())
            {
                Tok::Var(j)
            } else {
                return Err(err(start, format!("unknown identifier '{word}'")));
            };
            out.push(Lexed { tok, start, end: i });
            continue;
        }
        let ch = src[i..].chars().next().unwrap_or('?');
        return Err(err(start, format!("unexpected character '{ch}'")));
    }
    out.push(Lexed { tok: Tok::End, start: src.len(), end: src.len() });
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
    d: usize,
}

const FACTOR_START: [&str; 5] = ["'-'", "'inv'", "'('", "number", "variable"];

impl Parser {
    fn peek(&self) -> &Lexed {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> &Lexed {
        let t = &self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError {
            offset: t.start,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            message: format!("unexpected {}", t.tok.describe()),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut acc = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => NodeKind::Add as fn(Box<Node>, Box<Node>) -> NodeKind,
                Tok::Minus => NodeKind::Sub,
                _ => return Ok(acc),
            };
            self.bump();
            let rhs = self.term()?;
            let (start, end) = (acc.span.start, rhs.span.end);
            acc = Node::new(op(Box::new(acc), Box::new(rhs)), start, end);
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let (mut acc, mut literal) = self.factor()?;
        while self.peek().tok == Tok::Star {
            self.bump();
            let (rhs, _) = self.factor()?;
            let (start, end) = (acc.span.start, rhs.span.end);
            let kind = match (&acc.kind, literal) {
                (NodeKind::Const(c), true) => NodeKind::Scale(c.clone(), Box::new(rhs)),
                _ => NodeKind::Mul(Box::new(acc), Box::new(rhs)),
            };
            acc = Node::new(kind, start, end);
            literal = false;
        }
        Ok(acc)
    }

    /// Returns the factor and whether it was a bare numeric literal.
    fn factor(&mut self) -> Result<(Node, bool), ParseError> {
        let start = self.peek().start;
        match self.peek().tok.clone() {
            Tok::Minus => {
                self.bump();
                let (inner, _) = self.factor()?;
                let end = inner.span.end;
                Ok((Node::new(NodeKind::Neg(Box::new(inner)), start, end), false))
            }
            Tok::Inv => {
                self.bump();
                self.expect(Tok::LParen, "'('")?;
                let inner = self.expr()?;
                let end = self.expect(Tok::RParen, "')'")?;
                Ok((Node::new(NodeKind::Inv(Box::new(inner)), start, end), false))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok((inner, false))
            }
            Tok::Num(q) => {
                let end = self.bump().end;
                Ok((Node::new(NodeKind::Const(q), start, end), true))
            }
            Tok::Var(j) => {
                if j < 1 || j > self.d {
                    return Err(ParseError {
                        offset: start,
                        expected: vec![format!("variable x1..x{}", self.d)],
                        message: format!("variable x{j} out of range for d = {}", self.d),
                    });
                }
                let end = self.bump().end;
                Ok((Node::new(NodeKind::Var(j), start, end), false))
            }
            _ => Err(self.error(&FACTOR_START)),
        }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<usize, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump().end)
        } else {
            Err(self.error(&[name]))
        }
    }
}

/// Parses `text` as an expression in `x1, ..., xd`.
pub fn parse(text: &str, d: usize) -> Result<NcExpr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, d };
    let root = p.expr()?;
    if p.peek().tok != Tok::End {
        let mut expected = vec!["'+'", "'-'", "'*'", "end of input"];
        if p.peek().tok != Tok::RParen {
            expected.insert(3, "')'");
        }
        return Err(p.error(&expected));
    }
    Ok(NcExpr { source: text.to_string(), d, root })
}

fn precedence(kind: &NodeKind) -> u8 {
    match kind {
        NodeKind::Add(..) | NodeKind::Sub(..) => 0,
        NodeKind::Mul(..) | NodeKind::Scale(..) => 1,
        _ => 2,
    }
}

fn fmt_rational(q: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if q.is_negative() {
        write!(f, "-{}", -q)
    } else {
        write!(f, "{q}")
    }
}

fn fmt_node(node: &Node, ctx: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let own = precedence(&node.kind);
    let paren = own < ctx;
    if paren {
        f.write_str("(")?;
    }
    match &node.kind {
        NodeKind::Const(q) => fmt_rational(q, f)?,
        NodeKind::Var(j) => write!(f, "x{j}")?,
        NodeKind::Neg(a) => {
            f.write_str("-")?;
            fmt_node(a, 2, f)?;
        }
        NodeKind::Add(a, b) | NodeKind::Sub(a, b) => {
            fmt_node(a, 0, f)?;
            f.write_str(if matches!(node.kind, NodeKind::Add(..)) { " + " } else { " - " })?;
            fmt_node(b, 1, f)?;
        }
        NodeKind::Mul(a, b) => {
            // A bare literal on the left would reparse as a scaling.
            if matches!(a.kind, NodeKind::Const(_)) {
                f.write_str("(")?;
                fmt_node(a, 0, f)?;
                f.write_str(")")?;
            } else {
                fmt_node(a, 1, f)?;
            }
            f.write_str("*")?;
            fmt_node(b, 2, f)?;
        }
        NodeKind::Scale(c, b) => {
            fmt_rational(c, f)?;
            f.write_str("*")?;
            fmt_node(b, 2, f)?;
        }
        NodeKind::Inv(a) => {
            f.write_str("inv(")?;
            fmt_node(a, 0, f)?;
            f.write_str(")")?;
        }
    }
    if paren {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(self, 0, f)
    }
}

impl fmt::Display for NcExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_node(&self.root, 0, f)
    }
}

impl NcExpr {
    pub fn parse(text: &str, d: usize) -> Result<Self, ParseError> {
        parse(text, d)
    }

    /// Evaluates at `x`; a singular inverse yields a domain error carrying
    /// the span of the failing `inv(...)`.
    pub fn eval<S: Scalar>(&self, x: &MatTuple<S>) -> Result<Matrix<S>> {
        if x.d() != self.d {
            return Err(NcError::argument(format!("expression has d = {}, point has d = {}", self.d, x.d())));
        }
        eval_node(&self.root, &self.source, x)
    }

    /// Symbolic expansion of an inversion-free expression.
    pub fn to_poly<S: Scalar>(&self) -> Result<NcPoly<S>> {
        to_poly_node(&self.root, self.d)
    }

    pub fn has_inverse(&self) -> bool {
        self.root.has_inverse()
    }
}

pub fn eval_expr<S: Scalar>(expr: &NcExpr, x: &MatTuple<S>) -> Result<Matrix<S>> {
    expr.eval(x)
}

fn eval_node<S: Scalar>(node: &Node, src: &str, x: &MatTuple<S>) -> Result<Matrix<S>> {
    let n = x.n();
    Ok(match &node.kind {
        NodeKind::Const(c) => Matrix::scalar(n, S::from_rational(c)),
        NodeKind::Var(j) => x.coord(j - 1).clone(),
        NodeKind::Neg(a) => eval_node(a, src, x)?.neg(),
        NodeKind::Add(a, b) => eval_node(a, src, x)?.add(&eval_node(b, src, x)?),
        NodeKind::Sub(a, b) => eval_node(a, src, x)?.sub(&eval_node(b, src, x)?),
        NodeKind::Mul(a, b) => eval_node(a, src, x)?.mul(&eval_node(b, src, x)?),
        NodeKind::Scale(c, a) => eval_node(a, src, x)?.scale(&S::from_rational(c)),
        NodeKind::Inv(a) => {
            let inner = eval_node(a, src, x)?;
            inner.inverse().ok_or_else(|| NcError::Domain {
                span: Some(node.span),
                detail: format!(
                    "'{}' is singular at this point",
                    src.get(node.span.start..node.span.end).unwrap_or("inv(...)")
                ),
            })?
        }
    })
}

fn to_poly_node<S: Scalar>(node: &Node, d: usize) -> Result<NcPoly<S>> {
    Ok(match &node.kind {
        NodeKind::Const(c) => NcPoly::constant(d, S::from_rational(c)),
        NodeKind::Var(j) => NcPoly::var(d, *j)?,
        NodeKind::Neg(a) => to_poly_node::<S>(a, d)?.neg(),
        NodeKind::Add(a, b) => to_poly_node::<S>(a, d)?.add(&to_poly_node(b, d)?)?,
        NodeKind::Sub(a, b) => to_poly_node::<S>(a, d)?.sub(&to_poly_node(b, d)?)?,
        NodeKind::Mul(a, b) => to_poly_node::<S>(a, d)?.mul(&to_poly_node(b, d)?)?,
        NodeKind::Scale(c, a) => to_poly_node::<S>(a, d)?.scale(&S::from_rational(c)),
        NodeKind::Inv(_) => {
            return Err(NcError::argument("expressions with inverses have no polynomial expansion"))
        }
    })
}

/// Writes an integer-coefficient polynomial as expression text.
pub fn poly_to_text(p: &NcPoly<Rational>) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (w, c)) in p.terms().enumerate() {
        let negative = c.is_negative();
        if k == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let mag = c.abs();
        let monomial = monomial_text(w);
        match (monomial.is_empty(), mag.is_one()) {
            (true, _) => out.push_str(&mag.to_string()),
            (false, true) => out.push_str(&monomial),
            (false, false) => out.push_str(&format!("{mag}*{monomial}")),
        }
    }
    out
}

fn monomial_text(w: &Word) -> String {
    w.letters().iter().map(|l| format!("x{l}")).collect::<Vec<_>>().join("*")
}

type Evaluator<S> = dyn Fn(&MatTuple<S>) -> Result<Matrix<S>> + Send + Sync;

/// A size-preserving map on `d`-tuples of square matrices.
///
/// Wraps a pure evaluation rule; cloning shares it.
#[derive(Clone)]
pub struct NcFunction<S> {
    d: usize,
    rule: Arc<Evaluator<S>>,
}

impl<S: Scalar> fmt::Debug for NcFunction<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NcFunction(d = {})", self.d)
    }
}

impl<S: Scalar> NcFunction<S> {
    pub fn new(d: usize, rule: impl Fn(&MatTuple<S>) -> Result<Matrix<S>> + Send + Sync + 'static) -> Self {
        NcFunction { d, rule: Arc::new(rule) }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn eval(&self, x: &MatTuple<S>) -> Result<Matrix<S>> {
        if x.d() != self.d {
            return Err(NcError::argument(format!("function has d = {}, point has d = {}", self.d, x.d())));
        }
        let out = (self.rule)(x)?;
        if out.shape() != (x.n(), x.n()) {
            return Err(NcError::argument(format!(
                "nc function returned {}x{} at level {}",
                out.rows(),
                out.cols(),
                x.n()
            )));
        }
        Ok(out)
    }

    pub fn from_poly(p: NcPoly<S>) -> Self {
        NcFunction::new(p.d(), move |x| p.eval(x))
    }

    pub fn from_expr(e: NcExpr) -> Self {
        let d = e.d;
        NcFunction::new(d, move |x| e.eval(x))
    }

    pub fn constant(d: usize, c: S) -> Self {
        NcFunction::new(d, move |x| Ok(Matrix::scalar(x.n(), c.clone())))
    }

    /// `l_j(X) = X_j`, 1-based.
    pub fn coordinate(d: usize, j: usize) -> Result<Self> {
        if j < 1 || j > d {
            return Err(NcError::argument(format!("coordinate {j} out of range for d = {d}")));
        }
        Ok(NcFunction::new(d, move |x| Ok(x.coord(j - 1).clone())))
    }

    fn check_same_d(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(NcError::argument("functions have different d"));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_d(other)?;
        let (f, g) = (self.clone(), other.clone());
        Ok(NcFunction::new(self.d, move |x| Ok(f.eval(x)?.add(&g.eval(x)?))))
    }

    pub fn scale(&self, c: S) -> Self {
        let f = self.clone();
        NcFunction::new(self.d, move |x| Ok(f.eval(x)?.scale(&c)))
    }

    /// Pointwise product `f(X) g(X)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_d(other)?;
        let (f, g) = (self.clone(), other.clone());
        Ok(NcFunction::new(self.d, move |x| Ok(f.eval(x)?.mul(&g.eval(x)?))))
    }

    /// `f(X)^{-1}`, a domain error where `f(X)` is singular.
    pub fn inv(&self) -> Self {
        let f = self.clone();
        NcFunction::new(self.d, move |x| {
            f.eval(x)?.inverse().ok_or_else(|| NcError::domain("function value is singular"))
        })
    }

    /// `X ↦ g(f_1(X), ..., f_k(X))` where `g` has `k` arguments.
    pub fn compose(g: &Self, fs: &[Self]) -> Result<Self> {
        if fs.len() != g.d {
            return Err(NcError::argument(format!("outer function needs {} inner functions", g.d)));
        }
        let d = fs.first().map_or(1, |f| f.d);
        if fs.iter().any(|f| f.d != d) {
            return Err(NcError::argument("inner functions have different d"));
        }
        let (g, fs) = (g.clone(), fs.to_vec());
        Ok(NcFunction::new(d, move |x| {
            let vals = fs.iter().map(|f| f.eval(x)).collect::<Result<Vec<_>>>()?;
            g.eval(&MatTuple::new(x.n(), vals)?)
        }))
    }
}

pub fn as_ncfunction<S: Scalar>(expr: &NcExpr) -> NcFunction<S> {
    NcFunction::from_expr(expr.clone())
}

/// Integer literal as a rational, for building expressions programmatically.
pub fn int_const(v: i64) -> Node {
    Node::new(NodeKind::Const(Rational::from_integer(BigInt::from(v))), 0, 0)
}
