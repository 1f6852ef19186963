//! Parsing and serialization of mapping specifications.
//!
//! The format is line-oriented: `n = <int>`, `G<k> = <expr>` for
//! k = 1..n-1, `rho = a1, ..., an`, and optional `chart<j> = <expr>`
//! plus `decay<j> = <int>` lines. `#` starts a comment. Component
//! expressions are polynomials in `z1..zn` (aliases `z`, `w`,
//! `zeta` for n <= 3); chart expressions may also use `conj(zi)` and
//! the reserved symbol `phi` meaning `1/(1+rho)`.

mod lexer;

use crate::poly::{MixedPoly, PolyError, PolyMap, WeightVector};
use crate::rational::{CRat, Rat};
use lexer::{lex_line, Tok, Token};
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

/// Hard ceilings that keep parsing total on adversarial input.
const MAX_N: usize = 16;
const MAX_EXPONENT: u32 = 64;
const MAX_TERMS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("semantic error at {line}:{col}: {msg}")]
    Semantic { line: usize, col: usize, msg: String },
    #[error("dimension error (n={n}): {msg}")]
    Dimension { n: usize, msg: String },
    #[error("weights must not be all zero")]
    ZeroWeights,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Chart expression: a semi-algebraic function of the source point.
///
/// `Phi` stands for `1/(1+rho)` and is resolved at evaluation time.
#[derive(Clone, Debug, PartialEq)]
pub enum ChartExpr {
    Const(CRat),
    Var(usize),
    Conj(usize),
    Phi,
    Neg(Box<ChartExpr>),
    Add(Box<ChartExpr>, Box<ChartExpr>),
    Sub(Box<ChartExpr>, Box<ChartExpr>),
    Mul(Box<ChartExpr>, Box<ChartExpr>),
    Pow(Box<ChartExpr>, u32),
}

impl ChartExpr {
    /// Evaluates at a complex point, with the value of `phi` supplied.
    pub fn eval_c64(&self, z: &[Complex64], phi: f64) -> Complex64 {
        match self {
            ChartExpr::Const(c) => c.to_c64(),
            ChartExpr::Var(i) => z[*i],
            ChartExpr::Conj(i) => z[*i].conj(),
            ChartExpr::Phi => Complex64::new(phi, 0.0),
            ChartExpr::Neg(e) => -e.eval_c64(z, phi),
            ChartExpr::Add(a, b) => a.eval_c64(z, phi) + b.eval_c64(z, phi),
            ChartExpr::Sub(a, b) => a.eval_c64(z, phi) - b.eval_c64(z, phi),
            ChartExpr::Mul(a, b) => a.eval_c64(z, phi) * b.eval_c64(z, phi),
            ChartExpr::Pow(e, k) => e.eval_c64(z, phi).powu(*k),
        }
    }

    /// Upper bound for the growth degree in |x|; `Phi` counts as -2,
    /// `None` means identically zero.
    pub fn degree_bound(&self) -> Option<i64> {
        match self {
            ChartExpr::Const(c) => {
                if c.is_zero() {
                    None
                } else {
                    Some(0)
                }
            }
            ChartExpr::Var(_) | ChartExpr::Conj(_) => Some(1),
            ChartExpr::Phi => Some(-2),
            ChartExpr::Neg(e) => e.degree_bound(),
            ChartExpr::Add(a, b) | ChartExpr::Sub(a, b) => match (a.degree_bound(), b.degree_bound()) {
                (None, d) | (d, None) => d,
                (Some(x), Some(y)) => Some(x.max(y)),
            },
            ChartExpr::Mul(a, b) => Some(a.degree_bound()? + b.degree_bound()?),
            ChartExpr::Pow(e, k) => {
                if *k == 0 {
                    Some(0)
                } else {
                    Some(e.degree_bound()? * *k as i64)
                }
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        let my_prec = match self {
            ChartExpr::Add(..) | ChartExpr::Sub(..) => 1,
            ChartExpr::Mul(..) => 2,
            ChartExpr::Neg(..) => 3,
            ChartExpr::Pow(..) => 4,
            _ => 5,
        };
        let parens = my_prec < prec;
        if parens {
            write!(f, "(")?;
        }
        match self {
            ChartExpr::Const(c) => {
                if c.is_real() {
                    if c.re.is_negative() && prec > 1 && !parens {
                        write!(f, "({})", c.re)?;
                    } else {
                        write!(f, "{}", c.re)?;
                    }
                } else if c.re.is_zero() && c.im.is_one() {
                    write!(f, "i")?;
                } else if c.re.is_zero() {
                    write!(f, "{}*i", c.im)?;
                } else {
                    write!(f, "({} + {}*i)", c.re, c.im)?;
                }
            }
            ChartExpr::Var(i) => write!(f, "z{}", i + 1)?,
            ChartExpr::Conj(i) => write!(f, "conj(z{})", i + 1)?,
            ChartExpr::Phi => write!(f, "phi")?,
            ChartExpr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 3)?;
            }
            ChartExpr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            ChartExpr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            ChartExpr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            ChartExpr::Pow(e, k) => {
                e.fmt_prec(f, 5)?;
                write!(f, "^{k}")?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ChartExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// A validated mapping specification: the map, the weight vector and
/// optional chart functions with decay exponents.
#[derive(Clone, Debug, PartialEq)]
pub struct MappingSpec {
    pub n: usize,
    pub map: PolyMap,
    pub weights: WeightVector,
    pub charts: Vec<ChartExpr>,
    pub decay: Vec<Option<u32>>,
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

// Sums and products are n-ary so that long flat expressions parse and
// lower with recursion depth bounded by parenthesis nesting only.
#[derive(Clone, Debug)]
enum Expr {
    Rat(Rat),
    I,
    Var { index: usize },
    Conj { index: usize, line: usize, col: usize },
    Phi { line: usize, col: usize },
    Neg(Box<Expr>),
    /// Terms with their subtraction flags.
    Sum(Vec<(bool, Expr)>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, u32),
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    n: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> SpecError {
        let col = self.peek().map(|t| t.col).unwrap_or_else(|| {
            self.toks.last().map(|t| t.col + t.width).unwrap_or(1)
        });
        SpecError::Syntax {
            line: self.line,
            col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<Token, SpecError> {
        match self.peek() {
            Some(t) if &t.tok == want => Ok(self.bump().unwrap()),
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self, depth: usize) -> Result<Expr, SpecError> {
        if depth > 64 {
            return Err(self.err_here("expression nested too deeply"));
        }
        let first = self.term(depth + 1)?;
        let mut terms = vec![(false, first)];
        loop {
            let negate = match self.peek().map(|t| t.tok.clone()) {
                Some(Tok::Plus) => false,
                Some(Tok::Minus) => true,
                _ => break,
            };
            self.bump();
            terms.push((negate, self.term(depth + 1)?));
        }
        if terms.len() == 1 && !terms[0].0 {
            Ok(terms.pop().unwrap().1)
        } else {
            Ok(Expr::Sum(terms))
        }
    }

    // term := factor ('*' factor)*
    fn term(&mut self, depth: usize) -> Result<Expr, SpecError> {
        let mut factors = vec![self.factor(depth + 1)?];
        while matches!(self.peek().map(|t| &t.tok), Some(Tok::Star)) {
            self.bump();
            factors.push(self.factor(depth + 1)?);
        }
        if factors.len() == 1 {
            Ok(factors.pop().unwrap())
        } else {
            Ok(Expr::Product(factors))
        }
    }

    // factor := ('-'|'+') factor | atom ('^' INT)?
    fn factor(&mut self, depth: usize) -> Result<Expr, SpecError> {
        if depth > 128 {
            return Err(self.err_here("expression nested too deeply"));
        }
        match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Minus) => {
                self.bump();
                return Ok(Expr::Neg(Box::new(self.factor(depth + 1)?)));
            }
            Some(Tok::Plus) => {
                self.bump();
                return self.factor(depth + 1);
            }
            _ => {}
        }
        let atom = self.atom(depth + 1)?;
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::Caret)) {
            self.bump();
            let e = self.integer("exponent")?;
            if e > MAX_EXPONENT as i128 || e < 0 {
                return Err(self.err_here(format!("exponent out of range 0..{MAX_EXPONENT}")));
            }
            return Ok(Expr::Pow(Box::new(atom), e as u32));
        }
        Ok(atom)
    }

    fn integer(&mut self, what: &str) -> Result<i128, SpecError> {
        match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Int(s)) => {
                self.bump();
                s.parse::<i128>()
                    .map_err(|_| self.err_here(format!("{what} too large")))
            }
            _ => Err(self.err_here(format!("expected {what}"))),
        }
    }

    fn atom(&mut self, depth: usize) -> Result<Expr, SpecError> {
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return Err(self.err_here("expected expression")),
        };
        match tok.tok {
            Tok::Int(ref s) => {
                self.bump();
                let p: num_bigint::BigInt = s
                    .parse()
                    .map_err(|_| self.err_here("invalid integer"))?;
                if matches!(self.peek().map(|t| &t.tok), Some(Tok::Slash)) {
                    self.bump();
                    let qt = self.peek().cloned();
                    match qt.map(|t| t.tok) {
                        Some(Tok::Int(qs)) => {
                            self.bump();
                            let q: num_bigint::BigInt = qs
                                .parse()
                                .map_err(|_| self.err_here("invalid integer"))?;
                            if q.is_zero() {
                                return Err(self.err_here("zero denominator"));
                            }
                            Ok(Expr::Rat(Rat::new(p, q)))
                        }
                        _ => Err(self.err_here("expected integer denominator after '/'")),
                    }
                } else {
                    Ok(Expr::Rat(Rat::from_integer(p)))
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr(depth + 1)?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(ref name) => {
                self.bump();
                match name.as_str() {
                    "i" => Ok(Expr::I),
                    "phi" => Ok(Expr::Phi {
                        line: self.line,
                        col: tok.col,
                    }),
                    "conj" => {
                        self.expect(&Tok::LParen, "'(' after conj")?;
                        let vtok = self.peek().cloned();
                        let index = match vtok.as_ref().map(|t| &t.tok) {
                            Some(Tok::Ident(v)) => {
                                let idx = self.resolve_var(v, vtok.as_ref().unwrap().col)?;
                                self.bump();
                                idx
                            }
                            _ => return Err(self.err_here("expected variable inside conj(..)")),
                        };
                        self.expect(&Tok::RParen, "')'")?;
                        Ok(Expr::Conj {
                            index,
                            line: self.line,
                            col: tok.col,
                        })
                    }
                    v => {
                        let index = self.resolve_var(v, tok.col)?;
                        Ok(Expr::Var { index })
                    }
                }
            }
            _ => Err(self.err_here("expected a number, variable, or '('")),
        }
    }

    fn resolve_var(&self, name: &str, col: usize) -> Result<usize, SpecError> {
        let idx = match name {
            "z" if self.n <= 3 => Some(0),
            "w" if self.n <= 3 => Some(1),
            "zeta" if self.n <= 3 => Some(2),
            _ => name
                .strip_prefix('z')
                .and_then(|s| s.parse::<usize>().ok())
                .and_then(|k| if k >= 1 { Some(k - 1) } else { None }),
        };
        match idx {
            Some(i) if i < self.n => Ok(i),
            Some(i) => Err(SpecError::Semantic {
                line: self.line,
                col,
                msg: format!("variable z{} out of range for n={}", i + 1, self.n),
            }),
            None => Err(SpecError::Syntax {
                line: self.line,
                col,
                msg: format!("unknown identifier '{name}'"),
            }),
        }
    }
}

/// Expands an expression into a mixed polynomial, rejecting `phi` and
/// (unless `allow_conj`) conjugated variables.
fn lower_poly(expr: &Expr, n: usize, allow_conj: bool) -> Result<MixedPoly, SpecError> {
    if !allow_conj {
        if let Some((line, col)) = first_conj(expr) {
            return Err(SpecError::Semantic {
                line,
                col,
                msg: "conjugate variables are not allowed in holomorphic components".into(),
            });
        }
    }
    lower_poly_inner(expr, n)
}

fn first_conj(expr: &Expr) -> Option<(usize, usize)> {
    match expr {
        Expr::Conj { line, col, .. } => Some((*line, *col)),
        Expr::Neg(e) | Expr::Pow(e, _) => first_conj(e),
        Expr::Sum(terms) => terms.iter().find_map(|(_, e)| first_conj(e)),
        Expr::Product(factors) => factors.iter().find_map(first_conj),
        _ => None,
    }
}

fn node_count(expr: &Expr) -> usize {
    match expr {
        Expr::Neg(e) | Expr::Pow(e, _) => 1 + node_count(e),
        Expr::Sum(terms) => 1 + terms.iter().map(|(_, e)| node_count(e)).sum::<usize>(),
        Expr::Product(factors) => 1 + factors.iter().map(node_count).sum::<usize>(),
        _ => 1,
    }
}

fn budget_check(p: &MixedPoly, line: usize) -> Result<(), SpecError> {
    if p.num_terms() > MAX_TERMS {
        return Err(SpecError::Semantic {
            line,
            col: 1,
            msg: "expression expands to too many terms".into(),
        });
    }
    Ok(())
}

fn lower_poly_inner(expr: &Expr, n: usize) -> Result<MixedPoly, SpecError> {
    match expr {
        Expr::Rat(r) => Ok(MixedPoly::constant(n, CRat::from_rat(r.clone()))),
        Expr::I => Ok(MixedPoly::constant(n, CRat::i())),
        Expr::Var { index } => Ok(MixedPoly::var(n, *index)),
        Expr::Conj { index, .. } => Ok(MixedPoly::conj_var(n, *index)),
        Expr::Phi { line, col } => Err(SpecError::Semantic {
            line: *line,
            col: *col,
            msg: "'phi' is only allowed in chart expressions".into(),
        }),
        Expr::Neg(e) => Ok(lower_poly_inner(e, n)?.neg()),
        Expr::Sum(terms) => {
            let mut acc = MixedPoly::zero(n);
            for (negate, e) in terms {
                let t = lower_poly_inner(e, n)?;
                acc = if *negate { acc.sub(&t)? } else { acc.add(&t)? };
                budget_check(&acc, 0)?;
            }
            Ok(acc)
        }
        Expr::Product(factors) => {
            let mut acc = MixedPoly::one(n);
            for e in factors {
                acc = acc.mul(&lower_poly_inner(e, n)?)?;
                budget_check(&acc, 0)?;
            }
            Ok(acc)
        }
        Expr::Pow(e, k) => {
            let base = lower_poly_inner(e, n)?;
            let mut acc = MixedPoly::one(n);
            for _ in 0..*k {
                acc = acc.mul(&base)?;
                budget_check(&acc, 0)?;
            }
            Ok(acc)
        }
    }
}

/// Chart expressions keep a binary tree form; their size is capped so
/// the recursive evaluators stay within stack bounds.
const MAX_CHART_NODES: usize = 2048;

fn lower_chart(expr: &Expr) -> ChartExpr {
    match expr {
        Expr::Rat(r) => ChartExpr::Const(CRat::from_rat(r.clone())),
        Expr::I => ChartExpr::Const(CRat::i()),
        Expr::Var { index } => ChartExpr::Var(*index),
        Expr::Conj { index, .. } => ChartExpr::Conj(*index),
        Expr::Phi { .. } => ChartExpr::Phi,
        Expr::Neg(e) => ChartExpr::Neg(Box::new(lower_chart(e))),
        Expr::Sum(terms) => {
            let mut it = terms.iter();
            let (neg0, e0) = it.next().expect("nonempty sum");
            let mut acc = lower_chart(e0);
            if *neg0 {
                acc = ChartExpr::Neg(Box::new(acc));
            }
            for (negate, e) in it {
                let rhs = Box::new(lower_chart(e));
                acc = if *negate {
                    ChartExpr::Sub(Box::new(acc), rhs)
                } else {
                    ChartExpr::Add(Box::new(acc), rhs)
                };
            }
            acc
        }
        Expr::Product(factors) => {
            let mut it = factors.iter();
            let mut acc = lower_chart(it.next().expect("nonempty product"));
            for e in it {
                acc = ChartExpr::Mul(Box::new(acc), Box::new(lower_chart(e)));
            }
            acc
        }
        Expr::Pow(e, k) => ChartExpr::Pow(Box::new(lower_chart(e)), *k),
    }
}

/// A statement split into its head identifier and the token tail.
struct Statement {
    line: usize,
    head: String,
    head_col: usize,
    tail: Vec<Token>,
}

fn split_statements(text: &str) -> Result<Vec<Statement>, SpecError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let toks = lex_line(raw, line)?;
        // ';' also separates statements, for one-line documents.
        for group in toks.split(|t| t.tok == Tok::Semi) {
            if group.is_empty() {
                continue;
            }
            let head = match &group[0].tok {
                Tok::Ident(s) => s.clone(),
                _ => {
                    return Err(SpecError::Syntax {
                        line,
                        col: group[0].col,
                        msg: "expected a statement head (n, G<k>, rho, chart<j>, decay<j>)"
                            .into(),
                    })
                }
            };
            if group.len() < 2 || group[1].tok != Tok::Eq {
                return Err(SpecError::Syntax {
                    line,
                    col: group
                        .get(1)
                        .map(|t| t.col)
                        .unwrap_or(group[0].col + group[0].width),
                    msg: "expected '=' after statement head".into(),
                });
            }
            out.push(Statement {
                line,
                head,
                head_col: group[0].col,
                tail: group[2..].to_vec(),
            });
        }
    }
    Ok(out)
}

fn index_suffix(head: &str, prefix: &str) -> Option<usize> {
    head.strip_prefix(prefix)
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&k| k >= 1)
}

/// Parses a mapping-spec document into a validated [`MappingSpec`].
pub fn parse_mapping(text: &str) -> Result<MappingSpec, SpecError> {
    let statements = split_statements(text)?;

    // Dimension first: everything else depends on it.
    let mut n: Option<(usize, usize)> = None; // (value, line)
    for st in &statements {
        if st.head == "n" {
            if n.is_some() {
                return Err(SpecError::Semantic {
                    line: st.line,
                    col: st.head_col,
                    msg: "duplicate 'n' declaration".into(),
                });
            }
            let mut p = Parser {
                toks: &st.tail,
                pos: 0,
                line: st.line,
                n: 0,
            };
            let v = p.integer("dimension n")?;
            if !p.at_end() {
                return Err(p.err_here("trailing tokens after n"));
            }
            if v < 2 || v > MAX_N as i128 {
                return Err(SpecError::Semantic {
                    line: st.line,
                    col: st.head_col,
                    msg: format!("n must be between 2 and {MAX_N}"),
                });
            }
            n = Some((v as usize, st.line));
        }
    }
    let (n, _) = n.ok_or(SpecError::Dimension {
        n: 0,
        msg: "missing 'n = <int>' line".into(),
    })?;

    let mut components: Vec<Option<MixedPoly>> = vec![None; n - 1];
    let mut weights: Option<WeightVector> = None;
    let mut charts: Vec<(usize, ChartExpr)> = Vec::new();
    let mut decays: Vec<(usize, u32, usize)> = Vec::new();

    for st in &statements {
        if st.head == "n" {
            continue;
        }
        let mut p = Parser {
            toks: &st.tail,
            pos: 0,
            line: st.line,
            n,
        };
        if let Some(k) = index_suffix(&st.head, "G") {
            if k > n - 1 {
                return Err(SpecError::Dimension {
                    n,
                    msg: format!("component G{k} out of range (line {})", st.line),
                });
            }
            let expr = p.expr(0)?;
            if !p.at_end() {
                return Err(p.err_here("trailing tokens after expression"));
            }
            let poly = lower_poly(&expr, n, false)?;
            if components[k - 1].is_some() {
                return Err(SpecError::Semantic {
                    line: st.line,
                    col: st.head_col,
                    msg: format!("duplicate component G{k}"),
                });
            }
            components[k - 1] = Some(poly);
        } else if st.head == "rho" {
            let mut a = Vec::new();
            loop {
                let neg = if matches!(p.peek().map(|t| &t.tok), Some(Tok::Minus)) {
                    p.bump();
                    true
                } else {
                    false
                };
                let num = p.integer("weight numerator")?;
                let den = if matches!(p.peek().map(|t| &t.tok), Some(Tok::Slash)) {
                    p.bump();
                    let d = p.integer("weight denominator")?;
                    if d == 0 {
                        return Err(p.err_here("zero denominator"));
                    }
                    d
                } else {
                    1
                };
                let mut r = Rat::new(num.into(), den.into());
                if neg {
                    r = -r;
                }
                a.push(r);
                if matches!(p.peek().map(|t| &t.tok), Some(Tok::Comma)) {
                    p.bump();
                } else {
                    break;
                }
            }
            if !p.at_end() {
                return Err(p.err_here("trailing tokens after weights"));
            }
            if a.len() != n {
                return Err(SpecError::Dimension {
                    n,
                    msg: format!("rho needs {n} weights, got {} (line {})", a.len(), st.line),
                });
            }
            if a.iter().all(|w| w.is_zero()) {
                return Err(SpecError::ZeroWeights);
            }
            if a.iter().any(|w| w.is_negative()) {
                return Err(SpecError::Semantic {
                    line: st.line,
                    col: st.head_col,
                    msg: "weights must be nonnegative".into(),
                });
            }
            if weights.is_some() {
                return Err(SpecError::Semantic {
                    line: st.line,
                    col: st.head_col,
                    msg: "duplicate 'rho' declaration".into(),
                });
            }
            weights = Some(WeightVector::new(a)?);
        } else if let Some(j) = index_suffix(&st.head, "chart") {
            let expr = p.expr(0)?;
            if !p.at_end() {
                return Err(p.err_here("trailing tokens after chart expression"));
            }
            if node_count(&expr) > MAX_CHART_NODES {
                return Err(SpecError::Semantic {
                    line: st.line,
                    col: st.head_col,
                    msg: format!("chart expression exceeds {MAX_CHART_NODES} nodes"),
                });
            }
            if charts.iter().any(|(jj, _)| *jj == j) {
                return Err(SpecError::Semantic {
                    line: st.line,
                    col: st.head_col,
                    msg: format!("duplicate chart{j}"),
                });
            }
            charts.push((j, lower_chart(&expr)));
        } else if let Some(j) = index_suffix(&st.head, "decay") {
            let v = p.integer("decay exponent")?;
            if !p.at_end() {
                return Err(p.err_here("trailing tokens after decay exponent"));
            }
            if v < 1 || v > MAX_EXPONENT as i128 {
                return Err(SpecError::Semantic {
                    line: st.line,
                    col: st.head_col,
                    msg: format!("decay exponent must be in 1..{MAX_EXPONENT}"),
                });
            }
            decays.push((j, v as u32, st.line));
        } else {
            return Err(SpecError::Syntax {
                line: st.line,
                col: st.head_col,
                msg: format!("unknown statement '{}'", st.head),
            });
        }
    }

    let mut comps = Vec::with_capacity(n - 1);
    for (k, c) in components.into_iter().enumerate() {
        match c {
            Some(p) => comps.push(p),
            None => {
                return Err(SpecError::Dimension {
                    n,
                    msg: format!("missing component G{}", k + 1),
                })
            }
        }
    }
    let weights = weights.ok_or(SpecError::Dimension {
        n,
        msg: "missing 'rho' line".into(),
    })?;

    charts.sort_by_key(|(j, _)| *j);
    for (pos, (j, _)) in charts.iter().enumerate() {
        if *j != pos + 1 {
            return Err(SpecError::Semantic {
                line: 0,
                col: 0,
                msg: format!("chart indices must be contiguous from 1; missing chart{}", pos + 1),
            });
        }
    }
    let mut decay = vec![None; charts.len()];
    for (j, v, line) in decays {
        if j > charts.len() {
            return Err(SpecError::Semantic {
                line,
                col: 1,
                msg: format!("decay{j} has no matching chart{j}"),
            });
        }
        decay[j - 1] = Some(v);
    }

    let map = PolyMap::new(n, comps).map_err(SpecError::Poly)?;
    Ok(MappingSpec {
        n,
        map,
        weights,
        charts: charts.into_iter().map(|(_, c)| c).collect(),
        decay,
    })
}

/// Serializes a spec to its canonical text form. `parse_mapping` of the
/// result is structurally equal to the input.
pub fn format_spec(spec: &MappingSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("n = {}\n", spec.n));
    for (k, g) in spec.map.components().iter().enumerate() {
        out.push_str(&format!("G{} = {}\n", k + 1, g));
    }
    let ws: Vec<String> = spec
        .weights
        .weights()
        .iter()
        .map(|w| format!("{w}"))
        .collect();
    out.push_str(&format!("rho = {}\n", ws.join(", ")));
    for (j, c) in spec.charts.iter().enumerate() {
        out.push_str(&format!("chart{} = {}\n", j + 1, c));
    }
    for (j, d) in spec.decay.iter().enumerate() {
        if let Some(v) = d {
            out.push_str(&format!("decay{} = {}\n", j + 1, v));
        }
    }
    out
}

/// Convenience wrapper used across tests and examples: parse a single
/// polynomial expression in `n` variables.
pub fn parse_poly(n: usize, text: &str) -> Result<MixedPoly, SpecError> {
    let toks = lex_line(text, 1)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        line: 1,
        n,
    };
    let expr = p.expr(0)?;
    if !p.at_end() {
        return Err(p.err_here("trailing tokens after expression"));
    }
    lower_poly(&expr, n, true)
}

#[cfg(test)]
mod tests;
