//! Cylindric terms: AST, text syntax, index analysis and the named term
//! constructions (atom terms, splitters, and the derived operators used by
//! the non-representable witness).
//!
//! Text grammar (ASCII, whitespace-insensitive between tokens):
//!
//! ```text
//! join  := meet ('+' join)?
//! meet  := unary ('.' meet)?
//! unary := '-' unary | 'c' NUM unary | atom
//! atom  := 'x' NUM | '0' | '1' | 'd' NUM ',' NUM | 'd' DIGIT DIGIT | '(' join ')'
//! ```
//!
//! Both binary operators associate to the right, so `a . b . c` is
//! `And(a, And(b, c))`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A dimension index `i ∈ α`. Computations only ever touch finitely many.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Index(pub u32);

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for Index {
    fn from(v: u32) -> Self {
        Index(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    Zero,
    One,
    Diag(Index, Index),
    Not(Box<Term>),
    And(Box<Term>, Box<Term>),
    Or(Box<Term>, Box<Term>),
    Cyl(Index, Box<Term>),
}

impl Term {
    pub fn var(k: usize) -> Term {
        Term::Var(k)
    }

    pub fn diag(i: u32, j: u32) -> Term {
        Term::Diag(Index(i), Index(j))
    }

    pub fn cyl(i: u32, t: Term) -> Term {
        Term::Cyl(Index(i), Box::new(t))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(t: Term) -> Term {
        Term::Not(Box::new(t))
    }

    pub fn and(a: Term, b: Term) -> Term {
        Term::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Term, b: Term) -> Term {
        Term::Or(Box::new(a), Box::new(b))
    }

    /// `a − b`, i.e. `a · −b`.
    pub fn minus(a: Term, b: Term) -> Term {
        Term::and(a, Term::not(b))
    }

    /// Right-nested conjunction; the empty product is `1`.
    pub fn product<I>(terms: I) -> Term
    where
        I: IntoIterator<Item = Term>,
        I::IntoIter: DoubleEndedIterator,
    {
        let mut it = terms.into_iter().rev();
        match it.next() {
            None => Term::One,
            Some(last) => it.fold(last, |acc, t| Term::and(t, acc)),
        }
    }

    /// Indices occurring in `Cyl` and `Diag` nodes.
    pub fn index_set(&self) -> BTreeSet<Index> {
        let mut out = BTreeSet::new();
        self.collect_indices(&mut out);
        out
    }

    fn collect_indices(&self, out: &mut BTreeSet<Index>) {
        match self {
            Term::Var(_) | Term::Zero | Term::One => {}
            Term::Diag(i, j) => {
                out.insert(*i);
                out.insert(*j);
            }
            Term::Not(t) => t.collect_indices(out),
            Term::And(a, b) | Term::Or(a, b) => {
                a.collect_indices(out);
                b.collect_indices(out);
            }
            Term::Cyl(i, t) => {
                out.insert(*i);
                t.collect_indices(out);
            }
        }
    }

    /// One more than the largest variable index, or 0 for closed terms.
    pub fn var_count(&self) -> usize {
        match self {
            Term::Var(k) => k + 1,
            Term::Zero | Term::One | Term::Diag(..) => 0,
            Term::Not(t) | Term::Cyl(_, t) => t.var_count(),
            Term::And(a, b) | Term::Or(a, b) => a.var_count().max(b.var_count()),
        }
    }

    /// All distinct subterms, the term itself included, in post-order.
    pub fn subterms(&self) -> Vec<Term> {
        let mut out = Vec::new();
        self.collect_subterms(&mut out);
        out
    }

    fn collect_subterms(&self, out: &mut Vec<Term>) {
        match self {
            Term::Not(t) | Term::Cyl(_, t) => t.collect_subterms(out),
            Term::And(a, b) | Term::Or(a, b) => {
                a.collect_subterms(out);
                b.collect_subterms(out);
            }
            _ => {}
        }
        if !out.contains(self) {
            out.push(self.clone());
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Zero | Term::One | Term::Diag(..) => 1,
            Term::Not(t) | Term::Cyl(_, t) => 1 + t.size(),
            Term::And(a, b) | Term::Or(a, b) => 1 + a.size() + b.size(),
        }
    }

    fn is_binary(&self) -> bool {
        matches!(self, Term::And(..) | Term::Or(..))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(k) => write!(f, "x{k}"),
            Term::Zero => write!(f, "0"),
            Term::One => write!(f, "1"),
            Term::Diag(i, j) if i.0 < 10 && j.0 < 10 => write!(f, "d{i}{j}"),
            Term::Diag(i, j) => write!(f, "d{i},{j}"),
            Term::Not(t) if t.is_binary() => write!(f, "-({t})"),
            Term::Not(t) => write!(f, "-{t}"),
            Term::Cyl(i, t) if t.is_binary() => write!(f, "c{i}({t})"),
            Term::Cyl(i, t) => write!(f, "c{i} {t}"),
            Term::And(a, b) => {
                if a.is_binary() {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                if matches!(**b, Term::Or(..)) {
                    write!(f, " . ({b})")
                } else {
                    write!(f, " . {b}")
                }
            }
            Term::Or(a, b) => {
                if matches!(**a, Term::Or(..)) {
                    write!(f, "({a}) + {b}")
                } else {
                    write!(f, "{a} + {b}")
                }
            }
        }
    }
}

pub fn render_term(t: &Term) -> String {
    t.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable x{k} at position {pos} is out of range for {m} generators")]
    VarOutOfRange { k: usize, m: usize, pos: usize },
    #[error("atom terms need at least one generator")]
    NoGenerators,
    #[error("choice function has {got} entries, expected {expected}")]
    ChoiceArity { got: usize, expected: usize },
    #[error("splitter indices must be distinct and outside {{0,1}}, got ({0}, {1})")]
    BadSplitterIndices(Index, Index),
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    m: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, TermError> {
        Err(TermError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    /// Digits immediately following the current position (no whitespace).
    fn digits(&mut self) -> &'a [u8] {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn number(&mut self, what: &str) -> Result<u32, TermError> {
        let at = self.pos;
        let ds = self.digits();
        if ds.is_empty() {
            return self.err(format!("expected {what}"));
        }
        std::str::from_utf8(ds)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(TermError::Syntax {
                pos: at,
                msg: format!("{what} too large"),
            })
    }

    fn join(&mut self) -> Result<Term, TermError> {
        let lhs = self.meet()?;
        if self.peek() == Some(b'+') {
            self.pos += 1;
            let rhs = self.join()?;
            return Ok(Term::or(lhs, rhs));
        }
        Ok(lhs)
    }

    fn meet(&mut self) -> Result<Term, TermError> {
        let lhs = self.unary()?;
        if self.peek() == Some(b'.') {
            self.pos += 1;
            let rhs = self.meet()?;
            return Ok(Term::and(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Term, TermError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Term::not(self.unary()?))
            }
            Some(b'c') => {
                self.pos += 1;
                let i = self.number("cylindrification index")?;
                Ok(Term::cyl(i, self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Term, TermError> {
        let start = self.pos;
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                let k = self.number("variable index")? as usize;
                if k >= self.m {
                    return Err(TermError::VarOutOfRange {
                        k,
                        m: self.m,
                        pos: start,
                    });
                }
                Ok(Term::Var(k))
            }
            Some(b'0') => {
                self.pos += 1;
                Ok(Term::Zero)
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(Term::One)
            }
            Some(b'd') => {
                self.pos += 1;
                let at = self.pos;
                let first = self.digits();
                if first.is_empty() {
                    return self.err("expected diagonal indices");
                }
                if self.src.get(self.pos) == Some(&b',') {
                    self.pos = at;
                    let i = self.number("diagonal index")?;
                    self.pos += 1;
                    let j = self.number("diagonal index")?;
                    Ok(Term::diag(i, j))
                } else if first.len() == 2 {
                    Ok(Term::diag(
                        (first[0] - b'0') as u32,
                        (first[1] - b'0') as u32,
                    ))
                } else {
                    Err(TermError::Syntax {
                        pos: at,
                        msg: "diagonal needs two single-digit indices or `d<i>,<j>`".into(),
                    })
                }
            }
            Some(b'(') => {
                self.pos += 1;
                let t = self.join()?;
                if self.peek() != Some(b')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(t)
            }
            Some(c) => self.err(format!("unexpected `{}`", c as char)),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses a term over generators `x0..x{m-1}`.
pub fn parse_term(text: &str, m: usize) -> Result<Term, TermError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        m,
    };
    let t = p.join()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }
}

/// A map `{0..m-1} → {−1, +1}` selecting a signed product of generators.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChoiceFunction(pub Vec<Sign>);

impl ChoiceFunction {
    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn sign(&self, k: usize) -> Sign {
        self.0[k]
    }

    /// All `2^m` choice functions; bit `k` of the ordinal set means `q(k) = −1`.
    pub fn all(m: usize) -> impl Iterator<Item = ChoiceFunction> {
        (0u64..(1u64 << m)).map(move |bits| {
            ChoiceFunction(
                (0..m)
                    .map(|k| {
                        if bits >> k & 1 == 1 {
                            Sign::Neg
                        } else {
                            Sign::Pos
                        }
                    })
                    .collect(),
            )
        })
    }

    /// The signed generator product `x_0^q · … · x_{m-1}^q`.
    pub fn product(&self) -> Term {
        Term::product(self.0.iter().enumerate().map(|(k, s)| match s {
            Sign::Pos => Term::Var(k),
            Sign::Neg => Term::not(Term::Var(k)),
        }))
    }
}

impl fmt::Display for ChoiceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, s) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", if *s == Sign::Pos { "+1" } else { "-1" })?;
        }
        write!(f, ")")
    }
}

/// `−c_0−d_{01}`: the sum of all atom terms.
pub fn no_distinct_pair() -> Term {
    Term::not(Term::cyl(0, Term::not(Term::diag(0, 1))))
}

/// `x_0^q · … · x_{m-1}^q · −c_0−d_{01}`.
pub fn atom_term(m: usize, q: &ChoiceFunction) -> Result<Term, TermError> {
    if m == 0 {
        return Err(TermError::NoGenerators);
    }
    if q.arity() != m {
        return Err(TermError::ChoiceArity {
            got: q.arity(),
            expected: m,
        });
    }
    Ok(signed_product_with(q, no_distinct_pair()))
}

/// `x_0^q · … · x_{m-1}^q · −c_i−d_{ij}`, the other side of the
/// zero-dimensionality identity.
pub fn atom_term_at(q: &ChoiceFunction, i: Index, j: Index) -> Term {
    let tail = Term::not(Term::Cyl(i, Box::new(Term::not(Term::Diag(i, j)))));
    signed_product_with(q, tail)
}

fn signed_product_with(q: &ChoiceFunction, tail: Term) -> Term {
    Term::product(
        q.0.iter()
            .enumerate()
            .map(|(k, s)| match s {
                Sign::Pos => Term::Var(k),
                Sign::Neg => Term::not(Term::Var(k)),
            })
            .chain(std::iter::once(tail)),
    )
}

/// Which coordinate carries the outer cylindrification of a splitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pivot {
    Zero,
    One,
}

impl Pivot {
    pub fn index(self) -> Index {
        match self {
            Pivot::Zero => Index(0),
            Pivot::One => Index(1),
        }
    }
}

/// `c_p(−d_{01} · c_i(x_0 · ±d_{ij}))`.
pub fn splitter_term(i: Index, j: Index, sign: Sign, pivot: Pivot) -> Result<Term, TermError> {
    if i == j || i.0 < 2 || j.0 < 2 {
        return Err(TermError::BadSplitterIndices(i, j));
    }
    let dij = Term::Diag(i, j);
    let signed = match sign {
        Sign::Pos => dij,
        Sign::Neg => Term::not(dij),
    };
    let inner = Term::Cyl(i, Box::new(Term::and(Term::Var(0), signed)));
    Ok(Term::Cyl(
        pivot.index(),
        Box::new(Term::and(Term::not(Term::diag(0, 1)), inner)),
    ))
}

/// Symmetric difference `a·−b + −a·b`.
pub fn xor(a: Term, b: Term) -> Term {
    Term::or(
        Term::and(a.clone(), Term::not(b.clone())),
        Term::and(Term::not(a), b),
    )
}

/// `c_(2) t = c_0 c_1 t`.
pub fn c2(t: Term) -> Term {
    Term::cyl(0, Term::cyl(1, t))
}

/// `s^i_j t = c_i(t · d_{ij})`.
pub fn subst(i: Index, j: Index, t: Term) -> Term {
    Term::Cyl(i, Box::new(Term::and(t, Term::Diag(i, j))))
}

/// `y = c_0x_0 · c_1x_0 − x_0`.
pub fn y_term() -> Term {
    let x = Term::Var(0);
    Term::and(
        Term::cyl(0, x.clone()),
        Term::minus(Term::cyl(1, x.clone()), x),
    )
}

/// `c_i(d_{01} · c_k x) · c_k x − d_{01}`.
fn diagonal_defect(i: u32, k: u32, x: Term) -> Term {
    let ckx = Term::cyl(k, x);
    Term::and(
        Term::cyl(i, Term::and(Term::diag(0, 1), ckx.clone())),
        Term::minus(ckx, Term::diag(0, 1)),
    )
}

/// The four-conjunct guard term `χ(x_0)`.
pub fn chi_term() -> Term {
    let x = Term::Var(0);
    let y = y_term();
    Term::product([
        Term::not(c2(xor(Term::cyl(0, x.clone()), Term::cyl(0, y.clone())))),
        Term::not(c2(xor(Term::cyl(1, x.clone()), Term::cyl(1, y)))),
        Term::not(c2(diagonal_defect(1, 0, x.clone()))),
        Term::not(c2(diagonal_defect(0, 1, x))),
    ])
}

/// `τ(x_0) = x_0 · χ(x_0)`.
pub fn tau_term() -> Term {
    Term::and(Term::Var(0), chi_term())
}

/// `η(x_0) = y · χ(x_0)`.
pub fn eta_term() -> Term {
    Term::and(y_term(), chi_term())
}
