//! Elements of the model field Q(t1,...,tm): rational functions with
//! decidable equality via cross-multiplication.

use super::matrix::Matrix;
use super::poly::Poly;
use super::Q;
use num::BigInt;
use num_traits::{One, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A rational function num/den over Q in variables t1..tm.
///
/// Normal form: the denominator has coprime integer coefficients and a
/// positive graded-lex leading coefficient. Equality is decided by
/// cross-multiplication, so no polynomial gcd is ever needed.
#[derive(Clone, Debug)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> crate::Result<Self> {
        if den.is_zero() {
            return Err(crate::Error::Invalid(
                "zero denominator in model field element".into(),
            ));
        }
        let nv = num.nvars().max(den.nvars());
        Ok(Self::normalized(num.promote(nv), den.promote(nv)))
    }

    fn normalized(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFunc {
                num: Poly::zero(den.nvars()),
                den: Poly::constant(den.nvars(), Q::one()),
            };
        }
        let mut scale = den.content().recip();
        if den.leading_coeff() < Q::zero() {
            scale = -scale;
        }
        RatFunc {
            num: num.scale(&scale),
            den: den.scale(&scale),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        let nv = p.nvars();
        RatFunc {
            num: p,
            den: Poly::constant(nv, Q::one()),
        }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        RatFunc::from_poly(Poly::constant(nvars, c))
    }

    pub fn variable(nvars: usize, idx: usize) -> Self {
        RatFunc::from_poly(Poly::variable(nvars, idx))
    }

    pub fn from_rational(c: Q) -> Self {
        RatFunc::constant(0, c)
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn promote(&self, nvars: usize) -> RatFunc {
        RatFunc {
            num: self.num.promote(nvars),
            den: self.den.promote(nvars),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    /// The constant value, if this element lies in Q.
    pub fn as_rational(&self) -> Option<Q> {
        if self.num.is_constant() && self.den.is_constant() {
            Some(self.num.leading_coeff() / self.den.leading_coeff())
        } else {
            None
        }
    }

    pub fn to_display(&self) -> String {
        let names: Vec<String> = (0..self.nvars()).map(|i| format!("t{}", i + 1)).collect();
        if self.den.is_constant() && self.den.leading_coeff().is_one() {
            self.num.to_display(&names)
        } else {
            format!("({})/({})", self.num.to_display(&names), self.den.to_display(&names))
        }
    }
}

impl PartialEq for RatFunc {
    fn eq(&self, other: &Self) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl Add for RatFunc {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let num = self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den));
        let den = self.den.mul(&rhs.den);
        RatFunc::normalized(num, den)
    }
}

impl Sub for RatFunc {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for RatFunc {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        RatFunc::normalized(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }
}

impl Div for RatFunc {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.num.is_zero(), "division by zero in Q(t)");
        RatFunc::normalized(self.num.mul(&rhs.den), self.den.mul(&rhs.num))
    }
}

impl Neg for RatFunc {
    type Output = Self;
    fn neg(self) -> Self {
        RatFunc {
            num: self.num.neg(),
            den: self.den,
        }
    }
}

impl Zero for RatFunc {
    fn zero() -> Self {
        RatFunc::constant(0, Q::zero())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RatFunc {
    fn one() -> Self {
        RatFunc::constant(0, Q::one())
    }
}

/// Q-coefficient matrix of a list of model field elements.
///
/// Inputs are cleared to a common polynomial denominator; row i holds the
/// coefficients of the cleared numerator of input i on the union of
/// occurring monomials, in ascending graded-lex order. Q-linear dependence
/// of the inputs is equivalent to row dependence of the result.
pub fn coefficient_matrix(elems: &[RatFunc]) -> crate::Result<Matrix<Q>> {
    if elems.is_empty() {
        return Err(crate::Error::Invalid("coefficient_matrix of empty list".into()));
    }
    let nv = elems[0].nvars();
    if elems.iter().any(|e| e.nvars() != nv) {
        return Err(crate::Error::Invalid(
            "mismatched variable sets in coefficient_matrix".into(),
        ));
    }
    // Clear denominators: numerator_i * prod_{j != i} den_j.
    let cleared: Vec<Poly> = (0..elems.len())
        .map(|i| {
            let mut p = elems[i].num().clone();
            for (j, e) in elems.iter().enumerate() {
                if j != i {
                    p = p.mul(e.den());
                }
            }
            p
        })
        .collect();
    let mut monos = std::collections::BTreeSet::new();
    for p in &cleared {
        for (m, _) in p.terms() {
            monos.insert(m.clone());
        }
    }
    let monos: Vec<_> = monos.into_iter().collect();
    let cols = monos.len().max(1);
    let mut rows = Vec::with_capacity(cleared.len());
    for p in &cleared {
        let mut row = vec![Q::zero(); cols];
        for (m, c) in p.terms() {
            let idx = monos.binary_search(m).expect("monomial in union");
            row[idx] = c.clone();
        }
        rows.push(row);
    }
    Ok(Matrix::from_rows(rows))
}

/// Exact rank over Q(t1..tm) of a row list, by specialization.
///
/// Denominators are cleared row by row (this preserves rank), after which
/// every r x r minor is a polynomial whose degree in variable v is at most
/// D_v = sum over rows of the row's maximal v-degree. A nonzero polynomial
/// with v-degree <= D_v cannot vanish on a full grid with D_v + 1 points
/// per variable, so the rank equals the maximum specialized rank over such
/// a grid. Falls back to direct elimination over Q(t) when the grid would
/// be large.
pub fn k_rank(rows: &[Vec<RatFunc>]) -> usize {
    if rows.is_empty() || rows[0].is_empty() {
        return 0;
    }
    let nv = rows.iter().flatten().map(|e| e.nvars()).max().unwrap_or(0);
    if nv == 0 {
        let data: Vec<Vec<Q>> = rows
            .iter()
            .map(|r| r.iter().map(|e| e.as_rational().expect("constant")).collect())
            .collect();
        return Matrix::from_rows(data).rank();
    }
    // clear denominators: entry_j -> num_j * prod_{k != j} den_k
    let cleared: Vec<Vec<Poly>> = rows
        .iter()
        .map(|row| {
            let row: Vec<RatFunc> = row.iter().map(|e| e.promote(nv)).collect();
            (0..row.len())
                .map(|j| {
                    let mut p = row[j].num.clone();
                    for (k, e) in row.iter().enumerate() {
                        if k != j && !e.den.is_constant() {
                            p = p.mul(&e.den);
                        }
                    }
                    p
                })
                .collect()
        })
        .collect();
    let bounds: Vec<u32> = (0..nv)
        .map(|v| {
            cleared
                .iter()
                .map(|row| row.iter().map(|p| p.var_degree(v) as u32).max().unwrap_or(0))
                .sum()
        })
        .collect();
    let grid_size: u128 = bounds.iter().map(|&d| d as u128 + 1).product();
    if grid_size > 512 {
        let data: Vec<RatFunc> = rows
            .iter()
            .flat_map(|r| r.iter().map(|e| e.promote(nv)))
            .collect();
        return Matrix::new(rows.len(), rows[0].len(), data).rank();
    }
    let max_rank = rows.len().min(rows[0].len());
    let mut best = 0usize;
    let mut point_idx = vec![0u32; nv];
    loop {
        let point: Vec<Q> = point_idx.iter().map(|&i| Q::from(BigInt::from(i))).collect();
        let data: Vec<Vec<Q>> = cleared
            .iter()
            .map(|row| row.iter().map(|p| p.eval(&point)).collect())
            .collect();
        best = best.max(Matrix::from_rows(data).rank());
        if best == max_rank {
            return best;
        }
        // advance the mixed-radix grid counter
        let mut v = 0;
        loop {
            if v == nv {
                return best;
            }
            point_idx[v] += 1;
            if point_idx[v] <= bounds[v] {
                break;
            }
            point_idx[v] = 0;
            v += 1;
        }
    }
}

/// Parse a model field element such as "1+t", "t1*t2^2" or "(1-t)/(1+t)".
///
/// `t` is an alias for `t1`. The result uses `nvars` = the largest variable
/// index mentioned (0 for constants).
pub fn parse_ratfunc(input: &str) -> crate::Result<RatFunc> {
    let tokens = tokenize(input)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(crate::Error::Parse(format!(
            "trailing input in `{input}`"
        )));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> crate::Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                out.push(Tok::Int(lit.parse().unwrap()));
            }
            't' => {
                i += 1;
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let idx = if start == i {
                    1
                } else {
                    let lit: String = chars[start..i].iter().collect();
                    lit.parse::<usize>()
                        .map_err(|_| crate::Error::Parse(format!("bad variable in `{s}`")))?
                };
                if idx == 0 {
                    return Err(crate::Error::Parse("variables start at t1".into()));
                }
                out.push(Tok::Var(idx - 1));
            }
            _ => {
                return Err(crate::Error::Parse(format!(
                    "unexpected character `{c}` in `{s}`"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> crate::Result<RatFunc> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t {
                Tok::Plus => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Tok::Minus => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> crate::Result<RatFunc> {
        let mut acc = self.factor()?;
        while let Some(t) = self.peek() {
            match t {
                Tok::Star => {
                    self.pos += 1;
                    acc = acc * self.factor()?;
                }
                Tok::Slash => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    if rhs.is_zero() {
                        return Err(crate::Error::Parse("division by zero".into()));
                    }
                    acc = acc / rhs;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> crate::Result<RatFunc> {
        let base = self.base()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let Some(Tok::Int(e)) = self.peek().cloned() else {
                return Err(crate::Error::Parse("expected exponent after ^".into()));
            };
            self.pos += 1;
            let e: u32 = e
                .try_into()
                .map_err(|_| crate::Error::Parse("exponent too large".into()))?;
            let mut acc = RatFunc::one();
            for _ in 0..e {
                acc = acc * base.clone();
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn base(&mut self) -> crate::Result<RatFunc> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(RatFunc::from_rational(Q::from(n)))
            }
            Some(Tok::Var(idx)) => {
                self.pos += 1;
                Ok(RatFunc::variable(idx + 1, idx))
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.base()?)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(crate::Error::Parse("unbalanced parentheses".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            _ => Err(crate::Error::Parse("unexpected end of expression".into())),
        }
    }
}
