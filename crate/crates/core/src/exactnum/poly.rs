//! Sparse multivariate polynomials over Q with graded-lex monomial order.

use super::Q;
use num::{BigInt, BigRational};
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// A monomial in variables t1..tm, as an exponent vector.
///
/// Ordered graded-lexicographically: total degree first, then lex on
/// exponents. `BTreeMap<Mono, _>` therefore iterates monomials in
/// ascending graded-lex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<u16>);

impl Mono {
    pub fn one(nvars: usize) -> Self {
        Mono(vec![0; nvars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn pad(&self, nvars: usize) -> Mono {
        let mut v = self.0.clone();
        v.resize(nvars, 0);
        Mono(v)
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in Q[t1..tm]; zero is the empty term map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Mono, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Poly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Mono::one(nvars), c);
        }
        p
    }

    pub fn variable(nvars: usize, idx: usize) -> Self {
        assert!(idx < nvars, "variable index out of range");
        let mut expts = vec![0u16; nvars];
        expts[idx] = 1;
        let mut p = Poly::zero(nvars);
        p.terms.insert(Mono(expts), Q::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Q)> {
        self.terms.iter()
    }

    /// Leading coefficient under graded-lex.
    pub fn leading_coeff(&self) -> Q {
        self.terms
            .iter()
            .next_back()
            .map_or_else(Q::zero, |(_, c)| c.clone())
    }

    /// Promote to a larger variable set.
    pub fn promote(&self, nvars: usize) -> Poly {
        assert!(nvars >= self.nvars);
        Poly {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.pad(nvars), c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let nv = self.nvars.max(other.nvars);
        let (a, b) = (self.promote(nv), other.promote(nv));
        let mut terms = a.terms;
        for (m, c) in b.terms {
            let e = terms.entry(m).or_insert_with(Q::zero);
            *e += c;
        }
        terms.retain(|_, c| !c.is_zero());
        Poly { nvars: nv, terms }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let nv = self.nvars.max(other.nvars);
        let (a, b) = (self.promote(nv), other.promote(nv));
        let mut terms: BTreeMap<Mono, Q> = BTreeMap::new();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let m = ma.mul(mb);
                let e = terms.entry(m).or_insert_with(Q::zero);
                *e += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Poly { nvars: nv, terms }
    }

    pub fn scale(&self, c: &Q) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    /// The positive rational r such that `self / r` has coprime integer
    /// coefficients (content, extended to rational coefficients).
    pub fn content(&self) -> Q {
        if self.is_zero() {
            return Q::one();
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num::Integer::gcd(&num_gcd, &c.numer().abs());
            den_lcm = num::Integer::lcm(&den_lcm, c.denom());
        }
        BigRational::new(num_gcd, den_lcm)
    }

    /// Largest exponent of variable `v` across all terms.
    pub fn var_degree(&self, v: usize) -> u16 {
        self.terms.keys().map(|m| m.0[v]).max().unwrap_or(0)
    }

    /// Evaluate at a rational point (one coordinate per variable).
    pub fn eval(&self, point: &[Q]) -> Q {
        assert_eq!(point.len(), self.nvars);
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (v, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    term *= &point[v];
                }
            }
            acc += term;
        }
        acc
    }

    pub fn to_display(&self, var_names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (m, c) in self.terms.iter().rev() {
            let mono: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        var_names[i].clone()
                    } else {
                        format!("{}^{}", var_names[i], e)
                    }
                })
                .collect();
            let coeff = super::rational_string(c);
            let piece = if mono.is_empty() {
                coeff
            } else if c.is_one() {
                mono.join("*")
            } else if (-c.clone()).is_one() {
                format!("-{}", mono.join("*"))
            } else {
                format!("{}*{}", coeff, mono.join("*"))
            };
            if out.is_empty() {
                out = piece;
            } else if let Some(stripped) = piece.strip_prefix('-') {
                out = format!("{out}-{stripped}");
            } else {
                out = format!("{out}+{piece}");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from(BigInt::from(n))
    }

    #[test]
    fn graded_lex_order() {
        // 1 < t2 < t1 < t2^2 < t1*t2 < t1^2
        let m = |a: u16, b: u16| Mono(vec![a, b]);
        assert!(m(0, 0) < m(0, 1));
        assert!(m(0, 1) < m(1, 0));
        assert!(m(1, 0) < m(0, 2));
        assert!(m(0, 2) < m(1, 1));
        assert!(m(1, 1) < m(2, 0));
    }

    #[test]
    fn arithmetic_and_content() {
        let t = Poly::variable(1, 0);
        let p = t.mul(&t).add(&Poly::constant(1, q(-1))); // t^2 - 1
        let f1 = t.add(&Poly::constant(1, q(1)));
        let f2 = t.add(&Poly::constant(1, q(-1)));
        assert_eq!(p, f1.mul(&f2));
        assert_eq!(p.scale(&Q::new(BigInt::from(4), BigInt::from(6))).content(), Q::new(BigInt::from(2), BigInt::from(3)));
        assert!(p.sub(&p).is_zero());
    }
}
