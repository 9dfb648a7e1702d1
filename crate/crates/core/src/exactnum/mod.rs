//! Exact arithmetic over Q, the rational function field Q(t1,...,tm) and
//! prime fields F_p, together with generic rank/kernel linear algebra.

mod fp;
mod matrix;
mod poly;
mod ratfunc;

pub use fp::{fp_rank, Fp};
pub use matrix::Matrix;
pub use poly::{Mono, Poly};
pub use ratfunc::{coefficient_matrix, k_rank, parse_ratfunc, RatFunc};

use num::BigRational;
use num_traits::{One, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exact rationals; all slope and degree values live here.
pub type Q = BigRational;

/// A field with decidable equality, the scalar type of the linear algebra
/// engine. Implemented by `Q`, `RatFunc` and `Fp<P>`.
pub trait Field:
    Clone
    + PartialEq
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
}

impl<T> Field for T where
    T: Clone
        + PartialEq
        + Debug
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>
        + Zero
        + One
{
}

/// Parse "a/b" or "a" into an exact rational.
pub fn parse_rational(s: &str) -> crate::Result<Q> {
    use num::BigInt;
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| crate::Error::Parse(format!("bad rational `{s}`")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| crate::Error::Parse(format!("bad rational `{s}`")))?;
    if d.is_zero() {
        return Err(crate::Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(Q::new(n, d))
}

/// Render a rational as "a" or "a/b".
pub fn rational_string(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// p-adic valuation of a nonzero rational.
pub fn padic_valuation(x: &Q, p: u64) -> i64 {
    use num::BigInt;
    use num_traits::Signed;
    assert!(!x.is_zero(), "valuation of zero");
    let p = BigInt::from(p);
    let count = |mut n: BigInt| -> i64 {
        let mut v = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            v += 1;
        }
        v
    };
    count(x.numer().abs()) - count(x.denom().abs())
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parse_roundtrip() {
        let x = parse_rational("-3/6").unwrap();
        assert_eq!(rational_string(&x), "-1/2");
        assert_eq!(rational_string(&parse_rational("5").unwrap()), "5");
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn padic_valuations() {
        assert_eq!(padic_valuation(&parse_rational("8").unwrap(), 2), 3);
        assert_eq!(padic_valuation(&parse_rational("3/4").unwrap(), 2), -2);
        assert_eq!(padic_valuation(&parse_rational("5").unwrap(), 3), 0);
    }

    #[test]
    fn primality() {
        assert!(is_prime(2) && is_prime(3) && is_prime(7));
        assert!(!is_prime(1) && !is_prime(4) && !is_prime(9));
    }
}
