//! The prime field F_p as a const-generic scalar.

use num_traits::{One, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// An element of F_P for a prime modulus P.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct Fp<const P: u64>(pub u64);

impl<const P: u64> Fp<P> {
    pub fn new(v: i64) -> Self {
        Fp(v.rem_euclid(P as i64) as u64)
    }

    pub fn inv(self) -> Self {
        assert!(self.0 != 0, "inverse of zero in F_{P}");
        // Fermat: p is small, pow is fine.
        let mut acc = 1u64;
        let mut base = self.0 % P;
        let mut e = P - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % P;
            }
            base = base * base % P;
            e >>= 1;
        }
        Fp(acc)
    }
}

impl<const P: u64> Add for Fp<P> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Fp((self.0 + rhs.0) % P)
    }
}

impl<const P: u64> Sub for Fp<P> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Fp((self.0 + P - rhs.0) % P)
    }
}

impl<const P: u64> Mul for Fp<P> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Fp(self.0 * rhs.0 % P)
    }
}

impl<const P: u64> Div for Fp<P> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * rhs.inv()
    }
}

impl<const P: u64> Neg for Fp<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Fp((P - self.0) % P)
    }
}

impl<const P: u64> Zero for Fp<P> {
    fn zero() -> Self {
        Fp(0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
}

impl<const P: u64> One for Fp<P> {
    fn one() -> Self {
        Fp(1 % P)
    }
}

/// Rank over F_p of a dense matrix given as rows of residues.
///
/// Dispatches over the small primes that occur as characteristics of the
/// finite flag models (q <= 9, so p in {2, 3, 5, 7}).
pub fn fp_rank(p: u64, rows: &[Vec<u64>], cols: usize) -> crate::Result<usize> {
    fn go<const P: u64>(rows: &[Vec<u64>], cols: usize) -> usize {
        let data: Vec<Fp<P>> = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| Fp::<P>(v % P)))
            .collect();
        super::Matrix::new(rows.len(), cols, data).rank()
    }
    match p {
        2 => Ok(go::<2>(rows, cols)),
        3 => Ok(go::<3>(rows, cols)),
        5 => Ok(go::<5>(rows, cols)),
        7 => Ok(go::<7>(rows, cols)),
        _ => Err(crate::Error::Unsupported(format!(
            "prime {p} not supported for F_p rank"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_smoke() {
        let a = Fp::<7>::new(3);
        let b = Fp::<7>::new(5);
        assert_eq!(a + b, Fp::new(1));
        assert_eq!(a * b, Fp::new(1));
        assert_eq!(a / b, a * b.inv());
        assert_eq!(b * b.inv(), Fp::new(1));
        assert_eq!(-a, Fp::new(4));
    }

    #[test]
    fn rank_mod_2() {
        let rows = vec![vec![1, 1], vec![1, 1]];
        assert_eq!(fp_rank(2, &rows, 2).unwrap(), 1);
        // [[1,1],[1,2]] reduces to [[1,1],[0,1]] mod 2 and mod 3.
        let rows = vec![vec![1, 1], vec![1, 2]];
        assert_eq!(fp_rank(2, &rows, 2).unwrap(), 2);
        assert_eq!(fp_rank(3, &rows, 2).unwrap(), 2);
    }
}
