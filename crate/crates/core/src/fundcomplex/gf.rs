//! Small finite fields F_q, q = p^k <= 9, with table-driven arithmetic.
//! Elements are indices 0..q; for prime powers the index is read base p as
//! the coefficient vector of a polynomial modulo a fixed irreducible.

/// Arithmetic tables for F_q. Supported q: 2, 3, 4, 5, 7, 8, 9.
#[derive(Clone, Debug)]
pub struct Gf {
    pub q: usize,
    pub p: u64,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

/// Modulus polynomials (coefficients of x^0..x^k, then leading 1 implicit):
/// x^2+x+1 over F_2, x^3+x+1 over F_2, x^2+1 over F_3.
fn modulus(q: usize) -> Option<(u64, Vec<u64>)> {
    match q {
        2 | 3 | 5 | 7 => Some((q as u64, vec![])),
        4 => Some((2, vec![1, 1])),
        8 => Some((2, vec![1, 1, 0])),
        9 => Some((3, vec![1, 0])),
        _ => None,
    }
}

fn digits(mut x: usize, p: u64, k: usize) -> Vec<u64> {
    let mut d = vec![0u64; k];
    for di in d.iter_mut() {
        *di = (x as u64) % p;
        x /= p as usize;
    }
    d
}

fn undigits(d: &[u64], p: u64) -> usize {
    d.iter().rev().fold(0usize, |acc, &x| acc * p as usize + x as usize)
}

impl Gf {
    pub fn new(q: usize) -> crate::Result<Self> {
        let (p, lower) = modulus(q)
            .ok_or_else(|| crate::Error::Unsupported(format!("field size {q} not supported")))?;
        let k = lower.len().max(1);
        let poly_mul = |a: usize, b: usize| -> usize {
            let (da, db) = (digits(a, p, k), digits(b, p, k));
            let mut prod = vec![0u64; 2 * k];
            for (i, &x) in da.iter().enumerate() {
                for (j, &y) in db.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x * y) % p;
                }
            }
            // reduce modulo the irreducible: x^k = -lower
            for deg in (k..2 * k).rev() {
                let c = prod[deg];
                if c != 0 {
                    prod[deg] = 0;
                    for (i, &l) in lower.iter().enumerate() {
                        prod[deg - k + i] = (prod[deg - k + i] + (p - l % p) * c) % p;
                    }
                }
            }
            undigits(&prod[..k], p)
        };
        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        let mut neg = vec![0u8; q];
        let mut inv = vec![0u8; q];
        for a in 0..q {
            for b in 0..q {
                let (da, db) = (digits(a, p, k), digits(b, p, k));
                let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = undigits(&sum, p) as u8;
                mul[a * q + b] = poly_mul(a, b) as u8;
            }
        }
        for a in 0..q {
            let dn: Vec<u64> = digits(a, p, k).iter().map(|&x| (p - x) % p).collect();
            neg[a] = undigits(&dn, p) as u8;
            if a != 0 {
                inv[a] = (1..q).find(|&b| mul[a * q + b] == 1).expect("field inverse") as u8;
            }
        }
        Ok(Gf { q, p, add, mul, neg, inv })
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }
}
