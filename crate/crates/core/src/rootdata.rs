//! GL_n root data: simple and positive roots, trace-zero fundamental
//! coweights, the Weyl group S_n with inversion lengths, Kostant
//! representatives of W/Stab(mu), Galois orbits, and the decency and
//! basicness predicates on slope cocharacters.

use crate::exactnum::{rational_string, Q};
use num::BigInt;
use num_traits::Zero;
use std::collections::BTreeMap;

/// A (co)character of the diagonal torus, as a weight vector in Q^n.
pub type Cocharacter = Vec<Q>;

pub fn is_dominant(mu: &[Q]) -> bool {
    mu.windows(2).all(|w| w[0] >= w[1])
}

/// Standard Euclidean pairing on Q^n.
pub fn pairing(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// The root datum of GL_n with the standard diagonal torus.
#[derive(Clone, Debug, PartialEq)]
pub struct RootDatum {
    n: usize,
}

impl RootDatum {
    pub fn new(n: usize) -> crate::Result<Self> {
        if n == 0 {
            return Err(crate::Error::Invalid("rank must be positive".into()));
        }
        let rd = RootDatum { n };
        // (alpha_i, omega_j) = delta_ij and trace zero, by construction;
        // asserted because the coweights are center-corrected
        let alphas = rd.simple_roots();
        let omegas = rd.fundamental_coweights();
        for (i, a) in alphas.iter().enumerate() {
            for (j, w) in omegas.iter().enumerate() {
                let expect = if i == j { Q::from(BigInt::from(1)) } else { Q::zero() };
                assert_eq!(pairing(a, w), expect);
            }
        }
        for w in &omegas {
            assert!(w.iter().fold(Q::zero(), |a, b| a + b).is_zero());
        }
        Ok(rd)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// alpha_i = e_i - e_{i+1}, for i = 1..n-1.
    pub fn simple_roots(&self) -> Vec<Vec<Q>> {
        (0..self.n.saturating_sub(1))
            .map(|i| {
                let mut v = vec![Q::zero(); self.n];
                v[i] = Q::from(BigInt::from(1));
                v[i + 1] = Q::from(BigInt::from(-1));
                v
            })
            .collect()
    }

    /// e_i - e_j for i < j.
    pub fn positive_roots(&self) -> Vec<Vec<Q>> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let mut v = vec![Q::zero(); self.n];
                v[i] = Q::from(BigInt::from(1));
                v[j] = Q::from(BigInt::from(-1));
                out.push(v);
            }
        }
        out
    }

    /// Trace-zero coweights dual to the simple roots:
    /// omega_i = e_1 + ... + e_i - (i/n) * (1,...,1).
    pub fn fundamental_coweights(&self) -> Vec<Vec<Q>> {
        let n = self.n as i64;
        (1..self.n as i64)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let ind = if j < i { 1 } else { 0 };
                        Q::new(BigInt::from(ind * n - i), BigInt::from(n))
                    })
                    .collect()
            })
            .collect()
    }
}

/// A Weyl group element of GL_n, i.e. a permutation in one-line notation
/// (0-based internally: `perm[i]` is the image of i).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct WeylElement {
    pub perm: Vec<usize>,
    pub length: usize,
}

impl WeylElement {
    pub fn new(perm: Vec<usize>) -> crate::Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(crate::Error::Invalid("not a permutation".into()));
            }
            seen[p] = true;
        }
        let length = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| perm[i] > perm[j])
            .count();
        Ok(WeylElement { perm, length })
    }

    pub fn identity(n: usize) -> Self {
        WeylElement {
            perm: (0..n).collect(),
            length: 0,
        }
    }

    /// (w mu)_j = mu_{w^{-1}(j)}: w moves coordinate i to position w(i).
    pub fn apply(&self, mu: &[Q]) -> Cocharacter {
        let mut out = vec![Q::zero(); mu.len()];
        for (i, &wi) in self.perm.iter().enumerate() {
            out[wi] = mu[i].clone();
        }
        out
    }

    /// One-line notation with 1-based entries, e.g. "[2,1,3]".
    pub fn one_line(&self) -> String {
        let entries: Vec<String> = self.perm.iter().map(|p| (p + 1).to_string()).collect();
        format!("[{}]", entries.join(","))
    }
}

/// All n! elements, sorted by (length, lexicographic one-line notation).
pub fn weyl_group(rd: &RootDatum) -> crate::Result<Vec<WeylElement>> {
    let n = rd.n();
    if n > 8 {
        return Err(crate::Error::Capacity(format!(
            "Weyl group of GL_{n} has {n}! elements; limit is n <= 8"
        )));
    }
    use itertools::Itertools;
    let mut out: Vec<WeylElement> = (0..n)
        .permutations(n)
        .map(|p| WeylElement::new(p).expect("valid by construction"))
        .collect();
    out.sort_by(|a, b| (a.length, &a.perm).cmp(&(b.length, &b.perm)));
    Ok(out)
}

/// Minimal-length representatives of W/Stab(mu): one element per distinct
/// value of w*mu, sorted by (length, one-line notation).
pub fn kostant_representatives(rd: &RootDatum, mu: &[Q]) -> crate::Result<Vec<WeylElement>> {
    if mu.len() != rd.n() {
        return Err(crate::Error::Invalid("cocharacter of wrong rank".into()));
    }
    if !is_dominant(mu) {
        return Err(crate::Error::Invalid(format!(
            "cocharacter ({}) is not dominant",
            mu.iter().map(rational_string).collect::<Vec<_>>().join(", ")
        )));
    }
    let mut best: BTreeMap<Vec<Q>, WeylElement> = BTreeMap::new();
    for w in weyl_group(rd)? {
        let value = w.apply(mu);
        match best.get(&value) {
            Some(cur) if (cur.length, &cur.perm) <= (w.length, &w.perm) => {}
            _ => {
                best.insert(value, w);
            }
        }
    }
    let mut reps: Vec<WeylElement> = best.into_values().collect();
    reps.sort_by(|a, b| (a.length, &a.perm).cmp(&(b.length, &b.perm)));
    Ok(reps)
}

/// A Galois action on the index set of a list of Kostant representatives,
/// given as an explicit permutation (default trivial for split data).
#[derive(Clone, Debug, PartialEq)]
pub struct GaloisAction {
    perm: Vec<usize>,
    order: usize,
}

impl GaloisAction {
    pub fn new(perm: Vec<usize>) -> crate::Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(crate::Error::Invalid("Galois action is not a permutation".into()));
            }
            seen[p] = true;
        }
        // order = lcm of cycle lengths
        let mut order = 1usize;
        let mut visited = vec![false; n];
        for start in 0..n {
            if visited[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !visited[i] {
                visited[i] = true;
                i = perm[i];
                len += 1;
            }
            order = num::integer::lcm(order, len);
        }
        Ok(GaloisAction { perm, order })
    }

    pub fn trivial(n: usize) -> Self {
        GaloisAction {
            perm: (0..n).collect(),
            order: 1,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn image(&self, i: usize) -> usize {
        self.perm[i]
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }
}

/// One Galois orbit of Kostant representatives; all members share a length.
#[derive(Clone, Debug, PartialEq)]
pub struct GaloisOrbit {
    /// Orbit members sorted by one-line notation.
    pub members: Vec<WeylElement>,
    pub l_orbit: usize,
    pub size: usize,
}

/// Partition `reps` into orbits of `g`; rejects length-nonpreserving
/// actions naming the offending pair. Output is sorted by
/// (l_orbit, first member), hence independent of the input ordering.
pub fn galois_orbits(reps: &[WeylElement], g: &GaloisAction) -> crate::Result<Vec<GaloisOrbit>> {
    if g.len() != reps.len() {
        return Err(crate::Error::Invalid(
            "Galois action size does not match representative count".into(),
        ));
    }
    for i in 0..reps.len() {
        let j = g.image(i);
        if reps[i].length != reps[j].length {
            return Err(crate::Error::Invalid(format!(
                "Galois action does not preserve length: {} (length {}) -> {} (length {})",
                reps[i].one_line(),
                reps[i].length,
                reps[j].one_line(),
                reps[j].length
            )));
        }
    }
    let mut visited = vec![false; reps.len()];
    let mut orbits = Vec::new();
    for start in 0..reps.len() {
        if visited[start] {
            continue;
        }
        let mut members = Vec::new();
        let mut i = start;
        while !visited[i] {
            visited[i] = true;
            members.push(reps[i].clone());
            i = g.image(i);
        }
        members.sort();
        let size = members.len();
        orbits.push(GaloisOrbit {
            l_orbit: members[0].length,
            size,
            members,
        });
    }
    orbits.sort_by(|a, b| (a.l_orbit, &a.members[0].perm).cmp(&(b.l_orbit, &b.members[0].perm)));
    Ok(orbits)
}

/// First decency condition: s * nu_b has integral coordinates. The second
/// condition depends on b itself, which this representation does not carry.
pub fn is_decent(nu_b: &[Q], s: i64) -> crate::Result<bool> {
    if s <= 0 {
        return Err(crate::Error::Invalid("decency integer must be positive".into()));
    }
    let s = Q::from(BigInt::from(s));
    Ok(nu_b.iter().all(|x| (x * s.clone()).is_integer()))
}

/// Basic = central slope cocharacter: all coordinates equal.
pub fn is_basic(nu_b: &[Q]) -> bool {
    nu_b.windows(2).all(|w| w[0] == w[1])
}
