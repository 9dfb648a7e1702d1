//! Filtered isocrystals over the model field Q(t1..tm): degree, rank and
//! slope, phi-stable subspace enumeration, weak admissibility,
//! Harder-Narasimhan filtrations and Drinfeld-space membership.
//!
//! The ambient field K is modeled by Q(t1..tm); the rational structure over
//! the base is the constant subfield Q. Frobenius is represented through
//! its Dieudonne-Manin slope labels: basis vector i carries slope label
//! lambda_i, and phi-stable subspaces are the block-graded Q-rational ones.

use crate::exactnum::{
    coefficient_matrix, k_rank, parse_rational, parse_ratfunc, rational_string, Matrix, Q, RatFunc,
};
use crate::polygons::{hodge_polygon, polygon_from_slopes, Polygon};
use num::{BigInt, Integer};
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use rayon::prelude::*;
use serde_json::json;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

/// An isocrystal given by its Dieudonne-Manin slope labels, one per basis
/// vector of the underlying space.
#[derive(Clone, Debug, PartialEq)]
pub struct Isocrystal {
    slopes: Vec<Q>,
}

impl Isocrystal {
    pub fn new(slopes: Vec<Q>) -> crate::Result<Self> {
        if slopes.is_empty() {
            return Err(crate::Error::Invalid("isocrystal of rank zero".into()));
        }
        // each slope r/s in lowest terms must appear with multiplicity
        // divisible by s (decomposition into simple objects V_{r/s})
        let mut mult: BTreeMap<Q, usize> = BTreeMap::new();
        for s in &slopes {
            *mult.entry(s.clone()).or_insert(0) += 1;
        }
        for (slope, m) in &mult {
            let s = slope.denom();
            if BigInt::from(*m as i64).mod_floor(s) != BigInt::zero() {
                return Err(crate::Error::Invalid(format!(
                    "slope {} must have multiplicity divisible by {}",
                    rational_string(slope),
                    s
                )));
            }
        }
        Ok(Isocrystal { slopes })
    }

    pub fn rank(&self) -> usize {
        self.slopes.len()
    }

    pub fn slopes(&self) -> &[Q] {
        &self.slopes
    }

    pub fn has_integral_slopes(&self) -> bool {
        self.slopes.iter().all(|s| s.is_integer())
    }

    /// Sum of all slope labels = v_p(det phi).
    pub fn newton_degree(&self) -> Q {
        self.slopes.iter().fold(Q::zero(), |a, b| a + b)
    }

    pub fn newton_polygon(&self) -> Polygon {
        polygon_from_slopes(&self.slopes).expect("nonempty by construction")
    }

    /// Coordinate indices grouped by slope value, ascending in slope.
    pub fn blocks(&self) -> Vec<(Q, Vec<usize>)> {
        let mut map: BTreeMap<Q, Vec<usize>> = BTreeMap::new();
        for (i, s) in self.slopes.iter().enumerate() {
            map.entry(s.clone()).or_default().push(i);
        }
        map.into_iter().collect()
    }
}

/// One step of a decreasing filtration: the full subspace F^jump.
#[derive(Clone, Debug)]
pub struct FlagStep {
    pub jump: Q,
    pub basis: Vec<Vec<RatFunc>>,
}

/// A filtered isocrystal (V, phi, F V_K): slope labels plus a flag over
/// the model field, listed with strictly decreasing jumps and strictly
/// increasing subspaces ending at the full space.
#[derive(Clone, Debug)]
pub struct FilteredIsocrystal {
    iso: Isocrystal,
    flag: Vec<FlagStep>,
}

impl FilteredIsocrystal {
    pub fn new(iso: Isocrystal, flag: Vec<FlagStep>) -> crate::Result<Self> {
        let n = iso.rank();
        if flag.is_empty() {
            return Err(crate::Error::Invalid("flag must be nonempty".into()));
        }
        // common variable count
        let nv = flag
            .iter()
            .flat_map(|s| s.basis.iter().flatten())
            .map(|e| e.nvars())
            .max()
            .unwrap_or(0);
        let flag: Vec<FlagStep> = flag
            .into_iter()
            .map(|s| FlagStep {
                jump: s.jump,
                basis: s
                    .basis
                    .iter()
                    .map(|row| row.iter().map(|e| e.promote(nv)).collect())
                    .collect(),
            })
            .collect();
        let mut prev_dim = 0usize;
        let mut prev_jump: Option<Q> = None;
        for (idx, step) in flag.iter().enumerate() {
            if let Some(pj) = &prev_jump {
                if &step.jump >= pj {
                    return Err(crate::Error::Invalid("jumps must be strictly decreasing".into()));
                }
            }
            for row in &step.basis {
                if row.len() != n {
                    return Err(crate::Error::Invalid("flag vector of wrong length".into()));
                }
            }
            let dim = k_rank(&step.basis);
            if dim != step.basis.len() {
                return Err(crate::Error::Invalid("flag basis not linearly independent".into()));
            }
            if dim <= prev_dim && idx > 0 || dim == 0 {
                return Err(crate::Error::Invalid(
                    "flag subspaces must be strictly increasing with positive graded pieces".into(),
                ));
            }
            if idx > 0 {
                // span containment of the previous step
                let mut stacked = flag[idx - 1].basis.clone();
                stacked.extend(step.basis.clone());
                if k_rank(&stacked) != dim {
                    return Err(crate::Error::Invalid("flag subspaces must be nested".into()));
                }
            }
            prev_dim = dim;
            prev_jump = Some(step.jump.clone());
        }
        if prev_dim != n {
            return Err(crate::Error::Invalid("largest flag subspace must be the full space".into()));
        }
        Ok(FilteredIsocrystal { iso, flag })
    }

    pub fn iso(&self) -> &Isocrystal {
        &self.iso
    }

    pub fn flag(&self) -> &[FlagStep] {
        &self.flag
    }

    pub fn rank(&self) -> usize {
        self.iso.rank()
    }

    /// Filtration type: (jump, multiplicity of the graded piece).
    pub fn hodge_type(&self) -> Vec<(Q, usize)> {
        let mut out = Vec::new();
        let mut prev = 0usize;
        for step in &self.flag {
            out.push((step.jump.clone(), step.basis.len() - prev));
            prev = step.basis.len();
        }
        out
    }

    pub fn hodge_polygon(&self) -> Polygon {
        hodge_polygon(&self.hodge_type()).expect("valid by construction")
    }

    pub fn newton_polygon(&self) -> Polygon {
        self.iso.newton_polygon()
    }

    /// Degree of the Hodge side: sum of jump * dim gr^jump.
    pub fn hodge_degree(&self) -> Q {
        self.hodge_type()
            .iter()
            .fold(Q::zero(), |acc, (x, m)| acc + x * Q::from(BigInt::from(*m as i64)))
    }

    /// JSON schema: { "n", "slopes": ["a/b"], "flag": [{ "jump", "basis" }] }.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "n": self.rank(),
            "slopes": self.iso.slopes().iter().map(rational_string).collect::<Vec<_>>(),
            "flag": self.flag.iter().map(|s| json!({
                "jump": rational_string(&s.jump),
                "basis": s.basis.iter().map(|row| {
                    row.iter().map(|e| e.to_display()).collect::<Vec<_>>()
                }).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> crate::Result<Self> {
        let n = v["n"]
            .as_u64()
            .ok_or_else(|| crate::Error::Parse("missing field n".into()))? as usize;
        let slopes = v["slopes"]
            .as_array()
            .ok_or_else(|| crate::Error::Parse("missing field slopes".into()))?
            .iter()
            .map(|s| {
                s.as_str()
                    .ok_or_else(|| crate::Error::Parse("slope must be a string".into()))
                    .and_then(parse_rational)
            })
            .collect::<crate::Result<Vec<_>>>()?;
        if slopes.len() != n {
            return Err(crate::Error::Parse("slopes length must equal n".into()));
        }
        let flag = v["flag"]
            .as_array()
            .ok_or_else(|| crate::Error::Parse("missing field flag".into()))?
            .iter()
            .map(|step| -> crate::Result<FlagStep> {
                let jump = step["jump"]
                    .as_str()
                    .ok_or_else(|| crate::Error::Parse("jump must be a string".into()))
                    .and_then(parse_rational)?;
                let basis = step["basis"]
                    .as_array()
                    .ok_or_else(|| crate::Error::Parse("basis must be an array".into()))?
                    .iter()
                    .map(|row| {
                        row.as_array()
                            .ok_or_else(|| crate::Error::Parse("basis row must be an array".into()))?
                            .iter()
                            .map(|e| {
                                e.as_str()
                                    .ok_or_else(|| {
                                        crate::Error::Parse("basis entry must be a string".into())
                                    })
                                    .and_then(parse_ratfunc)
                            })
                            .collect::<crate::Result<Vec<_>>>()
                    })
                    .collect::<crate::Result<Vec<_>>>()?;
                Ok(FlagStep { jump, basis })
            })
            .collect::<crate::Result<Vec<_>>>()?;
        FilteredIsocrystal::new(Isocrystal::new(slopes)?, flag)
    }
}

/// Bounds the brute-force subspace search.
#[derive(Clone, Copy, Debug)]
pub struct SearchConfig {
    /// Max absolute value of entries of integer basis vectors enumerated.
    pub height_bound: u32,
    /// Partition candidate enumeration across worker threads. Results are
    /// order-normalized, so parallel and serial runs are bit-identical.
    pub parallel: bool,
}

impl SearchConfig {
    pub fn new(height_bound: u32) -> crate::Result<Self> {
        if height_bound == 0 {
            return Err(crate::Error::Invalid("height bound must be >= 1".into()));
        }
        Ok(SearchConfig {
            height_bound,
            parallel: false,
        })
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            height_bound: 3,
            parallel: false,
        }
    }
}

/// (rank, degree, slope) of a filtered isocrystal:
/// degree = Hodge terminal height - v_p(det phi), slope = degree/rank.
pub fn hn_invariants(fi: &FilteredIsocrystal) -> (usize, Q, Q) {
    let rank = fi.rank();
    let degree = fi.hodge_degree() - fi.iso.newton_degree();
    let slope = degree.clone() / Q::from(BigInt::from(rank as i64));
    (rank, degree, slope)
}

fn q_to_k(x: &Q, nvars: usize) -> RatFunc {
    RatFunc::from_rational(x.clone()).promote(nvars)
}

fn q_rows_to_k(rows: &[Vec<Q>], nvars: usize) -> Vec<Vec<RatFunc>> {
    rows.iter()
        .map(|r| r.iter().map(|x| q_to_k(x, nvars)).collect())
        .collect()
}

/// Basis (in B-coordinates) of span(A) /\ span(B), both row spans over K.
/// Both inputs must have independent rows.
fn intersect_in_b_coords(a: &[Vec<RatFunc>], b: &[Vec<RatFunc>], n: usize) -> Vec<Vec<RatFunc>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let (ra, rb) = (a.len(), b.len());
    let mut data = Vec::with_capacity(n * (ra + rb));
    for i in 0..n {
        for rowa in a {
            data.push(rowa[i].clone());
        }
        for rowb in b {
            data.push(rowb[i].clone());
        }
    }
    let m = Matrix::new(n, ra + rb, data);
    let (_, kernel) = m.rref_rank_kernel();
    // kernel vector (u, w): sum u_j a_j + sum w_k b_k = 0, so the
    // intersection vector is -sum w_k b_k, with B-coordinates -w.
    let coords: Vec<Vec<RatFunc>> = kernel
        .into_iter()
        .map(|v| v[ra..].iter().map(|x| -x.clone()).collect())
        .collect();
    if coords.is_empty() {
        return Vec::new();
    }
    Matrix::from_rows(coords).row_space_canonical()
}

fn check_phi_stable(iso: &Isocrystal, w_basis: &[Vec<Q>]) -> crate::Result<()> {
    let n = iso.rank();
    for row in w_basis {
        if row.len() != n {
            return Err(crate::Error::Invalid("subspace vector of wrong length".into()));
        }
        let slopes: BTreeSet<&Q> = row
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, _)| &iso.slopes()[i])
            .collect();
        if slopes.len() > 1 {
            return Err(crate::Error::Invalid(format!(
                "not phi-stable: vector ({}) mixes slopes {{{}}}",
                row.iter().map(rational_string).collect::<Vec<_>>().join(", "),
                slopes.iter().map(|s| rational_string(s)).collect::<Vec<_>>().join(", ")
            )));
        }
    }
    if !w_basis.is_empty() {
        let m = Matrix::from_rows(w_basis.to_vec());
        if m.rank() != w_basis.len() {
            return Err(crate::Error::Invalid("subspace basis not independent".into()));
        }
    }
    Ok(())
}

/// The sub filtered isocrystal on a phi-stable rational subspace W,
/// expressed in the coordinates of `w_basis`: slope labels restricted to
/// W's block decomposition, flag F' = F /\ (W tensor K).
pub fn induced_sub(fi: &FilteredIsocrystal, w_basis: &[Vec<Q>]) -> crate::Result<FilteredIsocrystal> {
    check_phi_stable(fi.iso(), w_basis)?;
    let n = fi.rank();
    if w_basis.is_empty() {
        return Err(crate::Error::Invalid("induced structure on the zero subspace".into()));
    }
    let nv = fi.flag[0].basis[0][0].nvars();
    let w_k = q_rows_to_k(w_basis, nv);
    // slope label of each W basis vector = slope of its (unique) block
    let labels: Vec<Q> = w_basis
        .iter()
        .map(|row| {
            let i = row.iter().position(|x| !x.is_zero()).expect("nonzero row");
            fi.iso.slopes()[i].clone()
        })
        .collect();
    let mut steps: Vec<FlagStep> = Vec::new();
    let mut prev_dim = 0usize;
    for step in &fi.flag {
        let inter = intersect_in_b_coords(&step.basis, &w_k, n);
        let dim = inter.len();
        if dim > prev_dim {
            steps.push(FlagStep {
                jump: step.jump.clone(),
                basis: inter,
            });
            prev_dim = dim;
        }
    }
    FilteredIsocrystal::new(Isocrystal::new(labels)?, steps)
}

/// The quotient filtered isocrystal V/W with the image filtration,
/// in coordinates given by the non-pivot ambient coordinates of W.
pub fn induced_quotient(
    fi: &FilteredIsocrystal,
    w_basis: &[Vec<Q>],
) -> crate::Result<FilteredIsocrystal> {
    check_phi_stable(fi.iso(), w_basis)?;
    let n = fi.rank();
    if w_basis.len() >= n {
        return Err(crate::Error::Invalid("quotient by the full space".into()));
    }
    let nv = fi.flag[0].basis[0][0].nvars();
    let (w_rref, pivots) = if w_basis.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let (m, p) = Matrix::from_rows(w_basis.to_vec()).rref();
        (m.to_rows(), p)
    };
    let free: Vec<usize> = (0..n).filter(|i| !pivots.contains(i)).collect();
    let labels: Vec<Q> = free.iter().map(|&i| fi.iso.slopes()[i].clone()).collect();
    let w_rref_k = q_rows_to_k(&w_rref, nv);
    // pi(v): reduce v modulo W, read off the free coordinates
    let project = |v: &[RatFunc]| -> Vec<RatFunc> {
        let mut v = v.to_vec();
        for (r, &pc) in pivots.iter().enumerate() {
            let c = v[pc].clone();
            if !c.is_zero() {
                for j in 0..n {
                    let sub = c.clone() * w_rref_k[r][j].clone();
                    v[j] = v[j].clone() - sub;
                }
            }
        }
        free.iter().map(|&i| v[i].clone()).collect()
    };
    let mut steps: Vec<FlagStep> = Vec::new();
    let mut prev_dim = 0usize;
    for step in &fi.flag {
        let images: Vec<Vec<RatFunc>> = step.basis.iter().map(|v| project(v)).collect();
        let basis = Matrix::from_rows(images).row_space_canonical();
        let dim = basis.len();
        if dim > prev_dim {
            steps.push(FlagStep {
                jump: step.jump.clone(),
                basis,
            });
            prev_dim = dim;
        }
    }
    FilteredIsocrystal::new(Isocrystal::new(labels)?, steps)
}

/// Degree of the induced structure on W without building the sub object:
/// graded dimensions come from exact ranks of stacked bases over K.
pub fn induced_degree(fi: &FilteredIsocrystal, w_basis: &[Vec<Q>]) -> crate::Result<Q> {
    check_phi_stable(fi.iso(), w_basis)?;
    if w_basis.is_empty() {
        return Ok(Q::zero());
    }
    let nv = fi.flag[0].basis[0][0].nvars();
    let w_k = q_rows_to_k(w_basis, nv);
    let w_dim = w_basis.len();
    let mut hodge = Q::zero();
    let mut prev_dim = 0usize;
    // walk flag steps from smallest subspace; F is constant in between
    for step in fi.flag.iter() {
        if prev_dim == w_dim {
            break; // intersection already all of W
        }
        let dim = if step.basis.len() == fi.rank() {
            w_dim // full space: no rank needed
        } else {
            let mut stacked = step.basis.clone();
            stacked.extend(w_k.clone());
            step.basis.len() + w_dim - k_rank(&stacked)
        };
        if dim > prev_dim {
            hodge += step.jump.clone() * Q::from(BigInt::from((dim - prev_dim) as i64));
            prev_dim = dim;
        }
    }
    let newton: Q = w_basis
        .iter()
        .map(|row| {
            let i = row.iter().position(|x| !x.is_zero()).expect("nonzero row");
            fi.iso.slopes()[i].clone()
        })
        .fold(Q::zero(), |a, b| a + b);
    Ok(hodge - newton)
}

/// Newton and Hodge polygons of the induced structure on W, computed from
/// intersection dimensions alone (agrees with building `induced_sub`).
pub fn induced_polygons(
    fi: &FilteredIsocrystal,
    w_basis: &[Vec<Q>],
) -> crate::Result<(Polygon, Polygon)> {
    check_phi_stable(fi.iso(), w_basis)?;
    if w_basis.is_empty() {
        return Err(crate::Error::Invalid("polygons of the zero subspace".into()));
    }
    let nv = fi.flag[0].basis[0][0].nvars();
    let w_k = q_rows_to_k(w_basis, nv);
    let w_dim = w_basis.len();
    let labels: Vec<Q> = w_basis
        .iter()
        .map(|row| {
            let i = row.iter().position(|x| !x.is_zero()).expect("nonzero row");
            fi.iso.slopes()[i].clone()
        })
        .collect();
    let mut hodge_type: Vec<(Q, usize)> = Vec::new();
    let mut prev_dim = 0usize;
    for step in fi.flag.iter() {
        if prev_dim == w_dim {
            break;
        }
        let dim = if step.basis.len() == fi.rank() {
            w_dim
        } else {
            let mut stacked = step.basis.clone();
            stacked.extend(w_k.clone());
            step.basis.len() + w_dim - k_rank(&stacked)
        };
        if dim > prev_dim {
            hodge_type.push((step.jump.clone(), dim - prev_dim));
            prev_dim = dim;
        }
    }
    Ok((polygon_from_slopes(&labels)?, hodge_polygon(&hodge_type)?))
}

type Basis = Vec<Vec<Q>>;

static SUBSPACE_CACHE: Lazy<Mutex<HashMap<(usize, usize, u32), std::sync::Arc<Vec<Basis>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// All k-dimensional subspaces of Q^m spanned by integer vectors with
/// entries bounded by h, canonicalized and sorted by their rref basis.
fn block_subspaces(m: usize, k: usize, h: u32, parallel: bool) -> crate::Result<std::sync::Arc<Vec<Basis>>> {
    if let Some(v) = SUBSPACE_CACHE.lock().unwrap().get(&(m, k, h)) {
        return Ok(v.clone());
    }
    let result: Vec<Basis> = if k == 0 {
        vec![Vec::new()]
    } else if k == m {
        vec![Matrix::<Q>::identity(m).to_rows()]
    } else {
        let dirs = bounded_directions(m, h);
        let combos: Vec<Vec<usize>> = k_combinations(dirs.len(), k);
        if combos.len() > 2_000_000 {
            return Err(crate::Error::Capacity(format!(
                "subspace enumeration too large: {} candidate bases",
                combos.len()
            )));
        }
        let reduce = |c: &Vec<usize>| -> Option<Basis> {
            let rows: Vec<Vec<Q>> = c
                .iter()
                .map(|&i| dirs[i].iter().map(|&x| Q::from(BigInt::from(x))).collect())
                .collect();
            let canon = Matrix::from_rows(rows).row_space_canonical();
            (canon.len() == k).then_some(canon)
        };
        let set: BTreeSet<Basis> = if parallel {
            combos
                .par_iter()
                .filter_map(reduce)
                .fold(BTreeSet::new, |mut acc, b| {
                    acc.insert(b);
                    acc
                })
                .reduce(BTreeSet::new, |mut a, b| {
                    a.extend(b);
                    a
                })
        } else {
            combos.iter().filter_map(reduce).collect()
        };
        set.into_iter().collect()
    };
    let arc = std::sync::Arc::new(result);
    SUBSPACE_CACHE.lock().unwrap().insert((m, k, h), arc.clone());
    Ok(arc)
}

/// Nonzero integer vectors in [-h, h]^m up to positive scaling, primitive,
/// first nonzero entry positive.
fn bounded_directions(m: usize, h: u32) -> Vec<Vec<i64>> {
    let h = h as i64;
    let mut set: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut v = vec![-h; m];
    loop {
        if v.iter().any(|&x| x != 0) {
            let g = v.iter().fold(0i64, |acc, &x| acc.gcd(&x.abs()));
            let mut w: Vec<i64> = v.iter().map(|&x| x / g).collect();
            if w.iter().find(|&&x| x != 0).map(|&x| x < 0).unwrap_or(false) {
                for x in &mut w {
                    *x = -*x;
                }
            }
            set.insert(w);
        }
        // next vector in lexicographic order
        let mut i = m;
        loop {
            if i == 0 {
                return set.into_iter().collect();
            }
            i -= 1;
            if v[i] < h {
                v[i] += 1;
                for x in &mut v[i + 1..] {
                    *x = -h;
                }
                break;
            }
        }
    }
}

fn k_combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (0..n).combinations(k).collect()
}

/// All phi-stable subspaces of the given dimension that are direct sums,
/// over slope blocks, of Q-spans of height-bounded integer vectors.
/// Requires integral slope labels (isoclinic blocks with s = 1).
pub fn enumerate_phi_stable_subspaces(
    iso: &Isocrystal,
    dim: usize,
    cfg: &SearchConfig,
) -> crate::Result<Vec<Basis>> {
    if !iso.has_integral_slopes() {
        return Err(crate::Error::Unsupported(
            "subspace enumeration requires integral slope labels".into(),
        ));
    }
    if dim > iso.rank() {
        return Err(crate::Error::Invalid("dimension exceeds rank".into()));
    }
    let blocks = iso.blocks();
    // distribute dim over blocks: all compositions bounded by block sizes
    let sizes: Vec<usize> = blocks.iter().map(|(_, idx)| idx.len()).collect();
    let mut out: BTreeSet<Basis> = BTreeSet::new();
    let mut profile = vec![0usize; blocks.len()];
    distribute(dim, &sizes, 0, &mut profile, &mut |profile| -> crate::Result<()> {
        // per-block subspace choices
        let choices: Vec<std::sync::Arc<Vec<Basis>>> = profile
            .iter()
            .zip(&sizes)
            .map(|(&k, &m)| block_subspaces(m, k, cfg.height_bound, cfg.parallel))
            .collect::<crate::Result<Vec<_>>>()?;
        let mut idx = vec![0usize; choices.len()];
        loop {
            // assemble one subspace from the current per-block picks
            let mut rows: Vec<Vec<Q>> = Vec::new();
            for (b, (_, coords)) in blocks.iter().enumerate() {
                for v in choices[b][idx[b]].iter() {
                    let mut row = vec![Q::zero(); iso.rank()];
                    for (j, &c) in coords.iter().enumerate() {
                        row[c] = v[j].clone();
                    }
                    rows.push(row);
                }
            }
            let canon = if rows.is_empty() {
                Vec::new()
            } else {
                Matrix::from_rows(rows).row_space_canonical()
            };
            out.insert(canon);
            // advance the mixed-radix counter
            let mut b = 0;
            loop {
                if b == choices.len() {
                    return Ok(());
                }
                idx[b] += 1;
                if idx[b] < choices[b].len() {
                    break;
                }
                idx[b] = 0;
                b += 1;
            }
        }
    })?;
    Ok(out.into_iter().collect())
}

fn distribute(
    remaining: usize,
    sizes: &[usize],
    at: usize,
    profile: &mut Vec<usize>,
    f: &mut impl FnMut(&Vec<usize>) -> crate::Result<()>,
) -> crate::Result<()> {
    if at == sizes.len() {
        if remaining == 0 {
            f(profile)?;
        }
        return Ok(());
    }
    for k in 0..=sizes[at].min(remaining) {
        profile[at] = k;
        distribute(remaining - k, sizes, at + 1, profile, f)?;
    }
    profile[at] = 0;
    Ok(())
}

/// Verdict of the weak admissibility check, carrying the bound used.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Admissible {
        height_bound: u32,
    },
    /// Total degree nonzero: not admissible regardless of subspaces.
    NonzeroDegree {
        degree: Q,
        height_bound: u32,
    },
    /// A phi-stable proper subspace of positive induced degree.
    ViolatedBy {
        subspace: Basis,
        degree: Q,
        height_bound: u32,
    },
}

impl Verdict {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Verdict::Admissible { .. })
    }
}

/// Weak admissibility: total degree zero and every enumerated phi-stable
/// proper nonzero subspace has induced degree <= 0.
pub fn is_weakly_admissible(fi: &FilteredIsocrystal, cfg: &SearchConfig) -> crate::Result<Verdict> {
    let (_, degree, _) = hn_invariants(fi);
    if !degree.is_zero() {
        return Ok(Verdict::NonzeroDegree {
            degree,
            height_bound: cfg.height_bound,
        });
    }
    let n = fi.rank();
    // first violator in canonical enumeration order; deterministic
    let mut worst: Option<(Q, Basis)> = None;
    'scan: for dim in 1..n {
        for w in enumerate_phi_stable_subspaces(fi.iso(), dim, cfg)? {
            let d = induced_degree(fi, &w)?;
            if d > Q::zero() {
                worst = Some((d, w));
                break 'scan;
            }
        }
    }
    Ok(match worst {
        Some((degree, subspace)) => Verdict::ViolatedBy {
            subspace,
            degree,
            height_bound: cfg.height_bound,
        },
        None => Verdict::Admissible {
            height_bound: cfg.height_bound,
        },
    })
}

/// One step of the Harder-Narasimhan report: the subspace reached, and the
/// rank/degree/slope of the corresponding quotient piece.
#[derive(Clone, Debug)]
pub struct HNPiece {
    pub subspace_basis: Basis,
    pub rank: usize,
    pub degree: Q,
    pub slope: Q,
}

#[derive(Clone, Debug)]
pub struct HNReport {
    pub pieces: Vec<HNPiece>,
    pub height_bound: u32,
}

impl HNReport {
    pub fn is_semistable(&self) -> bool {
        self.pieces.len() == 1
    }
}

/// Greedy Harder-Narasimhan filtration over the height-bounded subspace
/// pool: repeatedly pick the subspace containing the previous piece that
/// maximizes (quotient slope, rank), tie-broken by the lexicographically
/// smallest echelon basis.
pub fn hn_filtration(fi: &FilteredIsocrystal, cfg: &SearchConfig) -> crate::Result<HNReport> {
    let n = fi.rank();
    // pool of all candidate subspaces with cached degrees
    let mut pool: Vec<(Basis, Q)> = Vec::new();
    for dim in 1..=n {
        for w in enumerate_phi_stable_subspaces(fi.iso(), dim, cfg)? {
            let d = induced_degree(fi, &w)?;
            pool.push((w, d));
        }
    }
    let contains = |big: &Basis, small: &Basis| -> bool {
        if small.is_empty() {
            return true;
        }
        let mut rows = big.clone();
        rows.extend(small.clone());
        Matrix::from_rows(rows).rank() == big.len()
    };
    let mut current: Basis = Vec::new();
    let mut current_deg = Q::zero();
    let mut pieces: Vec<HNPiece> = Vec::new();
    while current.len() < n {
        let mut best: Option<(Q, usize, &Basis, Q)> = None; // slope, rank, basis, deg
        for (w, d) in &pool {
            if w.len() <= current.len() || !contains(w, &current) {
                continue;
            }
            let rk = w.len() - current.len();
            let slope = (d.clone() - current_deg.clone()) / Q::from(BigInt::from(rk as i64));
            let better = match &best {
                None => true,
                Some((bs, br, bb, _)) => {
                    (&slope, w.len()).cmp(&(bs, *br)) == std::cmp::Ordering::Greater
                        || (&slope == bs && w.len() == *br && &w < bb)
                }
            };
            if better {
                best = Some((slope, w.len(), w, d.clone()));
            }
        }
        let (slope, _, w, d) = best.expect("full space is always a candidate");
        pieces.push(HNPiece {
            subspace_basis: w.clone(),
            rank: w.len() - current.len(),
            degree: d.clone() - current_deg.clone(),
            slope,
        });
        current = w.clone();
        current_deg = d;
    }
    for pair in pieces.windows(2) {
        if pair[1].slope >= pair[0].slope {
            return Err(crate::Error::Invalid(
                "HN slopes failed to decrease; height bound too small".into(),
            ));
        }
    }
    Ok(HNReport {
        pieces,
        height_bound: cfg.height_bound,
    })
}

/// Drinfeld-space membership: the homogeneous coordinates avoid every
/// rational hyperplane iff they are Q-linearly independent.
pub fn drinfeld_membership(coords: &[RatFunc]) -> crate::Result<bool> {
    if coords.is_empty() || coords.iter().all(|c| c.is_zero()) {
        return Err(crate::Error::Invalid("zero coordinate vector".into()));
    }
    let nv = coords.iter().map(|c| c.nvars()).max().unwrap_or(0);
    let coords: Vec<RatFunc> = coords.iter().map(|c| c.promote(nv)).collect();
    let m = coefficient_matrix(&coords)?;
    Ok(m.rank() == coords.len())
}

/// The standard Drinfeld datum for GL_n: trivial isocrystal, filtration of
/// type ((n-1)^1, (-1)^(n-1)) given by one line.
pub fn drinfeld_datum(coords: &[RatFunc]) -> crate::Result<FilteredIsocrystal> {
    let n = coords.len();
    if n < 2 {
        return Err(crate::Error::Invalid("Drinfeld datum needs rank >= 2".into()));
    }
    if coords.iter().all(|c| c.is_zero()) {
        return Err(crate::Error::Invalid("zero coordinate vector".into()));
    }
    let nv = coords.iter().map(|c| c.nvars()).max().unwrap_or(0);
    let line: Vec<RatFunc> = coords.iter().map(|c| c.promote(nv)).collect();
    let full = q_rows_to_k(&Matrix::<Q>::identity(n).to_rows(), nv);
    let iso = Isocrystal::new(vec![Q::zero(); n])?;
    FilteredIsocrystal::new(
        iso,
        vec![
            FlagStep {
                jump: Q::from(BigInt::from(n as i64 - 1)),
                basis: vec![line],
            },
            FlagStep {
                jump: -Q::one(),
                basis: full,
            },
        ],
    )
}

/// Tensor product of filtered isocrystals: slope labels add pairwise and
/// the filtration is F^x = sum over a+b >= x of F^a tensor F^b.
pub fn tensor_product(
    a: &FilteredIsocrystal,
    b: &FilteredIsocrystal,
) -> crate::Result<FilteredIsocrystal> {
    let (n1, n2) = (a.rank(), b.rank());
    let nv = a.flag[0].basis[0][0]
        .nvars()
        .max(b.flag[0].basis[0][0].nvars());
    let mut slopes = Vec::with_capacity(n1 * n2);
    for s1 in a.iso.slopes() {
        for s2 in b.iso.slopes() {
            slopes.push(s1.clone() + s2.clone());
        }
    }
    let kron = |u: &[RatFunc], v: &[RatFunc]| -> Vec<RatFunc> {
        let mut out = Vec::with_capacity(n1 * n2);
        for x in u {
            for y in v {
                out.push(x.clone().promote(nv) * y.clone().promote(nv));
            }
        }
        out
    };
    let mut sums: BTreeSet<Q> = BTreeSet::new();
    for sa in &a.flag {
        for sb in &b.flag {
            sums.insert(sa.jump.clone() + sb.jump.clone());
        }
    }
    let mut steps: Vec<FlagStep> = Vec::new();
    let mut prev_dim = 0usize;
    for x in sums.into_iter().rev() {
        let mut gens: Vec<Vec<RatFunc>> = Vec::new();
        for sa in &a.flag {
            for sb in &b.flag {
                if sa.jump.clone() + sb.jump.clone() >= x {
                    for u in &sa.basis {
                        for v in &sb.basis {
                            gens.push(kron(u, v));
                        }
                    }
                }
            }
        }
        let basis = Matrix::from_rows(gens).row_space_canonical();
        if basis.len() > prev_dim {
            prev_dim = basis.len();
            steps.push(FlagStep { jump: x, basis });
        }
    }
    FilteredIsocrystal::new(Isocrystal::new(slopes)?, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygons::polygon_compare;

    fn q(n: i64) -> Q {
        Q::from(BigInt::from(n))
    }

    fn qrow(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| q(x)).collect()
    }

    fn krow(v: &[&str]) -> Vec<RatFunc> {
        v.iter().map(|s| parse_ratfunc(s).unwrap()).collect()
    }

    fn trivial_fi(n: usize) -> FilteredIsocrystal {
        // slopes all 0, filtration type (0^n)
        FilteredIsocrystal::new(
            Isocrystal::new(vec![Q::zero(); n]).unwrap(),
            vec![FlagStep {
                jump: Q::zero(),
                basis: q_rows_to_k(&Matrix::<Q>::identity(n).to_rows(), 0),
            }],
        )
        .unwrap()
    }

    fn drinfeld2(x: &str, y: &str) -> FilteredIsocrystal {
        drinfeld_datum(&krow(&[x, y])).unwrap()
    }

    #[test]
    fn dm_multiplicity_invariant() {
        assert!(Isocrystal::new(vec![Q::new(BigInt::from(1), BigInt::from(2))]).is_err());
        assert!(Isocrystal::new(vec![
            Q::new(BigInt::from(1), BigInt::from(2)),
            Q::new(BigInt::from(1), BigInt::from(2))
        ])
        .is_ok());
    }

    #[test]
    fn hn_invariants_examples() {
        let (r, d, s) = hn_invariants(&trivial_fi(3));
        assert_eq!((r, d, s), (3, q(0), q(0)));
        let (r, d, s) = hn_invariants(&drinfeld2("1", "t"));
        assert_eq!((r, d, s), (2, q(0), q(0)));
        // slopes (1,0), type (1,0)
        let fi = FilteredIsocrystal::new(
            Isocrystal::new(vec![q(1), q(0)]).unwrap(),
            vec![
                FlagStep {
                    jump: q(1),
                    basis: vec![krow(&["1", "0"])],
                },
                FlagStep {
                    jump: q(0),
                    basis: q_rows_to_k(&Matrix::<Q>::identity(2).to_rows(), 0),
                },
            ],
        )
        .unwrap();
        assert_eq!(hn_invariants(&fi), (2, q(0), q(0)));
    }

    #[test]
    fn induced_sub_examples() {
        let fi = drinfeld2("1", "t");
        // full space: same invariants
        let full = Matrix::<Q>::identity(2).to_rows();
        let sub = induced_sub(&fi, &full).unwrap();
        assert_eq!(hn_invariants(&sub), hn_invariants(&fi));
        // rational line e1: the line (1,t) is not inside, induced type (-1)
        let sub = induced_sub(&fi, &[qrow(&[1, 0])]).unwrap();
        assert_eq!(sub.hodge_type(), vec![(q(-1), 1)]);
        // point line = e1: W = e1 gives induced type (1)
        let fi = drinfeld2("1", "0");
        let sub = induced_sub(&fi, &[qrow(&[1, 0])]).unwrap();
        assert_eq!(sub.hodge_type(), vec![(q(1), 1)]);
    }

    #[test]
    fn induced_sub_rejects_mixed_slopes() {
        let fi = FilteredIsocrystal::new(
            Isocrystal::new(vec![q(1), q(0)]).unwrap(),
            vec![FlagStep {
                jump: q(0),
                basis: q_rows_to_k(&Matrix::<Q>::identity(2).to_rows(), 0),
            }],
        )
        .unwrap();
        let err = induced_sub(&fi, &[qrow(&[1, 1])]).unwrap_err();
        assert!(err.to_string().contains("mixes slopes"));
    }

    #[test]
    fn enumeration_examples() {
        let iso = Isocrystal::new(vec![q(0), q(0)]).unwrap();
        let cfg = SearchConfig::new(1).unwrap();
        let lines = enumerate_phi_stable_subspaces(&iso, 1, &cfg).unwrap();
        assert_eq!(lines.len(), 4); // spans of (1,0),(0,1),(1,1),(1,-1)
        let iso = Isocrystal::new(vec![q(1), q(0)]).unwrap();
        let lines = enumerate_phi_stable_subspaces(&iso, 1, &cfg).unwrap();
        assert_eq!(lines.len(), 2); // the two slope axes
        let zero = enumerate_phi_stable_subspaces(&iso, 0, &cfg).unwrap();
        assert_eq!(zero, vec![Vec::<Vec<Q>>::new()]);
        // non-integral slopes unsupported
        let iso = Isocrystal::new(vec![
            Q::new(BigInt::from(1), BigInt::from(2)),
            Q::new(BigInt::from(1), BigInt::from(2)),
        ])
        .unwrap();
        assert!(matches!(
            enumerate_phi_stable_subspaces(&iso, 1, &cfg),
            Err(crate::Error::Unsupported(_))
        ));
    }

    #[test]
    fn weak_admissibility_examples() {
        let cfg = SearchConfig::default();
        assert!(is_weakly_admissible(&drinfeld2("1", "t"), &cfg).unwrap().is_admissible());
        match is_weakly_admissible(&drinfeld2("1", "2"), &cfg).unwrap() {
            Verdict::ViolatedBy { subspace, degree, .. } => {
                assert_eq!(subspace, vec![qrow(&[1, 2])]);
                assert_eq!(degree, q(1));
            }
            v => panic!("expected violation, got {v:?}"),
        }
        // total degree nonzero: slopes (0,0), type (1,0)
        let fi = FilteredIsocrystal::new(
            Isocrystal::new(vec![q(0), q(0)]).unwrap(),
            vec![
                FlagStep {
                    jump: q(1),
                    basis: vec![krow(&["1", "t"])],
                },
                FlagStep {
                    jump: q(0),
                    basis: q_rows_to_k(&Matrix::<Q>::identity(2).to_rows(), 1),
                },
            ],
        )
        .unwrap();
        assert!(matches!(
            is_weakly_admissible(&fi, &cfg).unwrap(),
            Verdict::NonzeroDegree { .. }
        ));
    }

    #[test]
    fn hn_examples() {
        let cfg = SearchConfig::default();
        // weakly admissible: a single slope-zero piece
        let rep = hn_filtration(&drinfeld2("1", "t"), &cfg).unwrap();
        assert!(rep.is_semistable());
        assert_eq!(rep.pieces[0].slope, q(0));
        // Drinfeld with rational line (1,2): pieces of slopes (1, -1)
        let rep = hn_filtration(&drinfeld2("1", "2"), &cfg).unwrap();
        assert_eq!(rep.pieces.len(), 2);
        assert_eq!(rep.pieces[0].subspace_basis, vec![qrow(&[1, 2])]);
        assert_eq!(rep.pieces[0].slope, q(1));
        assert_eq!(rep.pieces[1].slope, q(-1));
        // slopes (1,0), trivial filtration: pieces of slopes (0, -1)
        let fi = FilteredIsocrystal::new(
            Isocrystal::new(vec![q(1), q(0)]).unwrap(),
            vec![FlagStep {
                jump: q(0),
                basis: q_rows_to_k(&Matrix::<Q>::identity(2).to_rows(), 0),
            }],
        )
        .unwrap();
        let rep = hn_filtration(&fi, &cfg).unwrap();
        let slopes: Vec<Q> = rep.pieces.iter().map(|p| p.slope.clone()).collect();
        assert_eq!(slopes, vec![q(0), q(-1)]);
    }

    #[test]
    fn degree_is_additive_on_quotients() {
        let fi = drinfeld2("1", "2");
        let cfg = SearchConfig::default();
        let (_, total, _) = hn_invariants(&fi);
        for w in enumerate_phi_stable_subspaces(fi.iso(), 1, &cfg).unwrap() {
            let sub = induced_sub(&fi, &w).unwrap();
            let quot = induced_quotient(&fi, &w).unwrap();
            let (_, ds, _) = hn_invariants(&sub);
            let (_, dq, _) = hn_invariants(&quot);
            assert_eq!(ds + dq, total);
        }
    }

    #[test]
    fn drinfeld_membership_examples() {
        assert!(drinfeld_membership(&krow(&["1", "t"])).unwrap());
        assert!(!drinfeld_membership(&krow(&["1", "2"])).unwrap());
        assert!(drinfeld_membership(&krow(&["1", "t", "t^2"])).unwrap());
        assert!(!drinfeld_membership(&krow(&["1", "t", "1+t"])).unwrap());
        assert!(drinfeld_membership(&krow(&["0", "0"])).is_err());
    }

    #[test]
    fn admissible_implies_newton_above_hodge() {
        let fi = drinfeld2("1", "t");
        let (above, eq) = polygon_compare(&fi.newton_polygon(), &fi.hodge_polygon()).unwrap();
        assert!(above && eq);
        // on subobjects only the inequality holds
        let sub = induced_sub(&fi, &[qrow(&[1, 0])]).unwrap();
        let (above, _) = polygon_compare(&sub.newton_polygon(), &sub.hodge_polygon()).unwrap();
        assert!(above);
    }

    #[test]
    fn induced_polygons_match_induced_sub() {
        let cfg = SearchConfig::new(2).unwrap();
        for fi in [drinfeld2("1", "t"), drinfeld2("1", "2"), drinfeld2("1+t", "t^2")] {
            for w in enumerate_phi_stable_subspaces(fi.iso(), 1, &cfg).unwrap() {
                let (newton, hodge) = induced_polygons(&fi, &w).unwrap();
                let sub = induced_sub(&fi, &w).unwrap();
                assert_eq!(newton, sub.newton_polygon());
                assert_eq!(hodge, sub.hodge_polygon());
            }
        }
    }

    #[test]
    fn tensor_of_semistables_has_no_violating_subspace() {
        // bound-limited evidence for the tensor-product theorem
        let cfg = SearchConfig::new(1).unwrap();
        let a = drinfeld2("1", "t");
        let b = drinfeld2("1", "1+t");
        let t = tensor_product(&a, &b).unwrap();
        let (r, d, _) = hn_invariants(&t);
        assert_eq!(r, 4);
        assert_eq!(d, q(0));
        for dim in 1..4 {
            for w in enumerate_phi_stable_subspaces(t.iso(), dim, &cfg).unwrap() {
                assert!(induced_degree(&t, &w).unwrap() <= q(0));
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let fi = drinfeld2("1", "t");
        let j = fi.to_json();
        let back = FilteredIsocrystal::from_json(&j).unwrap();
        assert_eq!(back.to_json(), j);
    }
}
