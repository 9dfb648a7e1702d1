//! Finite models of the fundamental complex: partial flag varieties of
//! F_q^n as coset sets X_I with forgetful projections, stalk selectors,
//! the signed complex 0 -> F -> (+)_{|D\I|=1} F_I -> ... -> F_empty -> 0,
//! homology over F_p, disjoint-cover extension, and E_1-page bookkeeping.

pub mod gf;

use crate::exactnum::fp_rank;
use gf::Gf;
use itertools::Itertools;
use std::collections::{BTreeMap, BTreeSet};

/// A subset of the simple roots, as 1-based indices alpha_1..alpha_{n-1}.
pub type RootSubset = BTreeSet<usize>;

/// A subspace of F_q^n as a reduced row echelon basis (canonical label).
type Subspace = Vec<Vec<u8>>;

/// A partial flag: nested subspaces of ascending dimension.
type Flag = Vec<Subspace>;

/// Dimensions recorded by flags in X_I: {d : alpha_d not in I}.
pub fn flag_dims(n: usize, i_set: &RootSubset) -> Vec<usize> {
    (1..n).filter(|d| !i_set.contains(d)).collect()
}

fn gaussian_binomial(n: usize, k: usize, q: usize) -> u128 {
    let qp = |e: usize| (q as u128).pow(e as u32);
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..k {
        num *= qp(n - i) - 1;
        den *= qp(i + 1) - 1;
    }
    num / den
}

fn expected_count(n: usize, dims: &[usize], q: usize) -> u128 {
    let mut count = 1u128;
    let mut upper = n;
    for &d in dims.iter().rev() {
        count *= gaussian_binomial(upper, d, q);
        upper = d;
    }
    count
}

/// All d-dimensional subspaces of F_q^n, enumerated directly in reduced
/// row echelon form, sorted.
fn subspaces(n: usize, d: usize, f: &Gf) -> Vec<Subspace> {
    if d == 0 {
        return vec![Vec::new()];
    }
    let q = f.q as u8;
    let mut out = Vec::new();
    for pivots in (0..n).combinations(d) {
        let free: Vec<(usize, usize)> = (0..d)
            .flat_map(|i| {
                let pivots = &pivots;
                (pivots[i] + 1..n)
                    .filter(move |j| !pivots.contains(j))
                    .map(move |j| (i, j))
            })
            .collect();
        let mut assignment = vec![0u8; free.len()];
        loop {
            let mut rows = vec![vec![0u8; n]; d];
            for (i, &p) in pivots.iter().enumerate() {
                rows[i][p] = 1;
            }
            for (k, &(i, j)) in free.iter().enumerate() {
                rows[i][j] = assignment[k];
            }
            out.push(rows);
            let mut k = 0;
            loop {
                if k == assignment.len() {
                    break;
                }
                assignment[k] += 1;
                if assignment[k] < q {
                    break;
                }
                assignment[k] = 0;
                k += 1;
            }
            if k == assignment.len() {
                break;
            }
        }
    }
    out.sort();
    out
}

/// Does the row space of `big` (in rref) contain every row of `small`?
fn contains(big: &Subspace, small: &Subspace, f: &Gf) -> bool {
    small.iter().all(|row| {
        let mut v = row.clone();
        for brow in big {
            let pivot = brow.iter().position(|&x| x != 0).expect("nonzero rref row");
            let c = v[pivot];
            if c != 0 {
                for (vj, &bj) in v.iter_mut().zip(brow) {
                    *vj = f.add(*vj, f.neg(f.mul(c, bj)));
                }
            }
        }
        v.iter().all(|&x| x == 0)
    })
}

/// Partial flag varieties of F_q^n for every I, with the forgetful
/// projections p_{I,I'} between adjacent strata.
pub struct FiniteFlagModel {
    n: usize,
    q: usize,
    strata: BTreeMap<RootSubset, Vec<Flag>>,
    /// (I, I' = I + one root) -> image index per point of X_I.
    proj: BTreeMap<(RootSubset, RootSubset), Vec<usize>>,
}

pub fn build_finite_flag_model(n: usize, q: usize) -> crate::Result<FiniteFlagModel> {
    if n == 0 || n > 4 {
        return Err(crate::Error::Capacity(format!("flag model limited to 1 <= n <= 4, got {n}")));
    }
    let f = Gf::new(q)?;
    let full_dims: Vec<usize> = (1..n).collect();
    let total = expected_count(n, &full_dims, q);
    if total > 5000 {
        return Err(crate::Error::Capacity(format!(
            "full flag variety has {total} points; limit is 5000"
        )));
    }
    let by_dim: Vec<Vec<Subspace>> = (0..n).map(|d| subspaces(n, d, &f)).collect();
    let delta: Vec<usize> = (1..n).collect();
    let mut strata: BTreeMap<RootSubset, Vec<Flag>> = BTreeMap::new();
    for k in 0..=delta.len() {
        for i_vec in delta.iter().copied().combinations(k) {
            let i_set: RootSubset = i_vec.into_iter().collect();
            let dims = flag_dims(n, &i_set);
            let mut flags: Vec<Flag> = vec![Vec::new()];
            for &d in &dims {
                let mut next = Vec::new();
                for fl in &flags {
                    for s in &by_dim[d] {
                        if fl.last().map_or(true, |prev| contains(s, prev, &f)) {
                            let mut nf = fl.clone();
                            nf.push(s.clone());
                            next.push(nf);
                        }
                    }
                }
                flags = next;
            }
            flags.sort();
            let expected = expected_count(n, &dims, q);
            if flags.len() as u128 != expected {
                return Err(crate::Error::Invalid(format!(
                    "coset count mismatch for I = {i_set:?}: got {}, expected {expected}",
                    flags.len()
                )));
            }
            strata.insert(i_set, flags);
        }
    }
    // forgetful projections between adjacent strata
    let index: BTreeMap<&RootSubset, BTreeMap<&Flag, usize>> = strata
        .iter()
        .map(|(i, flags)| (i, flags.iter().enumerate().map(|(k, fl)| (fl, k)).collect()))
        .collect();
    let mut proj = BTreeMap::new();
    for (i_set, flags) in &strata {
        let dims = flag_dims(n, i_set);
        for &a in &delta {
            if i_set.contains(&a) {
                continue;
            }
            let mut bigger = i_set.clone();
            bigger.insert(a);
            let drop_pos = dims.iter().position(|&d| d == a).expect("a indexes a dim");
            let map: Vec<usize> = flags
                .iter()
                .map(|fl| {
                    let mut image = fl.clone();
                    image.remove(drop_pos);
                    index[&bigger][&image]
                })
                .collect();
            // surjectivity
            let hit: BTreeSet<usize> = map.iter().copied().collect();
            assert_eq!(hit.len(), strata[&bigger].len(), "projection not surjective");
            proj.insert((i_set.clone(), bigger), map);
        }
    }
    let model = FiniteFlagModel { n, q, strata, proj };
    // commuting squares: adding two roots in either order agrees
    for i_set in model.strata.keys() {
        for &a in &delta {
            for &b in &delta {
                if a >= b || i_set.contains(&a) || i_set.contains(&b) {
                    continue;
                }
                let mut both = i_set.clone();
                both.insert(a);
                both.insert(b);
                for x in 0..model.strata[i_set].len() {
                    let via_a = model.step(i_set, a, x);
                    let mut ia = i_set.clone();
                    ia.insert(a);
                    let via_ab = model.step(&ia, b, via_a);
                    let via_b = model.step(i_set, b, x);
                    let mut ib = i_set.clone();
                    ib.insert(b);
                    let via_ba = model.step(&ib, a, via_b);
                    assert_eq!(via_ab, via_ba, "projection squares must commute");
                }
                let _ = both;
            }
        }
    }
    Ok(model)
}

impl FiniteFlagModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn char_p(&self) -> u64 {
        Gf::new(self.q).expect("validated at build").p
    }

    pub fn delta(&self) -> Vec<usize> {
        (1..self.n).collect()
    }

    pub fn size(&self, i_set: &RootSubset) -> usize {
        self.strata[i_set].len()
    }

    pub fn subsets(&self) -> Vec<RootSubset> {
        self.strata.keys().cloned().collect()
    }

    fn step(&self, i_set: &RootSubset, root: usize, x: usize) -> usize {
        let mut bigger = i_set.clone();
        bigger.insert(root);
        self.proj[&(i_set.clone(), bigger)][x]
    }

    /// Project a point of X_I to X_{I'}, I subset of I', composing the
    /// one-step maps in ascending root order (order-independent).
    pub fn project_point(&self, from: &RootSubset, to: &RootSubset, x: usize) -> usize {
        debug_assert!(from.is_subset(to));
        let mut cur_set = from.clone();
        let mut cur = x;
        for &a in to.iter() {
            if !cur_set.contains(&a) {
                cur = self.step(&cur_set, a, cur);
                cur_set.insert(a);
            }
        }
        cur
    }
}

/// For each I, a nonempty subset X_I(x) of X_I, compatible with the
/// projections; the finite stand-in for a boundary point's incidence data.
pub struct StalkSelector {
    sets: BTreeMap<RootSubset, Vec<usize>>,
}

impl StalkSelector {
    pub fn full(m: &FiniteFlagModel) -> Self {
        StalkSelector {
            sets: m
                .strata
                .iter()
                .map(|(i, flags)| (i.clone(), (0..flags.len()).collect()))
                .collect(),
        }
    }

    /// One point per stratum: the standard coordinate flag and its images.
    pub fn singleton(m: &FiniteFlagModel) -> Self {
        let mut sets = BTreeMap::new();
        for (i_set, flags) in &m.strata {
            let dims = flag_dims(m.n, i_set);
            let standard: Flag = dims
                .iter()
                .map(|&d| {
                    (0..d)
                        .map(|r| {
                            let mut row = vec![0u8; m.n];
                            row[r] = 1;
                            row
                        })
                        .collect()
                })
                .collect();
            let idx = flags.iter().position(|fl| fl == &standard).expect("standard flag");
            sets.insert(i_set.clone(), vec![idx]);
        }
        StalkSelector { sets }
    }

    pub fn custom(m: &FiniteFlagModel, sets: BTreeMap<RootSubset, Vec<usize>>) -> crate::Result<Self> {
        for (i_set, flags) in &m.strata {
            let sel = sets
                .get(i_set)
                .ok_or_else(|| crate::Error::Invalid(format!("selector missing stratum {i_set:?}")))?;
            if sel.is_empty() {
                return Err(crate::Error::Invalid(format!("selector empty on {i_set:?}")));
            }
            let mut sorted = sel.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != sel.len() || sorted != *sel || *sorted.last().unwrap() >= flags.len() {
                return Err(crate::Error::Invalid(format!(
                    "selector on {i_set:?} must be sorted, unique, in range"
                )));
            }
        }
        let out = StalkSelector { sets };
        // compatibility: projections carry selected points to selected points
        for ((i_set, bigger), map) in &m.proj {
            let target = &out.sets[bigger];
            for &x in &out.sets[i_set] {
                if !target.contains(&map[x]) {
                    return Err(crate::Error::Invalid(format!(
                        "selector incompatible with projection {i_set:?} -> {bigger:?} at point {x}"
                    )));
                }
            }
        }
        Ok(out)
    }

    pub fn points(&self, i_set: &RootSubset) -> &[usize] {
        &self.sets[i_set]
    }
}

/// dim_{F_p} LC(X_I(x), F_p^coeff) = |X_I(x)| * coeff_dim.
pub fn stalk_dimension(sel: &StalkSelector, i_set: &RootSubset, coeff_dim: usize) -> usize {
    sel.points(i_set).len() * coeff_dim
}

/// A cochain complex of F_p vector spaces, differentials as dense
/// matrices acting term_k -> term_{k+1}.
pub struct ChainComplex {
    pub p: u64,
    pub dims: Vec<usize>,
    /// diffs[k]: rows = dims[k+1], cols = dims[k].
    pub diffs: Vec<Vec<Vec<u64>>>,
}

/// Assemble 0 -> F -> (+)_{|D\I|=1} F_I -> ... -> F_empty -> 0 on the
/// selected points, with differential component F_{I'} -> F_I given by
/// (-1)^i times pullback along p_{I,I'}, i the position of the dropped
/// root within I'. Tensored with a coefficient space F_p^coeff_dim.
pub fn assemble_fundamental_complex(
    m: &FiniteFlagModel,
    sel: &StalkSelector,
    coeff_dim: usize,
) -> crate::Result<ChainComplex> {
    if coeff_dim == 0 {
        return Err(crate::Error::Invalid("coefficient dimension must be positive".into()));
    }
    let p = m.char_p();
    let delta = m.delta();
    let nd = delta.len();
    // levels[k]: strata with |Delta \ I| = k, each with its basis offset
    let mut levels: Vec<Vec<(RootSubset, usize)>> = vec![Vec::new(); nd + 1];
    let mut dims = vec![0usize; nd + 1];
    for i_set in m.subsets() {
        let k = nd - i_set.len();
        let offset = dims[k];
        dims[k] += sel.points(&i_set).len() * coeff_dim;
        levels[k].push((i_set, offset));
    }
    let mut diffs = Vec::new();
    for k in 0..nd {
        let mut d = vec![vec![0u64; dims[k]]; dims[k + 1]];
        for (i_big, off_big) in &levels[k] {
            for (pos, &a) in i_big.iter().enumerate() {
                // drop the root at 1-based position pos+1
                let mut i_small = i_big.clone();
                i_small.remove(&a);
                let (_, off_small) = levels[k + 1]
                    .iter()
                    .find(|(s, _)| s == &i_small)
                    .expect("stratum present");
                let sign = if pos % 2 == 0 { 1u64 } else { p - 1 };
                let map = &m.proj[&(i_small.clone(), i_big.clone())];
                for (yi, &y) in sel.points(&i_small).iter().enumerate() {
                    let z = map[y];
                    let zi = sel
                        .points(i_big)
                        .iter()
                        .position(|&w| w == z)
                        .expect("selector compatibility");
                    for c in 0..coeff_dim {
                        d[off_small + yi * coeff_dim + c][off_big + zi * coeff_dim + c] = sign;
                    }
                }
            }
        }
        diffs.push(d);
    }
    let complex = ChainComplex { p, dims, diffs };
    // D^2 = 0 validates the sign convention
    for k in 0..complex.diffs.len().saturating_sub(1) {
        let (d0, d1) = (&complex.diffs[k], &complex.diffs[k + 1]);
        for row in d1 {
            for j in 0..complex.dims[k] {
                let s: u64 = row.iter().zip(d0).map(|(&a, r)| a * r[j]).sum();
                assert_eq!(s % p, 0, "differential does not square to zero");
            }
        }
    }
    Ok(complex)
}

/// dim ker(D_k) / im(D_{k-1}) per degree, by exact rank over F_p.
pub fn homology_dims(c: &ChainComplex) -> crate::Result<Vec<usize>> {
    let mut ranks = vec![0usize; c.dims.len() + 1];
    for (k, d) in c.diffs.iter().enumerate() {
        ranks[k + 1] = fp_rank(c.p, d, c.dims[k])?;
    }
    Ok((0..c.dims.len())
        .map(|k| c.dims[k] - ranks[k + 1] - ranks[k])
        .collect())
}

/// Extend a disjoint cover of F to a disjoint cover of X, absorbing the
/// complement of F into the first part (or a single new part if none).
pub fn extend_disjoint_cover(
    x: &BTreeSet<usize>,
    f: &BTreeSet<usize>,
    cover: &[BTreeSet<usize>],
) -> crate::Result<Vec<BTreeSet<usize>>> {
    if !f.is_subset(x) {
        return Err(crate::Error::Invalid("F must be a subset of X".into()));
    }
    let mut union = BTreeSet::new();
    for part in cover {
        if part.is_empty() {
            return Err(crate::Error::Invalid("cover parts must be nonempty".into()));
        }
        if !union.is_disjoint(part) {
            return Err(crate::Error::Invalid("cover parts must be pairwise disjoint".into()));
        }
        union.extend(part.iter().copied());
    }
    if union != *f {
        return Err(crate::Error::Invalid("cover must partition F exactly".into()));
    }
    let rest: BTreeSet<usize> = x.difference(f).copied().collect();
    let mut out: Vec<BTreeSet<usize>> = cover.to_vec();
    if rest.is_empty() {
        if out.is_empty() {
            return Err(crate::Error::Invalid("empty cover of empty F only extends a nonempty X".into()));
        }
        return Ok(out);
    }
    if let Some(first) = out.first_mut() {
        first.extend(rest);
    } else {
        out.push(rest);
    }
    Ok(out)
}

/// E_1^{p,0} = sum over |Delta \ I| = p + 1 of |X_I(x)|; the q = 0 row is
/// the only populated one on a finite model.
pub fn e1_page(m: &FiniteFlagModel, sel: &StalkSelector) -> Vec<usize> {
    let nd = m.delta().len();
    (0..nd)
        .map(|pdeg| {
            m.subsets()
                .iter()
                .filter(|i| nd - i.len() == pdeg + 1)
                .map(|i| sel.points(i).len())
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn model_counts() {
        let m = build_finite_flag_model(2, 3).unwrap();
        assert_eq!(m.size(&set(&[])), 4); // P^1(F_3)
        assert_eq!(m.size(&set(&[1])), 1);
        let m = build_finite_flag_model(3, 2).unwrap();
        assert_eq!(m.size(&set(&[])), 21);
        assert_eq!(m.size(&set(&[1])), 7);
        assert_eq!(m.size(&set(&[2])), 7);
        let m = build_finite_flag_model(2, 2).unwrap();
        assert_eq!(m.size(&set(&[])), 3);
        assert!(matches!(build_finite_flag_model(5, 2), Err(crate::Error::Capacity(_))));
    }

    #[test]
    fn full_complex_small() {
        let m = build_finite_flag_model(2, 3).unwrap();
        let sel = StalkSelector::full(&m);
        let c = assemble_fundamental_complex(&m, &sel, 1).unwrap();
        assert_eq!(c.dims, vec![1, 4]);
        assert_eq!(homology_dims(&c).unwrap(), vec![0, 3]);
    }

    #[test]
    fn full_complex_n3_q2() {
        let m = build_finite_flag_model(3, 2).unwrap();
        let sel = StalkSelector::full(&m);
        let c = assemble_fundamental_complex(&m, &sel, 1).unwrap();
        assert_eq!(c.dims, vec![1, 14, 21]);
        assert_eq!(homology_dims(&c).unwrap(), vec![0, 0, 8]);
    }

    #[test]
    fn singleton_complex_is_exact_simplex() {
        for (n, q) in [(2usize, 3usize), (3, 2), (4, 2)] {
            let m = build_finite_flag_model(n, q).unwrap();
            let sel = StalkSelector::singleton(&m);
            let c = assemble_fundamental_complex(&m, &sel, 1).unwrap();
            let nd = n - 1;
            let expected: Vec<usize> = (0..=nd).map(|k| num::integer::binomial(nd, k)).collect();
            assert_eq!(c.dims, expected);
            assert!(homology_dims(&c).unwrap().iter().all(|&h| h == 0));
        }
    }

    #[test]
    fn coefficient_dimension_scales() {
        let m = build_finite_flag_model(2, 3).unwrap();
        let sel = StalkSelector::full(&m);
        let c = assemble_fundamental_complex(&m, &sel, 2).unwrap();
        assert_eq!(c.dims, vec![2, 8]);
        assert_eq!(homology_dims(&c).unwrap(), vec![0, 6]);
    }

    #[test]
    fn euler_characteristic_matches_homology() {
        let m = build_finite_flag_model(3, 2).unwrap();
        let sel = StalkSelector::full(&m);
        let c = assemble_fundamental_complex(&m, &sel, 1).unwrap();
        let h = homology_dims(&c).unwrap();
        let chi = |v: &[usize]| {
            v.iter()
                .enumerate()
                .map(|(k, &d)| if k % 2 == 0 { d as i64 } else { -(d as i64) })
                .sum::<i64>()
        };
        assert_eq!(chi(&c.dims), chi(&h));
    }

    #[test]
    fn stalk_dimensions() {
        let m = build_finite_flag_model(2, 3).unwrap();
        let full = StalkSelector::full(&m);
        assert_eq!(stalk_dimension(&full, &set(&[]), 1), 4);
        let single = StalkSelector::singleton(&m);
        assert_eq!(stalk_dimension(&single, &set(&[]), 1), 1);
        // a two-point subset of X_empty with the full X_Delta
        let mut sets = BTreeMap::new();
        sets.insert(set(&[]), vec![0, 2]);
        sets.insert(set(&[1]), vec![0]);
        let half = StalkSelector::custom(&m, sets).unwrap();
        assert_eq!(stalk_dimension(&half, &set(&[]), 1), 2);
    }

    #[test]
    fn incompatible_selector_rejected() {
        let m = build_finite_flag_model(3, 2).unwrap();
        // select a point of X_empty whose image is outside the selection
        let mut sets: BTreeMap<RootSubset, Vec<usize>> = BTreeMap::new();
        for i_set in m.subsets() {
            sets.insert(i_set, vec![0]);
        }
        sets.insert(set(&[]), vec![0, 20]);
        let err = StalkSelector::custom(&m, sets);
        assert!(err.is_err());
    }

    #[test]
    fn e1_page_examples() {
        let m = build_finite_flag_model(2, 3).unwrap();
        assert_eq!(e1_page(&m, &StalkSelector::full(&m)), vec![4]);
        let m = build_finite_flag_model(3, 2).unwrap();
        let page = e1_page(&m, &StalkSelector::full(&m));
        assert_eq!(page, vec![14, 21]);
        // alternating sum = 1 - last homology for the full building
        assert_eq!(14 - 21, 1 - 8);
        let single = e1_page(&m, &StalkSelector::singleton(&m));
        assert_eq!(single, vec![2, 1]);
    }

    #[test]
    fn disjoint_cover_extension() {
        let x = set(&[1, 2, 3, 4]);
        let f = set(&[1, 2]);
        let cover = vec![set(&[1]), set(&[2])];
        let ext = extend_disjoint_cover(&x, &f, &cover).unwrap();
        // partition of X restricting to the input cover on F
        let mut union = BTreeSet::new();
        for part in &ext {
            assert!(union.is_disjoint(part));
            union.extend(part.iter().copied());
        }
        assert_eq!(union, x);
        let restricted: Vec<BTreeSet<usize>> = ext
            .iter()
            .map(|s| s.intersection(&f).copied().collect())
            .filter(|s: &BTreeSet<usize>| !s.is_empty())
            .collect();
        assert_eq!(restricted, cover);
        // F = X returns the cover unchanged
        assert_eq!(extend_disjoint_cover(&f, &f, &cover).unwrap(), cover);
        // degenerate empty F: everything absorbed into one part
        assert_eq!(extend_disjoint_cover(&x, &set(&[]), &[]).unwrap(), vec![x.clone()]);
        // overlapping cover rejected
        assert!(extend_disjoint_cover(&x, &f, &[set(&[1, 2]), set(&[2])]).is_err());
    }
}
