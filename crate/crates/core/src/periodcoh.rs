//! Cohomology bookkeeping for basic period domains of GL_n: flag variety
//! dimension, I-sets of Kostant representatives, generalized Steinberg
//! dimensions over finite fields, the summand table, degree-rule
//! calibration against the Drinfeld case, and the duality report.

use crate::exactnum::{fp_rank, parse_rational, rational_string, Q};
use crate::fundcomplex::{build_finite_flag_model, FiniteFlagModel, RootSubset};
use crate::rootdata::{
    galois_orbits, is_basic, is_decent, is_dominant, kostant_representatives, pairing,
    Cocharacter, GaloisAction, RootDatum, WeylElement,
};
use num::BigInt;
use num_traits::Zero;
use once_cell::sync::Lazy;
use serde_json::json;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// A basic local Shtuka datum (G, [b], {mu}) for G = GL_n, with the slope
/// cocharacter standing in for [b] and an explicit Galois action on the
/// Kostant representatives.
#[derive(Clone, Debug)]
pub struct PeriodDatum {
    pub rd: RootDatum,
    pub mu: Cocharacter,
    pub nu_b: Cocharacter,
    pub s: i64,
    pub galois: GaloisAction,
}

impl PeriodDatum {
    pub fn new(
        rd: RootDatum,
        mu: Cocharacter,
        nu_b: Cocharacter,
        s: i64,
        galois: Option<GaloisAction>,
    ) -> crate::Result<Self> {
        let n = rd.n();
        if mu.len() != n || nu_b.len() != n {
            return Err(crate::Error::Invalid("cocharacter of wrong rank".into()));
        }
        if !is_dominant(&mu) {
            return Err(crate::Error::Invalid("mu must be dominant".into()));
        }
        if !is_basic(&nu_b) {
            return Err(crate::Error::Invalid("nu_b must be basic (central)".into()));
        }
        if !is_decent(&nu_b, s)? {
            return Err(crate::Error::Invalid(format!(
                "nu_b is not {s}-decent: s * nu_b is not integral"
            )));
        }
        let reps = kostant_representatives(&rd, &mu)?;
        let galois = galois.unwrap_or_else(|| GaloisAction::trivial(reps.len()));
        if galois.len() != reps.len() {
            return Err(crate::Error::Invalid(format!(
                "Galois action on {} indices, but W^mu has {} elements",
                galois.len(),
                reps.len()
            )));
        }
        Ok(PeriodDatum { rd, mu, nu_b, s, galois })
    }

    /// The standard Drinfeld datum for GL_n: mu = (n-1, -1, ..., -1),
    /// nu_b = 0, s = 1, trivial Galois action.
    pub fn drinfeld(n: usize) -> crate::Result<Self> {
        if n < 2 {
            return Err(crate::Error::Invalid("Drinfeld datum needs n >= 2".into()));
        }
        let mut mu = vec![-Q::from(BigInt::from(1)); n];
        mu[0] = Q::from(BigInt::from(n as i64 - 1));
        PeriodDatum::new(RootDatum::new(n)?, mu, vec![Q::zero(); n], 1, None)
    }

    /// JSON schema: { "n", "mu": ["a/b"], "nu_b": ["a/b"], "s", "galois"? }.
    pub fn from_json(v: &serde_json::Value) -> crate::Result<Self> {
        let n = v["n"]
            .as_u64()
            .ok_or_else(|| crate::Error::Parse("missing field n".into()))? as usize;
        let vec_field = |name: &str| -> crate::Result<Cocharacter> {
            v[name]
                .as_array()
                .ok_or_else(|| crate::Error::Parse(format!("missing field {name}")))?
                .iter()
                .map(|x| {
                    x.as_str()
                        .ok_or_else(|| crate::Error::Parse(format!("{name} entries must be strings")))
                        .and_then(parse_rational)
                })
                .collect()
        };
        let s = v["s"]
            .as_i64()
            .ok_or_else(|| crate::Error::Parse("missing field s".into()))?;
        let galois = match &v["galois"] {
            serde_json::Value::Null => None,
            serde_json::Value::Array(arr) => {
                let perm = arr
                    .iter()
                    .map(|x| {
                        x.as_u64()
                            .map(|u| u as usize)
                            .ok_or_else(|| crate::Error::Parse("galois entries must be indices".into()))
                    })
                    .collect::<crate::Result<Vec<_>>>()?;
                Some(GaloisAction::new(perm)?)
            }
            _ => return Err(crate::Error::Parse("galois must be an index list".into())),
        };
        PeriodDatum::new(RootDatum::new(n)?, vec_field("mu")?, vec_field("nu_b")?, s, galois)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "n": self.rd.n(),
            "mu": self.mu.iter().map(rational_string).collect::<Vec<_>>(),
            "nu_b": self.nu_b.iter().map(rational_string).collect::<Vec<_>>(),
            "s": self.s,
            "galois": (0..self.galois.len()).map(|i| self.galois.image(i)).collect::<Vec<_>>(),
        })
    }
}

/// d = dim G/P_mu = number of positive roots not orthogonal to mu.
pub fn flag_dimension(rd: &RootDatum, mu: &[Q]) -> crate::Result<usize> {
    if !is_dominant(mu) {
        return Err(crate::Error::Invalid("mu must be dominant".into()));
    }
    Ok(rd
        .positive_roots()
        .iter()
        .filter(|alpha| !pairing(alpha, mu).is_zero())
        .count())
}

/// Reports both candidate dimension values: dim G/P_mu together with the
/// alternative pairing (2 rho, nu_b), which disagrees with the Drinfeld
/// dimension (it vanishes for nu_b = 0) and is surfaced for inspection.
pub fn flag_dimension_diagnostic(rd: &RootDatum, mu: &[Q], nu_b: &[Q]) -> crate::Result<(usize, Q)> {
    let d = flag_dimension(rd, mu)?;
    let mut two_rho = vec![Q::zero(); rd.n()];
    for alpha in rd.positive_roots() {
        for (t, a) in two_rho.iter_mut().zip(&alpha) {
            *t += a.clone();
        }
    }
    Ok((d, pairing(&two_rho, nu_b)))
}

/// I_w = { alpha in Delta : (w mu - nu_b, omega_alpha) <= 0 }, 1-based.
pub fn i_set(w: &WeylElement, mu: &[Q], nu_b: &[Q], rd: &RootDatum) -> RootSubset {
    let wmu = w.apply(mu);
    let diff: Vec<Q> = wmu.iter().zip(nu_b).map(|(a, b)| a.clone() - b.clone()).collect();
    rd.fundamental_coweights()
        .iter()
        .enumerate()
        .filter(|(_, omega)| pairing(&diff, omega) <= Q::zero())
        .map(|(i, _)| i + 1)
        .collect()
}

/// The Dynkin diagram of J_b is identified with that of G through -w_0,
/// which reverses the index order alpha_i -> alpha_{n-i}.
fn reverse_i_set(i_set: &RootSubset, n: usize) -> RootSubset {
    i_set.iter().map(|&i| n - i).collect()
}

static MODEL_CACHE: Lazy<Mutex<HashMap<(usize, usize), Arc<FiniteFlagModel>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn flag_model(n: usize, q: usize) -> crate::Result<Arc<FiniteFlagModel>> {
    if let Some(m) = MODEL_CACHE.lock().unwrap().get(&(n, q)) {
        return Ok(m.clone());
    }
    let m = Arc::new(build_finite_flag_model(n, q)?);
    MODEL_CACHE.lock().unwrap().insert((n, q), m.clone());
    Ok(m)
}

/// dim over F_p of v_{P_I} = LC(X_I) / sum over I' strictly containing I
/// of the pullbacks LC(X_{I'}): |X_I| minus the exact F_p-rank of the
/// stacked pullback indicator matrices.
pub fn steinberg_dimension(n: usize, q: usize, i_set: &RootSubset) -> crate::Result<usize> {
    if n > 4 {
        return Err(crate::Error::Capacity(format!(
            "Steinberg dimension limited to n <= 4, got {n}"
        )));
    }
    let m = flag_model(n, q)?;
    if !i_set.iter().all(|&a| a >= 1 && a < n) {
        return Err(crate::Error::Invalid("I contains an index outside Delta".into()));
    }
    let size = m.size(i_set);
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for bigger in m.subsets() {
        if !(i_set.is_subset(&bigger) && bigger.len() > i_set.len()) {
            continue;
        }
        for z in 0..m.size(&bigger) {
            let mut row = vec![0u64; size];
            for (y, slot) in row.iter_mut().enumerate() {
                if m.project_point(i_set, &bigger, y) == z {
                    *slot = 1;
                }
            }
            rows.push(row);
        }
    }
    let rank = if rows.is_empty() { 0 } else { fp_rank(m.char_p(), &rows, size)? };
    Ok(size - rank)
}

/// Affine rule for the shift integer n_[w] = a*l + b*d + c.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeFunction {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl DegreeFunction {
    pub fn n_of(&self, l: usize, d: usize) -> i64 {
        self.a * l as i64 + self.b * d as i64 + self.c
    }

    pub fn tag(&self) -> String {
        format!("n = {}*l + {}*d + {}", self.a, self.b, self.c)
    }
}

/// One summand of the cohomology decomposition, per Galois orbit [w].
#[derive(Clone, Debug, PartialEq)]
pub struct CohomologySummand {
    pub orbit_id: usize,
    pub i_set: RootSubset,
    pub l_orbit: usize,
    pub orbit_size: usize,
    pub degree: usize,
    /// Twist on rho_[w]: -l_orbit.
    pub rho_twist: i64,
    /// Overall Tate twist: d.
    pub overall_twist: usize,
    pub description: String,
}

#[derive(Clone, Debug)]
pub struct CohomologyTable {
    pub n: usize,
    pub d: usize,
    pub summands: Vec<CohomologySummand>,
    /// Side conditions assumed, not checked.
    pub caveats: Vec<&'static str>,
}

fn i_set_display(i: &RootSubset) -> String {
    let inner: Vec<String> = i.iter().map(|a| format!("a{a}")).collect();
    format!("{{{}}}", inner.join(","))
}

/// One summand v*_{P_I} (x) rho*_{[w]} in degree 2d - n_[w] per Galois
/// orbit of Kostant representatives, sorted by degree.
pub fn cohomology_table(pd: &PeriodDatum, degf: &DegreeFunction) -> crate::Result<CohomologyTable> {
    let n = pd.rd.n();
    let reps = kostant_representatives(&pd.rd, &pd.mu)?;
    let orbits = galois_orbits(&reps, &pd.galois)?;
    let d = flag_dimension(&pd.rd, &pd.mu)?;
    let mut summands = Vec::new();
    for (orbit_id, orbit) in orbits.iter().enumerate() {
        let n_w = degf.n_of(orbit.l_orbit, d);
        let degree = 2 * d as i64 - n_w;
        if degree < 0 || degree > 2 * d as i64 {
            return Err(crate::Error::Invalid(format!(
                "degree rule puts orbit {orbit_id} (l = {}) in degree {degree}, outside [0, {}]",
                orbit.l_orbit,
                2 * d
            )));
        }
        let i = reverse_i_set(&i_set(&orbit.members[0], &pd.mu, &pd.nu_b, &pd.rd), n);
        let description = format!(
            "v*_{{P_{}}} (x) rho*_{{[{}]}}",
            i_set_display(&i),
            orbit.members[0].one_line()
        );
        summands.push(CohomologySummand {
            orbit_id,
            i_set: i,
            l_orbit: orbit.l_orbit,
            orbit_size: orbit.size,
            degree: degree as usize,
            rho_twist: -(orbit.l_orbit as i64),
            overall_twist: d,
            description,
        });
    }
    summands.sort_by_key(|s| (s.degree, s.orbit_id));
    Ok(CohomologyTable {
        n,
        d,
        summands,
        caveats: vec!["p >= 5 assumed", "nonemptiness of strata not checked"],
    })
}

/// Index set of the generalized Steinberg module St_k in GL_n:
/// {alpha_j : j > k}.
pub fn steinberg_index(n: usize, k: usize) -> RootSubset {
    (1..n).filter(|&j| j > k).collect()
}

/// Search affine rules with coefficients in [-3, 3] that make the table
/// on every Drinfeld datum GL_2..GL_{n_max} put the length-l orbit in
/// degree d - l with the I-set of St_{d-l}; exactly one must survive.
pub fn calibrate_degree_function(n_max: usize) -> crate::Result<DegreeFunction> {
    if !(2..=4).contains(&n_max) {
        return Err(crate::Error::Invalid("calibration supports n_max in {2, 3, 4}".into()));
    }
    // constraint set: (l, d, required n_[w]) with required degree d - l
    let mut constraints = Vec::new();
    for n in 2..=n_max {
        let pd = PeriodDatum::drinfeld(n)?;
        let d = flag_dimension(&pd.rd, &pd.mu)?;
        let reps = kostant_representatives(&pd.rd, &pd.mu)?;
        for w in &reps {
            let k = d - w.length; // target degree
            let i = reverse_i_set(&i_set(w, &pd.mu, &pd.nu_b, &pd.rd), n);
            if i != steinberg_index(n, k) {
                return Err(crate::Error::Calibration(format!(
                    "I-set of length-{} representative in GL_{n} is {}, but St_{k} has {}",
                    w.length,
                    i_set_display(&i),
                    i_set_display(&steinberg_index(n, k))
                )));
            }
            constraints.push((w.length as i64, d as i64, 2 * d as i64 - k as i64));
        }
    }
    let mut candidates = Vec::new();
    for a in -3..=3i64 {
        for b in -3..=3i64 {
            for c in -3..=3i64 {
                if constraints.iter().all(|&(l, d, target)| a * l + b * d + c == target) {
                    candidates.push(DegreeFunction { a, b, c });
                }
            }
        }
    }
    match candidates.len() {
        1 => Ok(candidates[0]),
        0 => Err(crate::Error::Calibration(
            "no affine rule with coefficients in [-3,3] fits the Drinfeld constraints".into(),
        )),
        _ => Err(crate::Error::Calibration(format!(
            "under-determined: {} rules fit ({})",
            candidates.len(),
            candidates.iter().map(|r| r.tag()).collect::<Vec<_>>().join("; ")
        ))),
    }
}

/// One slot of the duality report: degree k paired with 2d - k.
#[derive(Clone, Debug)]
pub struct DualityPair {
    pub degree: usize,
    pub dual_degree: usize,
    pub count: usize,
    /// Summands the table itself has in the dual degree.
    pub dual_count: usize,
    /// The dual slot is above d and belongs to compact support.
    pub from_compact_support: bool,
    pub i_set: RootSubset,
    pub steinberg_dim: Option<usize>,
    pub dual_steinberg_dim: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct DualityReport {
    pub d: usize,
    pub pairs: Vec<DualityPair>,
    /// Occupied degrees map onto {2d - k} with matching counts where both
    /// slots are occupied; mismatches are listed, not thrown.
    pub involution_consistent: bool,
    pub mismatches: Vec<String>,
    /// Only in finite-field surrogate mode: sum (-1)^k dim v_{P_I}.
    pub euler_characteristic: Option<i64>,
}

/// Pair each summand in degree k with the slot 2d - k; with a surrogate q,
/// also list Steinberg dimensions side by side and the Euler characteristic.
pub fn duality_report(
    table: &CohomologyTable,
    q: Option<usize>,
) -> crate::Result<DualityReport> {
    let d = table.d;
    let occupied = |k: usize| table.summands.iter().filter(|s| s.degree == k).count();
    let mut pairs = Vec::new();
    let mut mismatches = Vec::new();
    let mut euler: Option<i64> = q.map(|_| 0);
    for s in &table.summands {
        let dual_degree = 2 * d - s.degree;
        let dual = table.summands.iter().find(|t| t.degree == dual_degree);
        let (sdim, ddim) = match q {
            Some(q) => {
                let sd = steinberg_dimension(table.n, q, &s.i_set)?;
                let dd = match dual {
                    Some(t) => Some(steinberg_dimension(table.n, q, &t.i_set)?),
                    None => None,
                };
                if let Some(e) = euler.as_mut() {
                    let sign = if s.degree % 2 == 0 { 1 } else { -1 };
                    *e += sign * sd as i64;
                }
                (Some(sd), dd)
            }
            None => (None, None),
        };
        pairs.push(DualityPair {
            degree: s.degree,
            dual_degree,
            count: occupied(s.degree),
            dual_count: occupied(dual_degree),
            from_compact_support: dual_degree > d || dual.is_none(),
            i_set: s.i_set.clone(),
            steinberg_dim: sdim,
            dual_steinberg_dim: ddim,
        });
    }
    // cardinality profile under the involution
    for p in &pairs {
        if p.dual_count > 0 && p.dual_count != p.count {
            mismatches.push(format!(
                "degree {} holds {} summands but dual degree {} holds {}",
                p.degree, p.count, p.dual_degree, p.dual_count
            ));
        }
    }
    Ok(DualityReport {
        d,
        involution_consistent: mismatches.is_empty(),
        pairs,
        mismatches,
        euler_characteristic: euler,
    })
}
