//! Newton and Hodge polygons: lower convex piecewise-linear functions
//! anchored at (0,0), with exact rational vertices.

use crate::exactnum::{is_prime, padic_valuation, Matrix, Q};
use num::BigInt;
use num_traits::{One, Zero};
use serde_json::json;

/// A lower convex polygon given by its vertices.
///
/// Invariants: first vertex (0,0), x strictly increasing, slopes weakly
/// increasing left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polygon {
    vertices: Vec<(Q, Q)>,
}

impl Polygon {
    pub fn new(vertices: Vec<(Q, Q)>) -> crate::Result<Self> {
        if vertices.is_empty() {
            return Err(crate::Error::Invalid("polygon needs at least one vertex".into()));
        }
        if vertices[0] != (Q::zero(), Q::zero()) {
            return Err(crate::Error::Invalid("polygon must start at (0,0)".into()));
        }
        let mut prev_slope: Option<Q> = None;
        for w in vertices.windows(2) {
            let (x0, y0) = &w[0];
            let (x1, y1) = &w[1];
            if x1 <= x0 {
                return Err(crate::Error::Invalid("polygon x not strictly increasing".into()));
            }
            let slope = (y1 - y0) / (x1 - x0);
            if let Some(p) = &prev_slope {
                if &slope < p {
                    return Err(crate::Error::Invalid("polygon not convex".into()));
                }
            }
            prev_slope = Some(slope);
        }
        Ok(Polygon { vertices })
    }

    pub fn vertices(&self) -> &[(Q, Q)] {
        &self.vertices
    }

    pub fn terminal(&self) -> &(Q, Q) {
        self.vertices.last().unwrap()
    }

    /// The multiset of slopes, one entry per unit of width.
    /// Only defined when all segment widths are integers.
    pub fn slope_multiset(&self) -> Vec<Q> {
        let mut slopes = Vec::new();
        for w in self.vertices.windows(2) {
            let (x0, y0) = &w[0];
            let (x1, y1) = &w[1];
            let width = x1 - x0;
            let slope = (y1 - y0) / &width;
            assert!(width.is_integer(), "non-integral polygon width");
            let mut k = width.to_integer();
            while k > BigInt::zero() {
                slopes.push(slope.clone());
                k -= 1;
            }
        }
        slopes
    }

    /// Interpolated y-value at x; x must lie in [0, terminal x].
    pub fn value_at(&self, x: &Q) -> Q {
        assert!(x >= &Q::zero() && x <= &self.terminal().0, "x out of range");
        for w in self.vertices.windows(2) {
            let (x0, y0) = &w[0];
            let (x1, y1) = &w[1];
            if x >= x0 && x <= x1 {
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        self.terminal().1.clone()
    }

    /// JSON serialization: array of [x_num, x_den, y_num, y_den] quadruples.
    pub fn to_json(&self) -> serde_json::Value {
        json!(self
            .vertices
            .iter()
            .map(|(x, y)| {
                json!([
                    x.numer().to_string(),
                    x.denom().to_string(),
                    y.numer().to_string(),
                    y.denom().to_string()
                ])
            })
            .collect::<Vec<_>>())
    }

    pub fn from_json(v: &serde_json::Value) -> crate::Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| crate::Error::Parse("polygon JSON must be an array".into()))?;
        let mut vertices = Vec::new();
        for q in arr {
            let quad = q
                .as_array()
                .filter(|a| a.len() == 4)
                .ok_or_else(|| crate::Error::Parse("polygon vertex must be a quadruple".into()))?;
            let part = |i: usize| -> crate::Result<BigInt> {
                let s = quad[i]
                    .as_str()
                    .map(|s| s.to_string())
                    .or_else(|| quad[i].as_i64().map(|n| n.to_string()))
                    .ok_or_else(|| crate::Error::Parse("bad vertex component".into()))?;
                s.parse()
                    .map_err(|_| crate::Error::Parse("bad vertex integer".into()))
            };
            vertices.push((Q::new(part(0)?, part(1)?), Q::new(part(2)?, part(3)?)));
        }
        Polygon::new(vertices)
    }
}

/// Polygon with vertex k = (k, sum of the first k sorted slopes).
pub fn polygon_from_slopes(slopes: &[Q]) -> crate::Result<Polygon> {
    if slopes.is_empty() {
        return Err(crate::Error::Invalid("empty slope multiset".into()));
    }
    let mut sorted = slopes.to_vec();
    sorted.sort();
    let mut vertices = vec![(Q::zero(), Q::zero())];
    let mut acc = Q::zero();
    for (k, s) in sorted.iter().enumerate() {
        acc += s;
        vertices.push((Q::from(BigInt::from(k as i64 + 1)), acc.clone()));
    }
    Polygon::new(vertices)
}

/// Hodge polygon of a filtration type (distinct jumps with multiplicities).
pub fn hodge_polygon(filtration_type: &[(Q, usize)]) -> crate::Result<Polygon> {
    let mut seen = Vec::new();
    let mut slopes = Vec::new();
    for (jump, mult) in filtration_type {
        if seen.contains(jump) {
            return Err(crate::Error::Invalid(format!(
                "repeated jump value {}",
                crate::exactnum::rational_string(jump)
            )));
        }
        if *mult == 0 {
            return Err(crate::Error::Invalid("zero multiplicity in filtration type".into()));
        }
        seen.push(jump.clone());
        for _ in 0..*mult {
            slopes.push(jump.clone());
        }
    }
    polygon_from_slopes(&slopes)
}

/// Newton polygon of the isocrystal (Q_p^n, b sigma) for b in GL_n(Q):
/// the lower convex hull of (i, v_p(c_{n-i})) over the characteristic
/// polynomial sum c_j X^j of b, re-anchored at (0,0).
pub fn newton_polygon_from_charpoly(b: &Matrix<Q>, p: u64) -> crate::Result<Polygon> {
    if !is_prime(p) {
        return Err(crate::Error::Invalid(format!("{p} is not prime")));
    }
    if b.rows() != b.cols() {
        return Err(crate::Error::Invalid("matrix must be square".into()));
    }
    let n = b.rows();
    let coeffs = charpoly(b); // coeffs[j] = c_j, c_n = 1
    if coeffs[0].is_zero() {
        return Err(crate::Error::Invalid("singular matrix has no Newton polygon".into()));
    }
    // points (i, v_p(c_{n-i})) for nonzero coefficients
    let mut points = Vec::new();
    for i in 0..=n {
        let c = &coeffs[n - i];
        if !c.is_zero() {
            points.push((
                Q::from(BigInt::from(i as i64)),
                Q::from(BigInt::from(padic_valuation(c, p))),
            ));
        }
    }
    let hull = lower_convex_hull(&points);
    // re-express as a slope multiset so intermediate vertices reappear
    let mut slopes = Vec::new();
    for w in hull.windows(2) {
        let (x0, y0) = &w[0];
        let (x1, y1) = &w[1];
        let width = (x1 - x0).to_integer();
        let slope = (y1 - y0) / (x1 - x0);
        let mut k = BigInt::zero();
        while k < width {
            slopes.push(slope.clone());
            k += 1;
        }
    }
    polygon_from_slopes(&slopes)
}

/// Exact characteristic polynomial coefficients c_0..c_n of an n x n
/// rational matrix, via the Faddeev-LeVerrier recursion.
fn charpoly(a: &Matrix<Q>) -> Vec<Q> {
    let n = a.rows();
    let mut coeffs = vec![Q::zero(); n + 1];
    coeffs[n] = Q::one();
    let mut m = Matrix::<Q>::identity(n);
    for k in 1..=n {
        let am = a.mul(&m);
        let trace: Q = (0..n).map(|i| am[(i, i)].clone()).fold(Q::zero(), |x, y| x + y);
        let c = -trace / Q::from(BigInt::from(k as i64));
        coeffs[n - k] = c.clone();
        m = am;
        for i in 0..n {
            m[(i, i)] = m[(i, i)].clone() + c.clone();
        }
    }
    coeffs
}

fn lower_convex_hull(points: &[(Q, Q)]) -> Vec<(Q, Q)> {
    // points sorted by strictly increasing x
    let mut hull: Vec<(Q, Q)> = Vec::new();
    for p in points {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            // drop b if it lies on or above segment a-p
            let cross = (&b.0 - &a.0) * (&p.1 - &a.1) - (&b.1 - &a.1) * (&p.0 - &a.0);
            if cross <= Q::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p.clone());
    }
    hull
}

/// Pointwise comparison of two polygons of equal terminal x.
///
/// `lies_on_or_above` holds when P's interpolation is >= Q's at every
/// vertex x of either polygon; `endpoints_equal` compares terminal vertices.
pub fn polygon_compare(p: &Polygon, q: &Polygon) -> crate::Result<(bool, bool)> {
    if p.terminal().0 != q.terminal().0 {
        return Err(crate::Error::Invalid("polygon rank mismatch".into()));
    }
    let mut xs: Vec<Q> = p
        .vertices()
        .iter()
        .chain(q.vertices().iter())
        .map(|(x, _)| x.clone())
        .collect();
    xs.sort();
    xs.dedup();
    let lies_on_or_above = xs.iter().all(|x| p.value_at(x) >= q.value_at(x));
    let endpoints_equal = p.terminal() == q.terminal();
    Ok((lies_on_or_above, endpoints_equal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Q {
        Q::from(BigInt::from(n))
    }

    fn qr(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn from_slopes_examples() {
        let p = polygon_from_slopes(&[q(0), q(0)]).unwrap();
        assert_eq!(p.vertices(), &[(q(0), q(0)), (q(1), q(0)), (q(2), q(0))]);
        let p = polygon_from_slopes(&[qr(1, 2), qr(1, 2)]).unwrap();
        assert_eq!(p.vertices(), &[(q(0), q(0)), (q(1), qr(1, 2)), (q(2), q(1))]);
        let p = polygon_from_slopes(&[q(1), q(-1), q(-1)]).unwrap();
        assert_eq!(
            p.vertices(),
            &[(q(0), q(0)), (q(1), q(-1)), (q(2), q(-2)), (q(3), q(-1))]
        );
        assert!(polygon_from_slopes(&[]).is_err());
    }

    #[test]
    fn hodge_examples() {
        let p = hodge_polygon(&[(q(1), 1), (q(-1), 1)]).unwrap();
        assert_eq!(p.vertices(), &[(q(0), q(0)), (q(1), q(-1)), (q(2), q(0))]);
        let p = hodge_polygon(&[(q(0), 4)]).unwrap();
        assert_eq!(p.terminal(), &(q(4), q(0)));
        let p = hodge_polygon(&[(q(2), 1), (q(-1), 2)]).unwrap();
        assert_eq!(
            p.vertices(),
            &[(q(0), q(0)), (q(1), q(-1)), (q(2), q(-2)), (q(3), q(0))]
        );
        assert!(hodge_polygon(&[(q(1), 1), (q(1), 1)]).is_err());
        assert!(hodge_polygon(&[(q(1), 0)]).is_err());
    }

    #[test]
    fn newton_examples() {
        // diag(2,1) at p=2: char poly (X-2)(X-1), slopes {0,1}
        let b = Matrix::from_rows(vec![vec![q(2), q(0)], vec![q(0), q(1)]]);
        let p = newton_polygon_from_charpoly(&b, 2).unwrap();
        assert_eq!(p.vertices(), &[(q(0), q(0)), (q(1), q(0)), (q(2), q(1))]);
        // identity: flat
        let b = Matrix::<Q>::identity(3);
        let p = newton_polygon_from_charpoly(&b, 5).unwrap();
        assert_eq!(p.terminal(), &(q(3), q(0)));
        assert!(p.vertices().iter().all(|(_, y)| y.is_zero()));
        // [[0,3],[1,0]] at p=3: char poly X^2 - 3, slopes {1/2, 1/2}
        let b = Matrix::from_rows(vec![vec![q(0), q(3)], vec![q(1), q(0)]]);
        let p = newton_polygon_from_charpoly(&b, 3).unwrap();
        assert_eq!(p.slope_multiset(), vec![qr(1, 2), qr(1, 2)]);
        // errors
        let singular = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(4)]]);
        assert!(newton_polygon_from_charpoly(&singular, 2).is_err());
        let b = Matrix::<Q>::identity(2);
        assert!(newton_polygon_from_charpoly(&b, 4).is_err());
    }

    #[test]
    fn compare_examples() {
        let p = polygon_from_slopes(&[q(0), q(1)]).unwrap();
        assert_eq!(polygon_compare(&p, &p).unwrap(), (true, true));
        let a = polygon_from_slopes(&[q(0), q(1)]).unwrap(); // ends (2,1)
        let b = polygon_from_slopes(&[q(0), q(0)]).unwrap(); // ends (2,0)
        assert_eq!(polygon_compare(&a, &b).unwrap(), (true, false));
        // Newton of diag(p,1) vs Hodge of type (1,0): both coincide
        let m = Matrix::from_rows(vec![vec![q(2), q(0)], vec![q(0), q(1)]]);
        let newton = newton_polygon_from_charpoly(&m, 2).unwrap();
        let hodge = hodge_polygon(&[(q(1), 1), (q(0), 1)]).unwrap();
        assert_eq!(polygon_compare(&newton, &hodge).unwrap(), (true, true));
        // rank mismatch
        let short = polygon_from_slopes(&[q(0)]).unwrap();
        assert!(polygon_compare(&a, &short).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let p = polygon_from_slopes(&[qr(1, 2), qr(1, 2), q(2)]).unwrap();
        let j = p.to_json();
        assert_eq!(Polygon::from_json(&j).unwrap(), p);
    }

    proptest! {
        #[test]
        fn from_slopes_is_permutation_invariant(
            mut slopes in proptest::collection::vec((-6i64..=6, 1i64..=3), 1..6)
        ) {
            let qs: Vec<Q> = slopes.iter().map(|&(n, d)| qr(n, d)).collect();
            let p1 = polygon_from_slopes(&qs).unwrap();
            slopes.reverse();
            let qs: Vec<Q> = slopes.iter().map(|&(n, d)| qr(n, d)).collect();
            let p2 = polygon_from_slopes(&qs).unwrap();
            prop_assert_eq!(p1, p2);
        }

        #[test]
        fn constructed_polygons_are_convex(
            slopes in proptest::collection::vec((-6i64..=6, 1i64..=3), 1..6)
        ) {
            let qs: Vec<Q> = slopes.iter().map(|&(n, d)| qr(n, d)).collect();
            let p = polygon_from_slopes(&qs).unwrap();
            let mut sorted = p.slope_multiset();
            let resorted = { let mut s = sorted.clone(); s.sort(); s };
            prop_assert_eq!(&mut sorted, &resorted);
        }
    }
}
