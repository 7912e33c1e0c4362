//! Homothety scaling, membership, sample coverage, vertex enumeration and
//! Chebyshev centers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, mat_vec, norm2, solve_square};
use crate::model::{Polytope, SampleSet, UncertaintySet};
use crate::solver::{solve_lp, LinearProgram, LpStatus};
use crate::tol;

/// Upper limit on the number of vertices returned by [`enumerate_vertices`].
pub const VERTEX_CAP: usize = 4096;
/// Above this dimension the row-subset count is checked before enumerating.
pub const VERTEX_DIM_LIMIT: usize = 4;
const SUBSET_BUDGET: u128 = 2_000_000;

/// `Ŝ(α, v) = α·S + (1-α)·{v}` for a polytope base, or `{‖ξ‖_p <= α·r}` for a
/// norm-ball base (no anchor).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledSet {
    pub base: UncertaintySet,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Vec<f64>>,
}

impl ScaledSet {
    pub fn new(base: UncertaintySet, alpha: f64, anchor: Option<Vec<f64>>) -> Result<Self> {
        let s = Self {
            base,
            alpha,
            anchor,
        };
        s.check()?;
        Ok(s)
    }

    /// Identity scaling of a polytope about `anchor`, or of a norm ball.
    pub fn identity(base: UncertaintySet, anchor: Option<Vec<f64>>) -> Result<Self> {
        Self::new(base, 1.0, anchor)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn check(&self) -> Result<()> {
        self.base.check_shape()?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        match (&self.base, &self.anchor) {
            (UncertaintySet::Polytope(p), Some(v)) => {
                if v.len() != p.dim() {
                    return Err(Error::dim("anchor", p.dim(), v.len()));
                }
                let violation = mat_vec(&p.v, v)
                    .iter()
                    .zip(&p.d)
                    .map(|(lhs, d)| lhs - d)
                    .fold(f64::NEG_INFINITY, f64::max);
                if violation > tol::ANCHOR {
                    return Err(Error::AnchorOutsideBase { violation });
                }
                Ok(())
            }
            (UncertaintySet::Polytope(_), None) => Err(Error::InvalidParameter(
                "polytope scaling needs an anchor".into(),
            )),
            (UncertaintySet::NormBall { .. }, Some(_)) => Err(Error::InvalidParameter(
                "norm-ball scaling takes no anchor".into(),
            )),
            (UncertaintySet::NormBall { .. }, None) => Ok(()),
        }
    }

    /// The scaled set as a polytope `{V ξ <= homothety_rhs}`.
    pub fn to_polytope(&self) -> Result<Polytope> {
        let p = self.base.as_polytope()?;
        Ok(Polytope {
            v: p.v.clone(),
            d: homothety_rhs(self)?,
        })
    }

    /// Vertices of a polytope-based scaled set: `α·w + (1-α)·v` for every
    /// vertex `w` of the base.
    pub fn vertices(&self) -> Result<Vec<Vec<f64>>> {
        let base = enumerate_vertices(self.base.as_polytope()?)?;
        let anchor = self.anchor.as_ref().ok_or(Error::NotPolytope)?;
        Ok(scale_points(&base, self.alpha, anchor))
    }

    pub fn contains(&self, xi: &[f64]) -> Result<bool> {
        if xi.len() != self.dim() {
            return Err(Error::dim("membership point", self.dim(), xi.len()));
        }
        Ok(match &self.base {
            UncertaintySet::NormBall { p, radius, .. } => {
                p.norm(xi) <= self.alpha * radius + tol::MEMBERSHIP
            }
            UncertaintySet::Polytope(poly) => {
                poly.contains_with(xi, &homothety_rhs(self)?, tol::MEMBERSHIP)
            }
        })
    }
}

pub(crate) fn scale_points(points: &[Vec<f64>], alpha: f64, anchor: &[f64]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|w| {
            w.iter()
                .zip(anchor)
                .map(|(wk, vk)| alpha * wk + (1.0 - alpha) * vk)
                .collect()
        })
        .collect()
}

/// Right-hand side `α·d + (1-α)·V v` of the scaled polytope.
pub fn homothety_rhs(s: &ScaledSet) -> Result<Vec<f64>> {
    s.check()?;
    let p = s.base.as_polytope()?;
    let v = s.anchor.as_ref().expect("checked above");
    Ok(homothety_rhs_raw(p, s.alpha, v))
}

pub(crate) fn homothety_rhs_raw(p: &Polytope, alpha: f64, anchor: &[f64]) -> Vec<f64> {
    mat_vec(&p.v, anchor)
        .iter()
        .zip(&p.d)
        .map(|(vv, d)| alpha * d + (1.0 - alpha) * vv)
        .collect()
}

/// Closed membership in a base set (tolerance [`tol::MEMBERSHIP`]).
pub fn contains_base(s: &UncertaintySet, xi: &[f64]) -> Result<bool> {
    if xi.len() != s.dim() {
        return Err(Error::dim("membership point", s.dim(), xi.len()));
    }
    Ok(match s {
        UncertaintySet::NormBall { p, radius, .. } => p.norm(xi) <= radius + tol::MEMBERSHIP,
        UncertaintySet::Polytope(poly) => poly.contains(xi, tol::MEMBERSHIP),
    })
}

/// Number of samples inside `s`. Samples of the wrong dimension never count.
pub fn coverage_count(s: &ScaledSet, data: &SampleSet) -> usize {
    match &s.base {
        UncertaintySet::Polytope(p) => {
            let Some(anchor) = &s.anchor else { return 0 };
            let rhs = homothety_rhs_raw(p, s.alpha, anchor);
            data.samples
                .iter()
                .filter(|xi| xi.len() == p.dim() && p.contains_with(xi, &rhs, tol::MEMBERSHIP))
                .count()
        }
        UncertaintySet::NormBall { .. } => data
            .samples
            .iter()
            .filter(|xi| s.contains(xi).unwrap_or(false))
            .count(),
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// All vertices of a bounded polytope, sorted lexicographically.
///
/// Every `m`-subset of rows is intersected; points violating another row by
/// more than `1e-9` (relative) are dropped and near-duplicates (`1e-8`,
/// ∞-norm) merged.
pub fn enumerate_vertices(p: &Polytope) -> Result<Vec<Vec<f64>>> {
    p.check()?;
    let m = p.dim();
    let rows = p.num_rows();
    if rows < m {
        return Err(Error::UnboundedSet);
    }
    if m > VERTEX_DIM_LIMIT && binomial(rows, m) > SUBSET_BUDGET {
        return Err(Error::DimensionTooLarge(format!(
            "{} row subsets in dimension {m}",
            binomial(rows, m)
        )));
    }
    if !is_bounded(p)? {
        return Err(Error::UnboundedSet);
    }

    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| p.v[i].clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&i| p.d[i]).collect();
        if let Some(x) = solve_square(&a, &b) {
            let feasible = p.v.iter().zip(&p.d).all(|(row, &d)| {
                let scale =
                    1.0 + d.abs() + norm2(row) * x.iter().fold(0.0f64, |s, v| s.max(v.abs()));
                dot(row, &x) <= d + 1e-9 * scale
            });
            if feasible
                && !vertices
                    .iter()
                    .any(|w| w.iter().zip(&x).all(|(a, b)| (a - b).abs() <= tol::DEDUP))
            {
                vertices.push(x);
                if vertices.len() > VERTEX_CAP {
                    return Err(Error::DimensionTooLarge(format!(
                        "more than {VERTEX_CAP} vertices"
                    )));
                }
            }
        }
        // Next combination.
        let mut k = m;
        loop {
            if k == 0 {
                if vertices.is_empty() {
                    return Err(Error::EmptySet);
                }
                vertices.sort_by(|a, b| {
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                return Ok(vertices);
            }
            k -= 1;
            if idx[k] < rows - m + k {
                idx[k] += 1;
                for j in k + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Bounds `[min ξ_k, max ξ_k]` per coordinate over a polytope (2m LPs).
pub fn bounding_box(p: &Polytope) -> Result<Vec<(f64, f64)>> {
    let m = p.dim();
    let mut out = Vec::with_capacity(m);
    for k in 0..m {
        let mut ends = [0.0; 2];
        for (slot, sign) in [(0usize, 1.0), (1usize, -1.0)] {
            let mut lp = polytope_lp(p);
            lp.cost[k] = sign;
            let sol = solve_lp(&lp)?;
            match sol.status {
                LpStatus::Optimal => ends[slot] = sol.x[k],
                LpStatus::Unbounded => return Err(Error::UnboundedSet),
                LpStatus::Infeasible => return Err(Error::EmptySet),
            }
        }
        out.push((ends[0], ends[1]));
    }
    Ok(out)
}

fn polytope_lp(p: &Polytope) -> LinearProgram {
    let mut lp = LinearProgram::new(p.dim());
    for (row, &d) in p.v.iter().zip(&p.d) {
        lp.add_le(row.clone(), d);
    }
    lp
}

/// True when the recession cone `{y : V y <= 0}` is trivial.
pub fn is_bounded(p: &Polytope) -> Result<bool> {
    let m = p.dim();
    for k in 0..m {
        for sign in [1.0, -1.0] {
            let mut lp = LinearProgram::new(m);
            for row in &p.v {
                lp.add_le(row.clone(), 0.0);
            }
            lp.cost[k] = -sign;
            lp.set_bounds(k, -1.0, 1.0);
            let sol = solve_lp(&lp)?;
            if sol.status == LpStatus::Optimal && sol.objective < -1e-9 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevBall {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Center of the largest inscribed Euclidean ball, breaking ties by the
/// lexicographically smallest optimal point.
pub fn chebyshev_center(p: &Polytope) -> Result<ChebyshevBall> {
    p.check()?;
    let m = p.dim();
    let mut lp = LinearProgram::new(m + 1);
    lp.cost[m] = -1.0;
    for (row, &d) in p.v.iter().zip(&p.d) {
        let mut coeffs = row.clone();
        coeffs.push(norm2(row));
        lp.add_le(coeffs, d);
    }
    let sol = solve_lp(&lp)?;
    let radius = match sol.status {
        LpStatus::Optimal => sol.x[m],
        LpStatus::Unbounded => return Err(Error::UnboundedSet),
        LpStatus::Infeasible => return Err(Error::EmptySet),
    };
    if radius < -1e-9 {
        return Err(Error::EmptySet);
    }
    lp.cost[m] = 0.0;
    lp.set_bounds(m, radius, f64::INFINITY);
    let mut center = sol.x[..m].to_vec();
    for k in 0..m {
        lp.cost.iter_mut().for_each(|c| *c = 0.0);
        lp.cost[k] = 1.0;
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal => {
                let val = sol.x[k];
                lp.set_bounds(k, f64::NEG_INFINITY, val);
                center = sol.x[..m].to_vec();
            }
            LpStatus::Unbounded => return Err(Error::UnboundedSet),
            LpStatus::Infeasible => break,
        }
    }
    Ok(ChebyshevBall {
        center,
        radius: radius.max(0.0),
    })
}

/// Natural center of a base set: Chebyshev center or the ball's origin.
pub fn center(s: &UncertaintySet) -> Result<Vec<f64>> {
    match s {
        UncertaintySet::NormBall { dim, .. } => Ok(vec![0.0; *dim]),
        UncertaintySet::Polytope(p) => Ok(chebyshev_center(p)?.center),
    }
}

/// Structural checks plus boundedness and nonemptiness.
pub fn validate_set(s: &UncertaintySet) -> Result<()> {
    s.check_shape()?;
    if let UncertaintySet::Polytope(p) = s {
        chebyshev_center(p)?;
        if !is_bounded(p)? {
            return Err(Error::UnboundedSet);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn numerical_box() -> Polytope {
        Polytope::new(
            vec![
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![-1.0, 0.0],
                vec![0.0, -1.0],
            ],
            vec![10.0; 4],
        )
        .unwrap()
    }

    #[test]
    fn homothety_examples() {
        let s = ScaledSet::new(
            UncertaintySet::Polytope(numerical_box()),
            0.75,
            Some(vec![10.0, 10.0]),
        )
        .unwrap();
        assert_eq!(homothety_rhs(&s).unwrap(), vec![10.0, 10.0, 5.0, 5.0]);

        let id = ScaledSet::new(
            UncertaintySet::Polytope(numerical_box()),
            1.0,
            Some(vec![3.0, -2.0]),
        )
        .unwrap();
        assert_eq!(homothety_rhs(&id).unwrap(), vec![10.0; 4]);

        let opf = Polytope::new(vec![vec![1.0], vec![-1.0]], vec![35.0, -20.0]).unwrap();
        let s = ScaledSet::new(UncertaintySet::Polytope(opf), 2.0 / 3.0, Some(vec![35.0])).unwrap();
        let rhs = homothety_rhs(&s).unwrap();
        assert!((rhs[0] - 35.0).abs() < 1e-12 && (rhs[1] + 25.0).abs() < 1e-12);
    }

    #[test]
    fn anchor_outside_rejected() {
        let r = ScaledSet::new(
            UncertaintySet::Polytope(numerical_box()),
            0.5,
            Some(vec![11.0, 0.0]),
        );
        assert!(matches!(r, Err(Error::AnchorOutsideBase { .. })));
    }

    #[test]
    fn membership() {
        let s = ScaledSet::new(
            UncertaintySet::Polytope(Polytope::interval(3.0, 5.0)),
            0.5,
            Some(vec![3.0]),
        )
        .unwrap();
        assert!(s.contains(&[3.5]).unwrap());
        assert!(s.contains(&[4.0]).unwrap());
        assert!(!s.contains(&[4.0 + 1e-6]).unwrap());
        assert!(matches!(
            s.contains(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));

        let s = ScaledSet::new(
            UncertaintySet::Polytope(numerical_box()),
            0.75,
            Some(vec![10.0, 10.0]),
        )
        .unwrap();
        assert!(s.contains(&[-5.0, -5.0]).unwrap());
        assert!(!s.contains(&[-5.1, 0.0]).unwrap());
    }

    #[test]
    fn coverage_examples() {
        let s = ScaledSet::new(
            UncertaintySet::Polytope(Polytope::interval(3.0, 5.0)),
            0.5,
            Some(vec![3.0]),
        )
        .unwrap();
        assert_eq!(coverage_count(&s, &SampleSet::default()), 0);
        let data = SampleSet::new(
            vec![vec![3.1], vec![3.9], vec![4.5], vec![4.9]],
            None,
            "hand",
        );
        assert_eq!(coverage_count(&s, &data), 2);
        let full = ScaledSet::new(s.base.clone(), 1.0, Some(vec![3.0])).unwrap();
        assert_eq!(coverage_count(&full, &data), 4);
    }

    #[test]
    fn vertices_of_box_and_interval() {
        let v = enumerate_vertices(&numerical_box()).unwrap();
        assert_eq!(
            v,
            vec![
                vec![-10.0, -10.0],
                vec![-10.0, 10.0],
                vec![10.0, -10.0],
                vec![10.0, 10.0]
            ]
        );
        let v = enumerate_vertices(&Polytope::interval(25.0, 35.0)).unwrap();
        assert_eq!(v, vec![vec![25.0], vec![35.0]]);
    }

    #[test]
    fn vertices_of_scaled_set() {
        let p = Polytope {
            v: numerical_box().v,
            d: vec![10.0, 10.0, 5.0, 5.0],
        };
        let v = enumerate_vertices(&p).unwrap();
        assert_eq!(
            v,
            vec![
                vec![-5.0, -5.0],
                vec![-5.0, 10.0],
                vec![10.0, -5.0],
                vec![10.0, 10.0]
            ]
        );
    }

    #[test]
    fn unbounded_and_empty() {
        let half = Polytope::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]],
            vec![1.0, 1.0, 1.0],
        )
        .unwrap();
        assert_eq!(enumerate_vertices(&half), Err(Error::UnboundedSet));
        let empty = Polytope::interval(2.0, 1.0);
        assert_eq!(enumerate_vertices(&empty), Err(Error::EmptySet));
        assert_eq!(chebyshev_center(&empty), Err(Error::EmptySet));
    }

    #[test]
    fn triangle_vertices_with_redundant_row() {
        // x >= 0, y >= 0, x + y <= 1, x <= 5 (redundant)
        let p = Polytope::new(
            vec![
                vec![-1.0, 0.0],
                vec![0.0, -1.0],
                vec![1.0, 1.0],
                vec![1.0, 0.0],
            ],
            vec![0.0, 0.0, 1.0, 5.0],
        )
        .unwrap();
        let v = enumerate_vertices(&p).unwrap();
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn chebyshev_examples() {
        let c = chebyshev_center(&numerical_box()).unwrap();
        assert!(c.center.iter().all(|v| v.abs() < 1e-9));
        assert!((c.radius - 10.0).abs() < 1e-9);
        let c = chebyshev_center(&Polytope::interval(20.0, 35.0)).unwrap();
        assert!((c.center[0] - 27.5).abs() < 1e-9);
        let c = chebyshev_center(&Polytope::interval(3.0, 5.0)).unwrap();
        assert!((c.center[0] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn chebyshev_tie_break_is_lexicographic() {
        // [0,4] x [0,2]: radius 1, centers (t, 1) for t in [1, 3]
        let p = Polytope::boxed(&[0.0, 0.0], &[4.0, 2.0]);
        let c = chebyshev_center(&p).unwrap();
        assert!((c.center[0] - 1.0).abs() < 1e-6 && (c.center[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bounding_box_of_triangle() {
        let p = Polytope::new(
            vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![1.0, 2.0]],
            vec![0.0, 0.0, 2.0],
        )
        .unwrap();
        let bb = bounding_box(&p).unwrap();
        assert!((bb[0].0).abs() < 1e-12 && (bb[0].1 - 2.0).abs() < 1e-12);
        assert!((bb[1].1 - 1.0).abs() < 1e-12);
    }
}
