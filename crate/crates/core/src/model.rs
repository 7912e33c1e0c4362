//! Problem and uncertainty-set data model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::solver::{solve_lp, LinearProgram, LpStatus};

/// One constraint `⟨a, x⟩ + ⟨e + Qᵀx, ξ⟩ + constant <= 0`, affine in `x` for
/// fixed `ξ` and affine in `ξ` for fixed `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiAffineConstraint {
    pub a: Vec<f64>,
    pub e: Vec<f64>,
    /// `n × m` cross term; `None` means zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Matrix>,
    #[serde(alias = "const")]
    pub constant: f64,
}

impl BiAffineConstraint {
    pub fn new(a: Vec<f64>, e: Vec<f64>, constant: f64) -> Self {
        Self {
            a,
            e,
            q: None,
            constant,
        }
    }

    pub fn with_cross(mut self, q: Matrix) -> Self {
        self.q = Some(q);
        self
    }

    pub fn has_cross_term(&self) -> bool {
        self.q
            .as_ref()
            .is_some_and(|q| q.iter().flatten().any(|&v| v != 0.0))
    }

    /// True when the constraint does not depend on `ξ` at all.
    pub fn is_certain(&self) -> bool {
        !self.has_cross_term() && self.e.iter().all(|&v| v == 0.0)
    }

    fn check(&self, n: usize, m: usize, idx: usize) -> Result<()> {
        if self.a.len() != n {
            return Err(Error::dim(
                format!("constraint {idx} coefficient a"),
                n,
                self.a.len(),
            ));
        }
        if self.e.len() != m {
            return Err(Error::dim(
                format!("constraint {idx} coefficient e"),
                m,
                self.e.len(),
            ));
        }
        if let Some(q) = &self.q {
            if q.len() != n {
                return Err(Error::dim(
                    format!("constraint {idx} cross term rows"),
                    n,
                    q.len(),
                ));
            }
            if let Some(r) = q.iter().find(|r| r.len() != m) {
                return Err(Error::dim(
                    format!("constraint {idx} cross term cols"),
                    m,
                    r.len(),
                ));
            }
        }
        Ok(())
    }

    /// `e + Qᵀx`, the coefficient of `ξ` at decision `x`.
    pub fn xi_coeff(&self, x: &[f64]) -> Vec<f64> {
        let mut w = self.e.clone();
        if let Some(q) = &self.q {
            for (row, &xi) in q.iter().zip(x) {
                for (wk, &qk) in w.iter_mut().zip(row) {
                    *wk += xi * qk;
                }
            }
        }
        w
    }

    /// `⟨a, x⟩ + constant`, the part independent of `ξ`.
    pub fn base(&self, x: &[f64]) -> f64 {
        dot(&self.a, x) + self.constant
    }

    /// The constraint at fixed `ξ` as `(coeffs, c)` with `f = coeffs·x + c`.
    pub fn at_xi(&self, xi: &[f64]) -> (Vec<f64>, f64) {
        let mut coeffs = self.a.clone();
        if let Some(q) = &self.q {
            for (c, row) in coeffs.iter_mut().zip(q) {
                *c += dot(row, xi);
            }
        }
        (coeffs, dot(&self.e, xi) + self.constant)
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        eval_constraint(self, x, xi)
    }
}

/// Evaluates `⟨a, x⟩ + ⟨e + Qᵀx, ξ⟩ + constant`.
pub fn eval_constraint(c: &BiAffineConstraint, x: &[f64], xi: &[f64]) -> Result<f64> {
    if x.len() != c.a.len() {
        return Err(Error::dim("decision vector", c.a.len(), x.len()));
    }
    if xi.len() != c.e.len() {
        return Err(Error::dim("uncertainty vector", c.e.len(), xi.len()));
    }
    if let Some(q) = &c.q {
        if q.len() != x.len() || q.iter().any(|r| r.len() != xi.len()) {
            return Err(Error::dim("cross term", x.len(), q.len()));
        }
    }
    Ok(c.base(x) + dot(&c.xi_coeff(x), xi))
}

/// Decision polytope `{x : G x <= h, G_eq x = h_eq}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DecisionSet {
    pub g: Matrix,
    pub h: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub g_eq: Matrix,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub h_eq: Vec<f64>,
}

impl DecisionSet {
    /// Box `lo <= x <= hi`; infinite entries are skipped.
    pub fn boxed(lo: &[f64], hi: &[f64]) -> Self {
        let n = lo.len();
        let mut set = DecisionSet::default();
        for j in 0..n {
            let mut unit = vec![0.0; n];
            if hi[j].is_finite() {
                unit[j] = 1.0;
                set.g.push(unit.clone());
                set.h.push(hi[j]);
            }
            if lo[j].is_finite() {
                unit[j] = -1.0;
                set.g.push(unit);
                set.h.push(-lo[j]);
            }
        }
        set
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.g.len() != self.h.len() {
            return Err(Error::dim("decision set rhs", self.g.len(), self.h.len()));
        }
        if self.g_eq.len() != self.h_eq.len() {
            return Err(Error::dim(
                "decision set equality rhs",
                self.g_eq.len(),
                self.h_eq.len(),
            ));
        }
        if let Some(r) = self.g.iter().chain(&self.g_eq).find(|r| r.len() != n) {
            return Err(Error::dim("decision set row", n, r.len()));
        }
        Ok(())
    }

    /// Adds the set to an LP whose first `n` variables are `x`. Rows with a
    /// single nonzero coefficient become variable bounds.
    pub fn apply(&self, lp: &mut LinearProgram) {
        let nv = lp.num_vars();
        for (row, &rhs) in self.g.iter().zip(&self.h) {
            let mut nz = row.iter().enumerate().filter(|(_, v)| **v != 0.0);
            match (nz.next(), nz.next()) {
                (Some((j, &a)), None) => {
                    let (lo, hi) = lp.bounds[j];
                    let b = rhs / a;
                    if a > 0.0 {
                        lp.bounds[j] = (lo, hi.min(b));
                    } else {
                        lp.bounds[j] = (lo.max(b), hi);
                    }
                }
                (None, _) => {
                    // 0 <= rhs; keep as a row so infeasibility is detected.
                    lp.add_le(vec![0.0; nv], rhs);
                }
                _ => {
                    let mut coeffs = row.clone();
                    coeffs.resize(nv, 0.0);
                    lp.add_le(coeffs, rhs);
                }
            }
        }
        for (row, &rhs) in self.g_eq.iter().zip(&self.h_eq) {
            let mut coeffs = row.clone();
            coeffs.resize(nv, 0.0);
            lp.add_eq(coeffs, rhs);
        }
    }
}

/// `min ⟨c, x⟩` over `x ∈ X` subject to bi-affine constraints that must hold
/// for every `ξ` in an uncertainty set of dimension `uncertainty_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<BiAffineConstraint>,
    pub decision_set: DecisionSet,
    pub uncertainty_dim: usize,
}

impl RobustProgram {
    pub fn n(&self) -> usize {
        self.objective.len()
    }

    pub fn m(&self) -> usize {
        self.uncertainty_dim
    }

    pub fn has_cross_terms(&self) -> bool {
        self.constraints
            .iter()
            .any(BiAffineConstraint::has_cross_term)
    }

    pub fn check_dims(&self) -> Result<()> {
        let (n, m) = (self.n(), self.m());
        for (i, c) in self.constraints.iter().enumerate() {
            c.check(n, m, i)?;
        }
        self.decision_set.check(n)
    }

    /// LP over `x` (plus `extra` trailing free variables) restricted to the
    /// decision set, with zero cost.
    pub fn decision_lp(&self, extra: usize) -> LinearProgram {
        let mut lp = LinearProgram::new(self.n() + extra);
        self.decision_set.apply(&mut lp);
        lp
    }

    /// Adds one row per (constraint, ξ) pair to an LP whose first `n`
    /// variables are `x`. Certain constraints are added once.
    pub fn add_rows_at(&self, lp: &mut LinearProgram, xis: &[Vec<f64>]) {
        let nv = lp.num_vars();
        for c in &self.constraints {
            let points: &[Vec<f64>] = if c.is_certain() && !xis.is_empty() {
                &xis[..1]
            } else {
                xis
            };
            for xi in points {
                let (mut coeffs, k) = c.at_xi(xi);
                coeffs.resize(nv, 0.0);
                lp.add_le(coeffs, -k);
            }
        }
    }

    /// Checks whether some `x ∈ X` satisfies every constraint at each of the
    /// given scenarios; returns the witness.
    pub fn feasible_at(&self, xis: &[Vec<f64>]) -> Result<Option<Vec<f64>>> {
        let mut lp = self.decision_lp(0);
        self.add_rows_at(&mut lp, xis);
        let sol = solve_lp(&lp)?;
        Ok(match sol.status {
            LpStatus::Optimal => Some(sol.x),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormP {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl NormP {
    pub fn dual(self) -> NormP {
        match self {
            NormP::One => NormP::Inf,
            NormP::Two => NormP::Two,
            NormP::Inf => NormP::One,
        }
    }

    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormP::One => crate::linalg::norm1(v),
            NormP::Two => crate::linalg::norm2(v),
            NormP::Inf => crate::linalg::norm_inf(v),
        }
    }
}

impl std::str::FromStr for NormP {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(NormP::One),
            "2" => Ok(NormP::Two),
            "inf" | "Inf" | "INF" | "infinity" => Ok(NormP::Inf),
            other => Err(Error::InvalidParameter(format!("unknown norm '{other}'"))),
        }
    }
}

impl std::fmt::Display for NormP {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormP::One => "1",
            NormP::Two => "2",
            NormP::Inf => "inf",
        })
    }
}

/// `{ξ : V ξ <= d}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub v: Matrix,
    pub d: Vec<f64>,
}

impl Polytope {
    pub fn new(v: Matrix, d: Vec<f64>) -> Result<Self> {
        let p = Self { v, d };
        p.check()?;
        Ok(p)
    }

    /// Axis-aligned box `lo <= ξ <= hi`, rows ordered `+e_1..+e_m, -e_1..-e_m`.
    pub fn boxed(lo: &[f64], hi: &[f64]) -> Self {
        let m = lo.len();
        let mut v = Vec::with_capacity(2 * m);
        let mut d = Vec::with_capacity(2 * m);
        for k in 0..m {
            let mut r = vec![0.0; m];
            r[k] = 1.0;
            v.push(r);
            d.push(hi[k]);
        }
        for k in 0..m {
            let mut r = vec![0.0; m];
            r[k] = -1.0;
            v.push(r);
            d.push(-lo[k]);
        }
        Self { v, d }
    }

    /// Interval `[lo, hi]` as rows `(1; -1)`, `d = (hi; -lo)`.
    pub fn interval(lo: f64, hi: f64) -> Self {
        Self::boxed(&[lo], &[hi])
    }

    pub fn dim(&self) -> usize {
        self.v.first().map_or(0, Vec::len)
    }

    pub fn num_rows(&self) -> usize {
        self.v.len()
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.v.is_empty() {
            return Err(Error::InvalidSet("polytope has no rows".into()));
        }
        if self.v.len() != self.d.len() {
            return Err(Error::dim("polytope rhs", self.v.len(), self.d.len()));
        }
        let m = self.dim();
        if m == 0 {
            return Err(Error::InvalidSet("polytope has dimension 0".into()));
        }
        if let Some(r) = self.v.iter().find(|r| r.len() != m) {
            return Err(Error::dim("polytope row", m, r.len()));
        }
        if self
            .v
            .iter()
            .flatten()
            .chain(&self.d)
            .any(|x| !x.is_finite())
        {
            return Err(Error::InvalidSet("non-finite polytope data".into()));
        }
        Ok(())
    }

    /// Closed membership with absolute tolerance `tol` on every row.
    pub fn contains_with(&self, xi: &[f64], rhs: &[f64], tol: f64) -> bool {
        self.v
            .iter()
            .zip(rhs)
            .all(|(row, &b)| dot(row, xi) <= b + tol)
    }

    pub fn contains(&self, xi: &[f64], tol: f64) -> bool {
        self.contains_with(xi, &self.d, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UncertaintySet {
    /// `{ξ : ‖ξ‖_p <= radius}`.
    NormBall {
        p: NormP,
        radius: f64,
        dim: usize,
    },
    Polytope(Polytope),
}

impl UncertaintySet {
    pub fn dim(&self) -> usize {
        match self {
            UncertaintySet::NormBall { dim, .. } => *dim,
            UncertaintySet::Polytope(p) => p.dim(),
        }
    }

    pub fn as_polytope(&self) -> Result<&Polytope> {
        match self {
            UncertaintySet::Polytope(p) => Ok(p),
            UncertaintySet::NormBall { .. } => Err(Error::NotPolytope),
        }
    }

    /// Cheap structural checks (no LPs); see `geometry::validate_set` for the
    /// boundedness and nonemptiness checks.
    pub fn check_shape(&self) -> Result<()> {
        match self {
            UncertaintySet::NormBall { radius, dim, .. } => {
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidSet(format!(
                        "norm-ball radius must be > 0, got {radius}"
                    )));
                }
                if *dim == 0 {
                    return Err(Error::InvalidSet("norm ball has dimension 0".into()));
                }
                Ok(())
            }
            UncertaintySet::Polytope(p) => p.check(),
        }
    }
}

/// Uncertainty samples plus provenance.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleSet {
    pub samples: Vec<Vec<f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub source: String,
}

impl SampleSet {
    pub fn new(samples: Vec<Vec<f64>>, seed: Option<u64>, source: impl Into<String>) -> Self {
        Self {
            samples,
            seed,
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn check_dim(&self, m: usize) -> Result<()> {
        match self.samples.iter().find(|s| s.len() != m) {
            Some(s) => Err(Error::dim("sample", m, s.len())),
            None => Ok(()),
        }
    }
}

/// Outcome of [`validate_program`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n: usize,
    pub m: usize,
    pub num_constraints: usize,
    pub has_cross_terms: bool,
    pub center: Vec<f64>,
    pub nominally_feasible: bool,
    pub nominal_witness: Option<Vec<f64>>,
}

/// Dimension checks, decision-set nonemptiness, and feasibility of the
/// constraints at the uncertainty set's center.
pub fn validate_program(p: &RobustProgram, s: &UncertaintySet) -> Result<ValidationReport> {
    p.check_dims()?;
    if s.dim() != p.m() {
        return Err(Error::dim("uncertainty set", p.m(), s.dim()));
    }
    crate::geometry::validate_set(s)?;

    let lp = p.decision_lp(0);
    if solve_lp(&lp)?.status == LpStatus::Infeasible {
        return Err(Error::EmptyDecisionSet);
    }

    let center = crate::geometry::center(s)?;
    let witness = p.feasible_at(std::slice::from_ref(&center))?;
    Ok(ValidationReport {
        n: p.n(),
        m: p.m(),
        num_constraints: p.constraints.len(),
        has_cross_terms: p.has_cross_terms(),
        center,
        nominally_feasible: witness.is_some(),
        nominal_witness: witness,
    })
}
