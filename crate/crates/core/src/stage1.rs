//! Stage-1 synthesis: the largest scaled uncertainty set that keeps the
//! robust program feasible.

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    bounding_box, chebyshev_center, coverage_count, enumerate_vertices, scale_points, ScaledSet,
};
use crate::model::{validate_program, NormP, Polytope, RobustProgram, SampleSet, UncertaintySet};
use crate::solver::{
    bisect_max, cutting_plane_norm2, solve_lp, CuttingPlaneOptions, LinearProgram, LpSolution,
    LpStatus, SocRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorSearch {
    FixedCenter,
    #[default]
    CoordinateSearch,
}

impl std::str::FromStr for AnchorSearch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed_center" => Ok(Self::FixedCenter),
            "coordinate_search" => Ok(Self::CoordinateSearch),
            other => Err(Error::InvalidParameter(format!(
                "unknown anchor search '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisConfig {
    /// Weight of the sample-coverage reward. Any positive value yields the
    /// same lexicographic preference; zero disables the coverage tie-break.
    pub gamma: f64,
    pub alpha_tol: f64,
    pub anchor_search: AnchorSearch,
    pub anchor_grid_steps: usize,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            alpha_tol: 1e-6,
            anchor_search: AnchorSearch::CoordinateSearch,
            anchor_grid_steps: 9,
        }
    }
}

impl SynthesisConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        if !(self.alpha_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha_tol must be > 0, got {}",
                self.alpha_tol
            )));
        }
        if self.anchor_grid_steps < 2 {
            return Err(Error::InvalidParameter(
                "anchor_grid_steps must be >= 2".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub scaled: ScaledSet,
    pub witness_x: Vec<f64>,
    pub covered: usize,
    pub alpha_star: f64,
    /// Right-hand side of the scaled polytope; empty for norm balls.
    pub rhs: Vec<f64>,
    pub anchors_evaluated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub witness_x: Option<Vec<f64>>,
}

/// Robust counterpart of a program over a scaled set, ready to solve.
#[derive(Debug, Clone)]
pub(crate) struct Counterpart {
    pub lp: LinearProgram,
    pub soc: Vec<SocRow>,
}

impl Counterpart {
    pub fn solve(&self) -> Result<LpSolution> {
        if self.soc.is_empty() {
            solve_lp(&self.lp)
        } else {
            Ok(cutting_plane_norm2(&self.lp, &self.soc, CuttingPlaneOptions::default())?.solution)
        }
    }
}

/// Vertex-row counterpart: one row per (uncertain constraint, point).
pub(crate) fn vertex_counterpart(
    p: &RobustProgram,
    points: &[Vec<f64>],
    with_objective: bool,
) -> Counterpart {
    let mut lp = p.decision_lp(0);
    if with_objective {
        lp.cost = p.objective.clone();
    }
    p.add_rows_at(&mut lp, points);
    Counterpart {
        lp,
        soc: Vec::new(),
    }
}

/// Norm-ball counterpart: `base_j(x) + α r ‖e_j + Q_jᵀx‖_q <= 0`.
pub(crate) fn ball_counterpart(
    p: &RobustProgram,
    norm: NormP,
    scale: f64,
    with_objective: bool,
) -> Counterpart {
    let n = p.n();
    let m = p.m();
    let q = norm.dual();
    let mut lp = p.decision_lp(0);
    if with_objective {
        lp.cost = p.objective.clone();
    }
    let mut soc = Vec::new();
    let mut pending: Vec<(Vec<(usize, f64)>, Vec<f64>, f64)> = Vec::new();

    for c in &p.constraints {
        if c.is_certain() || scale == 0.0 {
            pending.push((Vec::new(), c.a.clone(), -c.constant));
            continue;
        }
        // w_k(x) = e_k + Σ_i Q[i][k] x_i
        let w_rows: Vec<(Vec<f64>, f64)> = (0..m)
            .map(|k| {
                let coeffs = (0..n)
                    .map(|i| c.q.as_ref().map_or(0.0, |qm| qm[i][k]))
                    .collect::<Vec<f64>>();
                (coeffs, c.e[k])
            })
            .collect();
        let mut norm_terms = Vec::new();
        match q {
            NormP::Inf => {
                let t = lp.add_var(0.0, f64::INFINITY, if with_objective { 0.0 } else { 1.0 });
                for (coeffs, off) in &w_rows {
                    for sign in [1.0, -1.0] {
                        let mut row: Vec<f64> = coeffs.iter().map(|v| sign * v).collect();
                        row.resize(lp.num_vars(), 0.0);
                        row[t] = -1.0;
                        lp.add_le(row, -sign * off);
                    }
                }
                norm_terms.push((t, scale));
            }
            NormP::One => {
                for (coeffs, off) in &w_rows {
                    let u = lp.add_var(0.0, f64::INFINITY, if with_objective { 0.0 } else { 1.0 });
                    for sign in [1.0, -1.0] {
                        let mut row: Vec<f64> = coeffs.iter().map(|v| sign * v).collect();
                        row.resize(lp.num_vars(), 0.0);
                        row[u] = -1.0;
                        lp.add_le(row, -sign * off);
                    }
                    norm_terms.push((u, scale));
                }
            }
            NormP::Two => {
                let t = lp.add_var(0.0, f64::INFINITY, if with_objective { 0.0 } else { 1.0 });
                soc.push(SocRow {
                    matrix: w_rows.iter().map(|(c, _)| c.clone()).collect(),
                    offset: w_rows.iter().map(|(_, o)| *o).collect(),
                    bound_var: t,
                });
                norm_terms.push((t, scale));
            }
        }
        pending.push((norm_terms, c.a.clone(), -c.constant));
    }

    let nv = lp.num_vars();
    for (terms, mut row, rhs) in pending {
        row.resize(nv, 0.0);
        for (var, coef) in terms {
            row[var] += coef;
        }
        lp.add_le(row, rhs);
    }
    for row in &mut soc {
        for r in &mut row.matrix {
            r.resize(nv, 0.0);
        }
    }
    Counterpart { lp, soc }
}

/// Robust counterpart of `p` over the scaled set `s`.
pub(crate) fn counterpart(
    p: &RobustProgram,
    s: &ScaledSet,
    with_objective: bool,
) -> Result<Counterpart> {
    p.check_dims()?;
    s.check()?;
    if s.dim() != p.m() {
        return Err(Error::dim("uncertainty set", p.m(), s.dim()));
    }
    match &s.base {
        UncertaintySet::Polytope(_) => Ok(vertex_counterpart(p, &s.vertices()?, with_objective)),
        UncertaintySet::NormBall {
            p: norm, radius, ..
        } => Ok(ball_counterpart(p, *norm, s.alpha * radius, with_objective)),
    }
}

fn feasibility_of(sol: &LpSolution, n: usize) -> Feasibility {
    match sol.status {
        LpStatus::Infeasible => Feasibility {
            feasible: false,
            witness_x: None,
        },
        LpStatus::Optimal => Feasibility {
            feasible: true,
            witness_x: Some(sol.x[..n].to_vec()),
        },
        LpStatus::Unbounded => Feasibility {
            feasible: true,
            witness_x: None,
        },
    }
}

/// Whether some `x ∈ X` satisfies every constraint for all `ξ ∈ s`.
pub fn robust_feasible_at(p: &RobustProgram, s: &ScaledSet) -> Result<Feasibility> {
    let cp = counterpart(p, s, false)?;
    Ok(feasibility_of(&cp.solve()?, p.n()))
}

/// Feasibility at `Ŝ(α, v)` given the precomputed base vertices.
fn feasible_scaled(
    p: &RobustProgram,
    base_vertices: &[Vec<f64>],
    alpha: f64,
    anchor: &[f64],
) -> Result<bool> {
    let pts = scale_points(base_vertices, alpha, anchor);
    Ok(p.feasible_at(&pts)?.is_some())
}

/// Largest α in `[0, 1]` keeping `Ŝ(α, v)` robustly feasible, or `None` when
/// even the singleton `{v}` is infeasible.
pub(crate) fn alpha_max(
    p: &RobustProgram,
    base_vertices: &[Vec<f64>],
    anchor: &[f64],
    tol: f64,
) -> Result<Option<f64>> {
    match bisect_max(
        |a| feasible_scaled(p, base_vertices, a, anchor),
        0.0,
        1.0,
        tol,
    ) {
        Ok(a) => Ok(Some(a)),
        Err(Error::NotEvenLo { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Joint LP over `(x, v)` at fixed α: vertices of `Ŝ(α, v)` are
/// `α w_k + (1-α) v`, so the rows are linear in both.
fn joint_lp(
    p: &RobustProgram,
    base: &Polytope,
    base_vertices: &[Vec<f64>],
    alpha: f64,
) -> LinearProgram {
    let n = p.n();
    let m = p.m();
    let mut lp = p.decision_lp(m);
    for (row, &d) in base.v.iter().zip(&base.d) {
        let mut coeffs = vec![0.0; n + m];
        coeffs[n..].copy_from_slice(row);
        lp.add_le(coeffs, d);
    }
    for c in &p.constraints {
        let count = if c.is_certain() {
            1
        } else {
            base_vertices.len()
        };
        for w in base_vertices.iter().take(count) {
            let mut coeffs = c.a.clone();
            coeffs.extend(c.e.iter().map(|e| (1.0 - alpha) * e));
            let rhs = -c.constant - alpha * c.e.iter().zip(w).map(|(e, wk)| e * wk).sum::<f64>();
            lp.add_le(coeffs, rhs);
        }
    }
    lp
}

fn joint_feasible(lp: &LinearProgram) -> Result<Option<Vec<f64>>> {
    let sol = solve_lp(lp)?;
    Ok((sol.status == LpStatus::Optimal).then_some(sol.x))
}

#[derive(Debug, Clone)]
pub(crate) struct AnchorEval {
    pub anchor: Vec<f64>,
    pub alpha: f64,
}

/// Candidate anchors for a polytope base, each with its `α_max`.
///
/// Candidates, in order: the Chebyshev center; when the program has no
/// cross terms, the witness anchor of the joint `(x, v)` LP at its optimal α
/// together with the per-coordinate extreme anchors of that LP; then (for
/// coordinate search) a per-axis grid sweep refined once around the best
/// point. The `score` closure ranks candidates with equal α.
pub(crate) fn anchor_candidates<F>(
    p: &RobustProgram,
    base: &Polytope,
    base_vertices: &[Vec<f64>],
    search: AnchorSearch,
    steps: usize,
    tol: f64,
    rank: Rank,
    score: F,
) -> Result<Vec<(AnchorEval, f64)>>
where
    F: Fn(&AnchorEval) -> Result<f64> + Sync,
{
    let m = p.m();
    let n = p.n();
    let mut fixed: Vec<Vec<f64>> = vec![chebyshev_center(base)?.center];

    if search == AnchorSearch::CoordinateSearch && !p.has_cross_terms() {
        let nominal = joint_feasible(&joint_lp(p, base, base_vertices, 0.0))?;
        if nominal.is_some() {
            let joint_alpha = bisect_max(
                |a| Ok(joint_feasible(&joint_lp(p, base, base_vertices, a))?.is_some()),
                0.0,
                1.0,
                tol,
            )?;
            let lp = joint_lp(p, base, base_vertices, joint_alpha);
            if let Some(z) = joint_feasible(&lp)? {
                fixed.push(z[n..].to_vec());
            }
            for k in 0..m {
                for sign in [1.0, -1.0] {
                    let mut lp = lp.clone();
                    lp.cost = vec![0.0; n + m];
                    lp.cost[n + k] = sign;
                    let sol = solve_lp(&lp)?;
                    if sol.status == LpStatus::Optimal {
                        fixed.push(sol.x[n..].to_vec());
                    }
                }
            }
            debug!("joint anchor LP: alpha {joint_alpha:.6}");
        }
    }

    let evaluate = |anchors: Vec<Vec<f64>>| -> Result<Vec<(AnchorEval, f64)>> {
        anchors
            .into_par_iter()
            .map(|v| -> Result<Option<(AnchorEval, f64)>> {
                if !base.contains(&v, crate::tol::ANCHOR) {
                    return Ok(None);
                }
                Ok(match alpha_max(p, base_vertices, &v, tol)? {
                    Some(alpha) => {
                        let ev = AnchorEval { anchor: v, alpha };
                        let s = score(&ev)?;
                        Some((ev, s))
                    }
                    None => None,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(|v| v.into_iter().flatten().collect())
    };

    let mut all = evaluate(fixed)?;

    if search == AnchorSearch::CoordinateSearch {
        let bbox = bounding_box(base)?;
        for refine in [false, true] {
            for k in 0..m {
                let Some(best) = select_best(&all, tol, rank) else {
                    break;
                };
                let current = all[best].0.anchor.clone();
                let (lo, hi) = bbox[k];
                let h = (hi - lo) / (steps - 1) as f64;
                let (a, b) = if refine {
                    ((current[k] - h).max(lo), (current[k] + h).min(hi))
                } else {
                    (lo, hi)
                };
                let grid: Vec<Vec<f64>> = (0..steps)
                    .map(|i| {
                        let mut v = current.clone();
                        v[k] = if i == steps - 1 {
                            b
                        } else {
                            a + (b - a) * i as f64 / (steps - 1) as f64
                        };
                        v
                    })
                    .collect();
                all.extend(evaluate(grid)?);
            }
        }
    }
    Ok(all)
}

/// Ordering used to pick the best anchor candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Rank {
    /// Largest α; among α within `tol` of the best, largest score.
    AlphaFirst,
    /// Largest score; ties (within `tol::CMP`) go to larger α.
    ScoreFirst,
}

/// Index of the best candidate under `rank`; remaining ties go to the
/// earliest candidate.
pub(crate) fn select_best(cands: &[(AnchorEval, f64)], tol: f64, rank: Rank) -> Option<usize> {
    const SCORE_TIE: f64 = crate::tol::CMP;
    let best_alpha = cands
        .iter()
        .map(|(e, _)| e.alpha)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<usize> = None;
    for (i, (e, s)) in cands.iter().enumerate() {
        if rank == Rank::AlphaFirst && e.alpha < best_alpha - tol {
            continue;
        }
        let Some(b) = best else {
            best = Some(i);
            continue;
        };
        let (be, bs) = (&cands[b].0, cands[b].1);
        let better = match rank {
            Rank::AlphaFirst => *s > bs,
            Rank::ScoreFirst => {
                *s > bs + SCORE_TIE || ((*s - bs).abs() <= SCORE_TIE && e.alpha > be.alpha + tol)
            }
        };
        if better {
            best = Some(i);
        }
    }
    best
}

/// Stage-1 synthesis over a polytope or norm-ball base set.
pub fn synthesize(
    p: &RobustProgram,
    s: &UncertaintySet,
    data: &SampleSet,
    cfg: &SynthesisConfig,
) -> Result<SynthesisResult> {
    cfg.check()?;
    validate_program(p, s)?;
    data.check_dim(p.m())?;

    match s {
        UncertaintySet::NormBall { .. } => {
            let pred = |a: f64| -> Result<bool> {
                let scaled = ScaledSet::new(s.clone(), a, None)?;
                Ok(robust_feasible_at(p, &scaled)?.feasible)
            };
            let alpha = match bisect_max(pred, 0.0, 1.0, cfg.alpha_tol) {
                Ok(a) => a,
                Err(Error::NotEvenLo { .. }) => return Err(Error::NominallyInfeasible),
                Err(e) => return Err(e),
            };
            let scaled = ScaledSet::new(s.clone(), alpha, None)?;
            finish(p, scaled, data, 1)
        }
        UncertaintySet::Polytope(base) => {
            let verts = enumerate_vertices(base)?;
            if verts.len() == 1 {
                let point = verts[0].clone();
                return match p.feasible_at(std::slice::from_ref(&point))? {
                    Some(_) => finish(p, ScaledSet::new(s.clone(), 1.0, Some(point))?, data, 1),
                    None => Err(Error::NominallyInfeasible),
                };
            }
            let score = |ev: &AnchorEval| -> Result<f64> {
                if cfg.gamma == 0.0 {
                    return Ok(0.0);
                }
                let scaled = ScaledSet::new(s.clone(), ev.alpha, Some(ev.anchor.clone()))?;
                Ok(coverage_count(&scaled, data) as f64)
            };
            let cands = anchor_candidates(
                p,
                base,
                &verts,
                cfg.anchor_search,
                cfg.anchor_grid_steps,
                cfg.alpha_tol,
                Rank::AlphaFirst,
                score,
            )?;
            let best = select_best(&cands, cfg.alpha_tol, Rank::AlphaFirst)
                .ok_or(Error::NominallyInfeasible)?;
            let (ev, _) = &cands[best];
            info!(
                "stage 1: alpha {:.6} at anchor {:?} ({} candidates)",
                ev.alpha,
                ev.anchor,
                cands.len()
            );
            let scaled = ScaledSet::new(s.clone(), ev.alpha, Some(ev.anchor.clone()))?;
            finish(p, scaled, data, cands.len())
        }
    }
}

fn finish(
    p: &RobustProgram,
    scaled: ScaledSet,
    data: &SampleSet,
    evaluated: usize,
) -> Result<SynthesisResult> {
    let check = robust_feasible_at(p, &scaled)?;
    let witness_x = match (check.feasible, check.witness_x) {
        (true, Some(x)) => x,
        _ => {
            return Err(Error::NumericalFailure(
                "synthesized set failed the robust feasibility re-check".into(),
            ))
        }
    };
    let rhs = match &scaled.base {
        UncertaintySet::Polytope(_) => crate::geometry::homothety_rhs(&scaled)?,
        UncertaintySet::NormBall { .. } => Vec::new(),
    };
    Ok(SynthesisResult {
        covered: coverage_count(&scaled, data),
        alpha_star: scaled.alpha,
        witness_x,
        rhs,
        scaled,
        anchors_evaluated: evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BiAffineConstraint, DecisionSet};

    fn motivating() -> (RobustProgram, UncertaintySet) {
        let p = RobustProgram {
            objective: vec![1.0],
            constraints: vec![BiAffineConstraint::new(vec![1.0], vec![1.0], -5.0)],
            decision_set: DecisionSet::boxed(&[1.0], &[2.0]),
            uncertainty_dim: 1,
        };
        (p, UncertaintySet::Polytope(Polytope::interval(3.0, 5.0)))
    }

    #[test]
    fn robust_feasibility_on_motivating_sets() {
        let (p, s) = motivating();
        let small = ScaledSet::new(s.clone(), 0.5, Some(vec![3.0])).unwrap();
        let f = robust_feasible_at(&p, &small).unwrap();
        assert!(f.feasible);
        assert!((f.witness_x.unwrap()[0] - 1.0).abs() < 1e-9);
        let full = ScaledSet::new(s, 1.0, Some(vec![3.0])).unwrap();
        assert!(!robust_feasible_at(&p, &full).unwrap().feasible);
    }

    #[test]
    fn motivating_synthesis() {
        let (p, s) = motivating();
        let data = SampleSet::new(vec![vec![3.2], vec![3.7], vec![4.4]], None, "hand");
        let r = synthesize(&p, &s, &data, &SynthesisConfig::default()).unwrap();
        assert!((r.alpha_star - 0.5).abs() < 1e-5);
        assert!((r.rhs[0] - 4.0).abs() < 1e-5 && (r.rhs[1] + 3.0).abs() < 1e-5);
        assert_eq!(r.covered, 2);
    }

    #[test]
    fn fixed_center_anchor() {
        let (p, s) = motivating();
        let cfg = SynthesisConfig {
            anchor_search: AnchorSearch::FixedCenter,
            ..Default::default()
        };
        let r = synthesize(&p, &s, &SampleSet::default(), &cfg).unwrap();
        // centered at 4 the set can not grow at all
        assert!(r.alpha_star.abs() < 1e-5);
        assert_eq!(r.scaled.anchor, Some(vec![4.0]));
    }

    #[test]
    fn nominally_infeasible() {
        let (mut p, s) = motivating();
        p.constraints[0].constant = -3.0; // x + ξ <= 3 with x >= 1, ξ >= 3
        let r = synthesize(&p, &s, &SampleSet::default(), &SynthesisConfig::default());
        assert_eq!(r, Err(Error::NominallyInfeasible));
    }

    #[test]
    fn singleton_set() {
        let (p, _) = motivating();
        let s = UncertaintySet::Polytope(Polytope::interval(3.5, 3.5));
        let r = synthesize(&p, &s, &SampleSet::default(), &SynthesisConfig::default()).unwrap();
        assert_eq!(r.alpha_star, 1.0);
        let s = UncertaintySet::Polytope(Polytope::interval(4.5, 4.5));
        assert_eq!(
            synthesize(&p, &s, &SampleSet::default(), &SynthesisConfig::default()),
            Err(Error::NominallyInfeasible)
        );
    }

    fn ball_program(m: usize) -> RobustProgram {
        // x + Σ ξ_k <= 1, x in [0, 1], minimize -x
        RobustProgram {
            objective: vec![-1.0],
            constraints: vec![BiAffineConstraint::new(vec![1.0], vec![1.0; m], -1.0)],
            decision_set: DecisionSet::boxed(&[0.0], &[1.0]),
            uncertainty_dim: m,
        }
    }

    #[test]
    fn norm_ball_synthesis_all_norms() {
        // With x = 0 the constraint needs α r ‖1‖_q <= 1 and r = 2, m = 2:
        // p = ∞ → q = 1 → α = 1/4; p = 2 → α = 1/(2√2); p = 1 → q = ∞ → α = 1/2.
        let p = ball_program(2);
        for (norm, expect) in [
            (NormP::Inf, 0.25),
            (NormP::Two, 1.0 / (2.0 * 2f64.sqrt())),
            (NormP::One, 0.5),
        ] {
            let s = UncertaintySet::NormBall {
                p: norm,
                radius: 2.0,
                dim: 2,
            };
            let r = synthesize(&p, &s, &SampleSet::default(), &SynthesisConfig::default()).unwrap();
            assert!(
                (r.alpha_star - expect).abs() < 1e-5,
                "{norm}: {}",
                r.alpha_star
            );
        }
    }

    #[test]
    fn cross_term_ball() {
        // x + ξ x <= 0.5 with x in [1, 2]: worst case x (1 + α r) <= 0.5 is
        // infeasible even at α = 0.
        let mut p = ball_program(1);
        p.constraints =
            vec![BiAffineConstraint::new(vec![1.0], vec![0.0], -0.5).with_cross(vec![vec![1.0]])];
        p.decision_set = DecisionSet::boxed(&[1.0], &[2.0]);
        let s = UncertaintySet::NormBall {
            p: NormP::Two,
            radius: 1.0,
            dim: 1,
        };
        assert_eq!(
            synthesize(&p, &s, &SampleSet::default(), &SynthesisConfig::default()),
            Err(Error::NominallyInfeasible)
        );
        // x (1 + ξ) <= 1.5 at x = 1: α r <= 0.5
        p.constraints[0].constant = -1.5;
        let r = synthesize(&p, &s, &SampleSet::default(), &SynthesisConfig::default()).unwrap();
        assert!((r.alpha_star - 0.5).abs() < 1e-5);
    }
}
