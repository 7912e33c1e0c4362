//! Stage 2: solve the robust counterpart over a fixed scaled set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ScaledSet;
use crate::linalg::{dot, norm2};
use crate::model::{NormP, RobustProgram, UncertaintySet};
use crate::solver::LpStatus;
use crate::stage1::counterpart;

/// Slack below which a robust row is reported as binding.
pub const BINDING_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    pub constraint: usize,
    pub xi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub x_opt: Vec<f64>,
    pub objective: f64,
    pub binding: Vec<Binding>,
    /// Maximizing `ξ` of each constraint at `x_opt`.
    pub worst_case_xi: Vec<Vec<f64>>,
    /// `max_ξ f_j(x_opt, ξ)` for each constraint.
    pub worst_case_value: Vec<f64>,
}

/// Minimizes the objective subject to every constraint holding for all
/// `ξ ∈ s`.
pub fn solve_robust(p: &RobustProgram, s: &ScaledSet) -> Result<SolveReport> {
    let cp = counterpart(p, s, true)?;
    let sol = cp.solve()?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Unbounded => return Err(Error::UnboundedObjective),
        LpStatus::Infeasible => {
            return Err(Error::Infeasible {
                constraint: first_failing(p, s)?,
            })
        }
    }
    let n = p.n();
    let x = sol.x[..n].to_vec();
    let points = match &s.base {
        UncertaintySet::Polytope(_) => s.vertices()?,
        UncertaintySet::NormBall { .. } => Vec::new(),
    };

    let mut worst_case_xi = Vec::with_capacity(p.constraints.len());
    let mut worst_case_value = Vec::with_capacity(p.constraints.len());
    let mut binding = Vec::new();
    for (j, c) in p.constraints.iter().enumerate() {
        let xi = match &s.base {
            UncertaintySet::Polytope(_) => {
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for (k, pt) in points.iter().enumerate() {
                    let v = c.eval(&x, pt)?;
                    if v > best_val {
                        best_val = v;
                        best = k;
                    }
                }
                let tol = BINDING_TOL * (1.0 + c.a.iter().fold(0.0f64, |a, v| a.max(v.abs())));
                let rows: Vec<usize> = if c.is_certain() {
                    vec![best]
                } else {
                    (0..points.len()).collect()
                };
                for k in rows {
                    if c.eval(&x, &points[k])? >= -tol {
                        binding.push(Binding {
                            constraint: j,
                            xi: points[k].clone(),
                        });
                    }
                }
                points[best].clone()
            }
            UncertaintySet::NormBall {
                p: norm, radius, ..
            } => {
                let xi = ball_maximizer(*norm, s.alpha * radius, &c.xi_coeff(&x));
                let tol = BINDING_TOL * (1.0 + c.a.iter().fold(0.0f64, |a, v| a.max(v.abs())));
                if c.eval(&x, &xi)? >= -tol {
                    binding.push(Binding {
                        constraint: j,
                        xi: xi.clone(),
                    });
                }
                xi
            }
        };
        worst_case_value.push(c.eval(&x, &xi)?);
        worst_case_xi.push(xi);
    }

    Ok(SolveReport {
        objective: dot(&p.objective, &x) + 0.0,
        x_opt: x,
        binding,
        worst_case_xi,
        worst_case_value,
    })
}

/// Maximizer of `⟨w, ξ⟩` over `‖ξ‖_p <= radius`.
pub fn ball_maximizer(norm: NormP, radius: f64, w: &[f64]) -> Vec<f64> {
    let sign = |v: f64| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    match norm {
        NormP::Two => {
            let nw = norm2(w);
            if nw == 0.0 {
                vec![0.0; w.len()]
            } else {
                w.iter().map(|v| radius * v / nw).collect()
            }
        }
        NormP::Inf => w.iter().map(|&v| radius * sign(v)).collect(),
        NormP::One => {
            let mut xi = vec![0.0; w.len()];
            if let Some((k, &v)) = w
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
            {
                xi[k] = radius * sign(v);
            }
            xi
        }
    }
}

/// First constraint whose addition makes the counterpart infeasible.
fn first_failing(p: &RobustProgram, s: &ScaledSet) -> Result<Option<usize>> {
    let mut partial = p.clone();
    partial.constraints.clear();
    for (j, c) in p.constraints.iter().enumerate() {
        partial.constraints.push(c.clone());
        if counterpart(&partial, s, false)?.solve()?.status == LpStatus::Infeasible {
            return Ok(Some(j));
        }
    }
    Ok(None)
}
