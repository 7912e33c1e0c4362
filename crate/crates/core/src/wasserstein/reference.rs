//! The finite reformulations as single LPs over all of `(λ, s, θ, γ)`.
//!
//! These grow with `N · L · L_S` and exist to cross-check the decomposed
//! evaluators on small instances.

use super::{check_inputs, AmbiguitySpec, Mode};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::model::{NormP, Polytope};
use crate::solver::{
    cutting_plane_norm2, solve_lp, CuttingPlaneOptions, LinearProgram, LpStatus, SocRow,
};

/// Builds the full program. Variable 0 is `λ`, variables `1..=N` are `s`.
pub fn build(
    amb: &AmbiguitySpec,
    support: &Polytope,
    safe: &Polytope,
    mode: Mode,
) -> Result<(LinearProgram, Vec<SocRow>)> {
    let m = check_inputs(amb, support, safe)?;
    let n = amb.data.len();
    let ls = safe.num_rows();
    let lsup = support.num_rows();
    let mut lp = LinearProgram::new(0);
    let lambda = lp.add_var(0.0, f64::INFINITY, amb.epsilon);
    for _ in 0..n {
        lp.add_var(0.0, f64::INFINITY, 1.0 / n as f64);
    }
    // (multiplier variable, its ξ-space row with sign) blocks, one per norm row
    let mut norm_blocks: Vec<Vec<(usize, Vec<f64>)>> = Vec::new();
    for (i, xi) in amb.data.samples.iter().enumerate() {
        let sup_slack: Vec<f64> = support
            .v
            .iter()
            .zip(&support.d)
            .map(|(r, d)| d - dot(r, xi))
            .collect();
        let blocks: Vec<Option<usize>> = match mode {
            Mode::Best => vec![None],
            Mode::Worst => (0..ls).map(Some).collect(),
        };
        for face in blocks {
            let mut terms: Vec<(usize, f64)> = vec![(1 + i, -1.0)];
            let mut block = Vec::new();
            let theta_rows: Vec<usize> = match face {
                None => (0..ls).collect(),
                Some(l) => vec![l],
            };
            for l in theta_rows {
                let t = lp.add_var(0.0, f64::INFINITY, 0.0);
                let slack = safe.d[l] - dot(&safe.v[l], xi);
                match face {
                    None => {
                        terms.push((t, slack));
                        block.push((t, safe.v[l].clone()));
                    }
                    Some(_) => {
                        terms.push((t, -slack));
                        block.push((t, safe.v[l].clone()));
                    }
                }
            }
            for (k, sl) in sup_slack.iter().enumerate().take(lsup) {
                let g = lp.add_var(0.0, f64::INFINITY, 0.0);
                terms.push((g, *sl));
                let row = match face {
                    None => support.v[k].clone(),
                    Some(_) => support.v[k].iter().map(|v| -v).collect(),
                };
                block.push((g, row));
            }
            lp.add_le_sparse(&terms, -1.0);
            norm_blocks.push(block);
        }
    }

    let mut soc = Vec::new();
    let dual = amb.ground_norm.dual();
    let mut pending_rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for block in &norm_blocks {
        // w_c = Σ var * row[c]
        let w: Vec<Vec<(usize, f64)>> = (0..m)
            .map(|c| block.iter().map(|(v, row)| (*v, row[c])).collect())
            .collect();
        match dual {
            NormP::Inf => {
                for wc in &w {
                    for sign in [1.0, -1.0] {
                        let mut t: Vec<(usize, f64)> =
                            wc.iter().map(|&(v, a)| (v, sign * a)).collect();
                        t.push((lambda, -1.0));
                        pending_rows.push((t, 0.0));
                    }
                }
            }
            NormP::One => {
                let mut sum = vec![(lambda, -1.0)];
                for wc in &w {
                    let u = lp.add_var(0.0, f64::INFINITY, 0.0);
                    for sign in [1.0, -1.0] {
                        let mut t: Vec<(usize, f64)> =
                            wc.iter().map(|&(v, a)| (v, sign * a)).collect();
                        t.push((u, -1.0));
                        pending_rows.push((t, 0.0));
                    }
                    sum.push((u, 1.0));
                }
                pending_rows.push((sum, 0.0));
            }
            NormP::Two => {
                soc.push(w);
            }
        }
    }
    for (terms, rhs) in pending_rows {
        lp.add_le_sparse(&terms, rhs);
    }
    let nv = lp.num_vars();
    let soc = soc
        .into_iter()
        .map(|w| SocRow {
            matrix: w
                .into_iter()
                .map(|terms| {
                    let mut r = vec![0.0; nv];
                    for (v, a) in terms {
                        r[v] += a;
                    }
                    r
                })
                .collect(),
            offset: vec![0.0; m],
            bound_var: lambda,
        })
        .collect();
    Ok((lp, soc))
}

/// Optimal value of the full program (not clipped).
pub fn solve(amb: &AmbiguitySpec, support: &Polytope, safe: &Polytope, mode: Mode) -> Result<f64> {
    let (lp, soc) = build(amb, support, safe, mode)?;
    let sol = if soc.is_empty() {
        solve_lp(&lp)?
    } else {
        let opts = CuttingPlaneOptions {
            max_cuts: 5000,
            ..Default::default()
        };
        cutting_plane_norm2(&lp, &soc, opts)?.solution
    };
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        other => Err(Error::NumericalFailure(format!(
            "reference program returned {other:?}"
        ))),
    }
}
