//! Kelley cutting planes for Euclidean-norm rows `‖M z + o‖₂ <= z[t]`.

use serde::{Deserialize, Serialize};

use super::lp::{solve_lp, LinearProgram, LpSolution, LpStatus};
use crate::error::{Error, Result};
use crate::linalg::{dot, mat_vec, norm2};

/// One second-order-cone row `‖matrix·z + offset‖₂ <= z[bound_var]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocRow {
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
    pub bound_var: usize,
}

impl SocRow {
    /// Signed violation `‖M z + o‖₂ - z[t]` and the vector `M z + o`.
    pub fn violation(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let mut w = mat_vec(&self.matrix, z);
        for (wi, oi) in w.iter_mut().zip(&self.offset) {
            *wi += oi;
        }
        (norm2(&w) - z[self.bound_var], w)
    }

    /// The linear cut `⟨u, M z + o⟩ <= z[t]` as `(coeffs, rhs)`.
    fn cut(&self, u: &[f64], nvars: usize) -> (Vec<f64>, f64) {
        let mut coeffs = vec![0.0; nvars];
        for (row, &ui) in self.matrix.iter().zip(u) {
            for (c, &a) in coeffs.iter_mut().zip(row) {
                *c += ui * a;
            }
        }
        coeffs[self.bound_var] -= 1.0;
        (coeffs, -dot(u, &self.offset))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CuttingPlaneOptions {
    pub max_cuts: usize,
    pub tol: f64,
}

impl Default for CuttingPlaneOptions {
    fn default() -> Self {
        Self {
            max_cuts: 500,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CuttingPlaneSolution {
    pub solution: LpSolution,
    /// Cuts added beyond the initial axis-aligned outer box.
    pub cuts: usize,
    /// Relaxation objective after every LP solve.
    pub objective_trace: Vec<f64>,
    pub max_violation: f64,
}

/// Solves `lp` with the extra cone rows `soc` by successive linearization.
///
/// The relaxation starts from the axis cuts `±(M z + o)_k <= t`, then adds
/// the supporting hyperplane at `u = w/‖w‖₂` for every row violated by more
/// than `opts.tol`.
pub fn cutting_plane_norm2(
    lp: &LinearProgram,
    soc: &[SocRow],
    opts: CuttingPlaneOptions,
) -> Result<CuttingPlaneSolution> {
    let n = lp.num_vars();
    for row in soc {
        if row.bound_var >= n {
            return Err(Error::dim("SOC bound variable", n, row.bound_var));
        }
        if row.offset.len() != row.matrix.len() {
            return Err(Error::dim("SOC offset", row.matrix.len(), row.offset.len()));
        }
        if let Some(bad) = row.matrix.iter().find(|r| r.len() != n) {
            return Err(Error::dim("SOC matrix row", n, bad.len()));
        }
    }

    let mut relaxed = lp.clone();
    for row in soc {
        for k in 0..row.matrix.len() {
            for sign in [1.0, -1.0] {
                let mut u = vec![0.0; row.matrix.len()];
                u[k] = sign;
                let (c, r) = row.cut(&u, n);
                relaxed.add_le(c, r);
            }
        }
    }

    let mut cuts = 0usize;
    let mut trace = Vec::new();
    loop {
        let sol = solve_lp(&relaxed)?;
        if sol.status != LpStatus::Optimal {
            return Ok(CuttingPlaneSolution {
                solution: sol,
                cuts,
                objective_trace: trace,
                max_violation: f64::NAN,
            });
        }
        trace.push(sol.objective);
        let mut worst = 0.0f64;
        let mut new_cuts = Vec::new();
        for row in soc {
            let (viol, w) = row.violation(&sol.x);
            worst = worst.max(viol);
            if viol > opts.tol {
                let nw = norm2(&w);
                let u: Vec<f64> = w.iter().map(|v| v / nw).collect();
                new_cuts.push(row.cut(&u, n));
            }
        }
        if new_cuts.is_empty() {
            return Ok(CuttingPlaneSolution {
                solution: sol,
                cuts,
                objective_trace: trace,
                max_violation: worst,
            });
        }
        if cuts + new_cuts.len() > opts.max_cuts {
            return Err(Error::IterationLimit {
                cuts,
                violation: worst,
            });
        }
        cuts += new_cuts.len();
        for (c, r) in new_cuts {
            relaxed.add_le(c, r);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_coordinate() {
        // min λ s.t. ‖(1,0)·z‖ <= λ, z1 = 3; vars (z1, z2, λ)
        let mut lp = LinearProgram::new(3);
        lp.cost = vec![0.0, 0.0, 1.0];
        lp.add_eq(vec![1.0, 0.0, 0.0], 3.0);
        lp.set_bounds(1, -10.0, 10.0);
        let soc = SocRow {
            matrix: vec![vec![1.0, 0.0, 0.0]],
            offset: vec![0.0],
            bound_var: 2,
        };
        let out = cutting_plane_norm2(&lp, &[soc], CuttingPlaneOptions::default()).unwrap();
        assert!((out.solution.objective - 3.0).abs() <= 1e-6);
    }

    #[test]
    fn pythagorean() {
        let mut lp = LinearProgram::new(3);
        lp.cost = vec![0.0, 0.0, 1.0];
        lp.add_eq(vec![1.0, 0.0, 0.0], 3.0);
        lp.add_eq(vec![0.0, 1.0, 0.0], 4.0);
        let soc = SocRow {
            matrix: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            offset: vec![0.0, 0.0],
            bound_var: 2,
        };
        let out = cutting_plane_norm2(&lp, &[soc], CuttingPlaneOptions::default()).unwrap();
        assert!(
            (out.solution.objective - 5.0).abs() <= 1e-6,
            "{}",
            out.solution.objective
        );
        assert!(out.max_violation <= 1e-6);
        for pair in out.objective_trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-9);
        }
    }

    #[test]
    fn min_norm_point_on_line() {
        // min t s.t. ‖z‖ <= t, z1 + z2 = 2  → t = √2
        let mut lp = LinearProgram::new(3);
        lp.cost = vec![0.0, 0.0, 1.0];
        lp.add_eq(vec![1.0, 1.0, 0.0], 2.0);
        let soc = SocRow {
            matrix: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            offset: vec![0.0, 0.0],
            bound_var: 2,
        };
        let out = cutting_plane_norm2(&lp, &[soc], CuttingPlaneOptions::default()).unwrap();
        assert!((out.solution.objective - 2f64.sqrt()).abs() <= 1e-6);
    }

    #[test]
    fn iteration_limit() {
        let mut lp = LinearProgram::new(3);
        lp.cost = vec![0.0, 0.0, 1.0];
        lp.add_eq(vec![1.0, 0.0, 0.0], 3.0);
        lp.add_eq(vec![0.0, 1.0, 0.0], 4.0);
        let soc = SocRow {
            matrix: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            offset: vec![0.0, 0.0],
            bound_var: 2,
        };
        let opts = CuttingPlaneOptions {
            max_cuts: 0,
            tol: 1e-6,
        };
        assert!(matches!(
            cutting_plane_norm2(&lp, &[soc], opts),
            Err(Error::IterationLimit { .. })
        ));
    }
}
