use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

/// `min cost·x` subject to `ineq` rows (`a·x <= rhs`), `eq` rows
/// (`a·x = rhs`) and per-variable bounds. Infinite bounds mark free sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub ineq: Vec<Row>,
    pub eq: Vec<Row>,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solution of a [`LinearProgram`].
///
/// Duals are sensitivities of the optimal value with respect to each row's
/// right-hand side, so inequality duals are non-positive at optimality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals_ineq: Vec<f64>,
    pub duals_eq: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub(crate) fn infeasible(lp: &LinearProgram) -> Self {
        Self::empty(lp, LpStatus::Infeasible, f64::INFINITY)
    }

    pub(crate) fn unbounded(lp: &LinearProgram) -> Self {
        Self::empty(lp, LpStatus::Unbounded, f64::NEG_INFINITY)
    }

    fn empty(lp: &LinearProgram, status: LpStatus, objective: f64) -> Self {
        Self {
            status,
            x: vec![f64::NAN; lp.num_vars()],
            objective,
            duals_ineq: vec![],
            duals_eq: vec![],
            iterations: 0,
        }
    }

    pub(crate) fn with_iterations(mut self, iters: usize) -> Self {
        self.iterations = iters;
        self
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

impl LinearProgram {
    /// A program over `n` free variables with zero cost and no rows.
    pub fn new(n: usize) -> Self {
        Self {
            cost: vec![0.0; n],
            ineq: Vec::new(),
            eq: Vec::new(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    /// Appends a variable and returns its index. Existing rows are padded.
    pub fn add_var(&mut self, lo: f64, hi: f64, cost: f64) -> usize {
        self.cost.push(cost);
        self.bounds.push((lo, hi));
        for row in self.ineq.iter_mut().chain(self.eq.iter_mut()) {
            row.coeffs.push(0.0);
        }
        self.cost.len() - 1
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.bounds[j] = (lo, hi);
    }

    pub fn set_nonneg(&mut self, vars: std::ops::Range<usize>) {
        for j in vars {
            self.bounds[j] = (0.0, f64::INFINITY);
        }
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) -> usize {
        self.ineq.push(Row { coeffs, rhs });
        self.ineq.len() - 1
    }

    pub fn add_ge(&mut self, coeffs: Vec<f64>, rhs: f64) -> usize {
        self.add_le(coeffs.into_iter().map(|v| -v).collect(), -rhs)
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) -> usize {
        self.eq.push(Row { coeffs, rhs });
        self.eq.len() - 1
    }

    /// Sparse convenience for `add_le`.
    pub fn add_le_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) -> usize {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, v) in terms {
            coeffs[j] += v;
        }
        self.add_le(coeffs, rhs)
    }

    pub fn add_eq_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) -> usize {
        let mut coeffs = vec![0.0; self.num_vars()];
        for &(j, v) in terms {
            coeffs[j] += v;
        }
        self.add_eq(coeffs, rhs)
    }

    pub(crate) fn check_dims(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::dim("LP bounds", n, self.bounds.len()));
        }
        for row in self.ineq.iter().chain(&self.eq) {
            if row.coeffs.len() != n {
                return Err(Error::dim("LP row", n, row.coeffs.len()));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("non-finite LP data".into()));
            }
        }
        Ok(())
    }

    /// Largest row-scaled constraint violation of `x` (bounds included).
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        let scaled = |row: &Row| {
            let s = row.coeffs.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            (dot(&row.coeffs, x) - row.rhs) / s
        };
        let ineq = self.ineq.iter().map(|r| scaled(r).max(0.0));
        let eq = self.eq.iter().map(|r| scaled(r).abs());
        let bnd = self
            .bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(0.0));
        ineq.chain(eq).chain(bnd).fold(0.0, f64::max)
    }

    /// Dual objective implied by row duals `(y_ineq, y_eq)`: `bᵀy` plus the
    /// bound contributions of the reduced costs. Equals the primal optimum
    /// at an optimal basis.
    pub fn dual_objective(&self, y_ineq: &[f64], y_eq: &[f64]) -> f64 {
        let n = self.num_vars();
        let mut reduced = self.cost.clone();
        let mut val = 0.0;
        for (row, &y) in self.ineq.iter().zip(y_ineq).chain(self.eq.iter().zip(y_eq)) {
            val += y * row.rhs;
            for j in 0..n {
                reduced[j] -= y * row.coeffs[j];
            }
        }
        for (j, &r) in reduced.iter().enumerate() {
            let (lo, hi) = self.bounds[j];
            if r > 0.0 {
                val += r * lo;
            } else if r < 0.0 {
                val += r * hi;
            }
        }
        val
    }
}

/// Solves `lp` with the embedded dense simplex.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    super::simplex::solve(lp)
}
