//! Dense two-phase primal simplex.
//!
//! Problems are converted to standard form `min c'z, M z = r, z >= 0, r >= 0`
//! after shifting/splitting variables by their bounds and equilibrating every
//! row to unit max-coefficient. Pivoting uses Dantzig's rule with a
//! largest-pivot ratio tie-break, switching permanently to Bland's rule after a
//! run of degenerate pivots. All choices are deterministic.

use super::lp::{LinearProgram, LpSolution, LpStatus};
use crate::error::{Error, Result};
use crate::tol;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const DEGENERATE_SWITCH: usize = 25;

#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// x = lo + z
    Shift { col: usize, lo: f64 },
    /// x = hi - z
    Negate { col: usize, hi: f64 },
    /// x = z+ - z-
    Split { pos: usize, neg: usize },
}

struct Standard {
    /// Row-major tableau including the rhs as last column.
    t: Vec<f64>,
    rows: usize,
    cols: usize,
    cost: Vec<f64>,
    artificial: Vec<bool>,
    basis: Vec<usize>,
    /// Column that formed the initial identity basis of each row.
    init_col: Vec<usize>,
    /// Multiplier taking an original row to its standard-form row, or None
    /// for internally generated bound rows.
    row_origin: Vec<Option<(RowRef, f64)>>,
}

#[derive(Debug, Clone, Copy)]
enum RowRef {
    Ineq(usize),
    Eq(usize),
}

impl Standard {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.t[r * (self.cols + 1) + self.cols]
    }

    fn pivot(&mut self, obj: &mut [f64], pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.t[pr * w + pc];
        {
            let row = &mut self.t[pr * w..(pr + 1) * w];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[pc] = 1.0;
        }
        let pivot_row: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f != 0.0 {
                let row = &mut self.t[r * w..(r + 1) * w];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[pc] = 0.0;
                let rhs = &mut row[w - 1];
                if *rhs < 0.0 && *rhs > -1e-11 {
                    *rhs = 0.0;
                }
            }
        }
        let f = obj[pc];
        if f != 0.0 {
            for (v, pv) in obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            obj[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut obj = vec![0.0; self.cols + 1];
        obj[..self.cols].copy_from_slice(cost);
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for c in 0..=self.cols {
                    obj[c] -= cb * self.at(r, c);
                }
            }
        }
        obj
    }

    /// Runs simplex iterations on `obj`. Returns `Ok(true)` at optimality and
    /// `Ok(false)` when the problem is unbounded along some column.
    fn iterate(
        &mut self,
        obj: &mut [f64],
        allow_artificial: bool,
        iters: &mut usize,
        max_iters: usize,
    ) -> Result<bool> {
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            if *iters >= max_iters {
                return Err(Error::NumericalFailure(format!(
                    "simplex exceeded {max_iters} iterations"
                )));
            }
            let candidates = (0..self.cols).filter(|&c| allow_artificial || !self.artificial[c]);
            let entering = if bland {
                candidates.into_iter().find(|&c| obj[c] < -COST_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for c in candidates {
                    if obj[c] < -COST_TOL && best.is_none_or(|(_, v)| obj[c] < v) {
                        best = Some((c, obj[c]));
                    }
                }
                best.map(|(c, _)| c)
            };
            let Some(q) = entering else {
                return Ok(true);
            };

            let mut min_ratio = f64::INFINITY;
            for r in 0..self.rows {
                let a = self.at(r, q);
                if a > PIVOT_TOL {
                    min_ratio = min_ratio.min(self.rhs(r).max(0.0) / a);
                }
            }
            if !min_ratio.is_finite() {
                return Ok(false);
            }
            let slack = 1e-12 * (1.0 + min_ratio);
            let mut leave: Option<usize> = None;
            for r in 0..self.rows {
                let a = self.at(r, q);
                if a > PIVOT_TOL && self.rhs(r).max(0.0) / a <= min_ratio + slack {
                    leave = Some(match leave {
                        None => r,
                        Some(prev) => {
                            let better = if bland {
                                self.basis[r] < self.basis[prev]
                            } else {
                                a > self.at(prev, q)
                            };
                            if better {
                                r
                            } else {
                                prev
                            }
                        }
                    });
                }
            }
            let pr = leave.expect("ratio test found a row");
            if min_ratio <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > DEGENERATE_SWITCH {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(obj, pr, q);
            *iters += 1;
        }
    }
}

pub(crate) fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.check_dims()?;
    let n = lp.num_vars();

    // Variable substitution.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &lp.bounds {
        if lo > hi + tol::LP_FEAS {
            return Ok(LpSolution::infeasible(lp));
        }
        if lo.is_finite() {
            maps.push(VarMap::Shift { col: ncols, lo });
            if hi.is_finite() {
                bound_rows.push((ncols, (hi - lo).max(0.0)));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Negate { col: ncols, hi });
            ncols += 1;
        } else {
            maps.push(VarMap::Split {
                pos: ncols,
                neg: ncols + 1,
            });
            ncols += 2;
        }
    }

    let mut std_cost = vec![0.0; ncols];
    for (j, m) in maps.iter().enumerate() {
        let c = lp.cost[j];
        match *m {
            VarMap::Shift { col, .. } => std_cost[col] += c,
            VarMap::Negate { col, .. } => std_cost[col] -= c,
            VarMap::Split { pos, neg } => {
                std_cost[pos] += c;
                std_cost[neg] -= c;
            }
        }
    }

    // Transformed rows: (coeffs over z, rhs, is_equality, origin)
    struct TRow {
        coeffs: Vec<f64>,
        rhs: f64,
        eq: bool,
        origin: Option<RowRef>,
    }
    let transform = |coeffs: &[f64], rhs: f64| -> (Vec<f64>, f64) {
        let mut z = vec![0.0; ncols];
        let mut r = rhs;
        for (j, &a) in coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, lo } => {
                    z[col] += a;
                    r -= a * lo;
                }
                VarMap::Negate { col, hi } => {
                    z[col] -= a;
                    r -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    z[pos] += a;
                    z[neg] -= a;
                }
            }
        }
        (z, r)
    };

    let mut trows: Vec<TRow> = Vec::new();
    for (i, row) in lp.ineq.iter().enumerate() {
        let (coeffs, rhs) = transform(&row.coeffs, row.rhs);
        trows.push(TRow {
            coeffs,
            rhs,
            eq: false,
            origin: Some(RowRef::Ineq(i)),
        });
    }
    for (i, row) in lp.eq.iter().enumerate() {
        let (coeffs, rhs) = transform(&row.coeffs, row.rhs);
        trows.push(TRow {
            coeffs,
            rhs,
            eq: true,
            origin: Some(RowRef::Eq(i)),
        });
    }
    for &(col, ub) in &bound_rows {
        let mut coeffs = vec![0.0; ncols];
        coeffs[col] = 1.0;
        trows.push(TRow {
            coeffs,
            rhs: ub,
            eq: false,
            origin: None,
        });
    }

    // Equilibrate, drop empty rows, decide sign flips.
    let mut kept: Vec<(TRow, f64)> = Vec::new();
    for row in trows {
        let scale = row.coeffs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if scale == 0.0 {
            let ok = if row.eq {
                row.rhs.abs() <= tol::LP_FEAS
            } else {
                row.rhs >= -tol::LP_FEAS
            };
            if !ok {
                return Ok(LpSolution::infeasible(lp));
            }
            continue;
        }
        let inv = 1.0 / scale;
        let coeffs = row.coeffs.iter().map(|v| v * inv).collect();
        kept.push((
            TRow {
                coeffs,
                rhs: row.rhs * inv,
                eq: row.eq,
                origin: row.origin,
            },
            inv,
        ));
    }

    let m = kept.len();
    let n_slack = kept.iter().filter(|(r, _)| !r.eq).count();
    let n_art = kept.iter().filter(|(r, _)| r.eq || r.rhs < 0.0).count();
    let cols = ncols + n_slack + n_art;
    let w = cols + 1;
    let mut st = Standard {
        t: vec![0.0; m * w],
        rows: m,
        cols,
        cost: vec![0.0; cols],
        artificial: vec![false; cols],
        basis: vec![0; m],
        init_col: vec![0; m],
        row_origin: Vec::with_capacity(m),
    };
    st.cost[..ncols].copy_from_slice(&std_cost);
    let mut next_slack = ncols;
    let mut next_art = ncols + n_slack;
    for (r, (row, inv)) in kept.iter().enumerate() {
        let sign = if row.rhs < 0.0 { -1.0 } else { 1.0 };
        let base = r * w;
        for (c, &a) in row.coeffs.iter().enumerate() {
            st.t[base + c] = sign * a;
        }
        st.t[base + cols] = sign * row.rhs;
        let mut ident = None;
        if !row.eq {
            st.t[base + next_slack] = sign;
            if sign > 0.0 {
                ident = Some(next_slack);
            }
            next_slack += 1;
        }
        let ident = match ident {
            Some(c) => c,
            None => {
                let c = next_art;
                next_art += 1;
                st.t[base + c] = 1.0;
                st.artificial[c] = true;
                c
            }
        };
        st.basis[r] = ident;
        st.init_col[r] = ident;
        st.row_origin.push(row.origin.map(|o| (o, sign * inv)));
    }

    let max_iters = 50 * (m + cols) + 1000;
    let mut iters = 0usize;
    let mut phase1_residue = 0.0;

    // Phase 1.
    if n_art > 0 {
        let phase1_cost: Vec<f64> = st
            .artificial
            .iter()
            .map(|&a| if a { 1.0 } else { 0.0 })
            .collect();
        let mut obj = st.reduced_costs(&phase1_cost);
        st.iterate(&mut obj, true, &mut iters, max_iters)?;
        let infeas: f64 = (0..m)
            .filter(|&r| st.artificial[st.basis[r]])
            .map(|r| st.rhs(r).max(0.0))
            .sum();
        if infeas > tol::LP_FEAS {
            return Ok(LpSolution::infeasible(lp).with_iterations(iters));
        }
        phase1_residue = infeas;
        // Drive remaining artificials out of the basis.
        for r in 0..m {
            if !st.artificial[st.basis[r]] {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for c in 0..cols {
                if st.artificial[c] {
                    continue;
                }
                let a = st.at(r, c).abs();
                if a > PIVOT_TOL && best.is_none_or(|(_, v)| a > v) {
                    best = Some((c, a));
                }
            }
            match best {
                Some((c, _)) => {
                    let mut dummy = vec![0.0; cols + 1];
                    st.pivot(&mut dummy, r, c);
                }
                None => {
                    // Redundant row: keep the artificial basic at zero level.
                    for c in 0..cols {
                        if !st.artificial[c] {
                            st.t[r * w + c] = 0.0;
                        }
                    }
                    st.t[r * w + cols] = 0.0;
                }
            }
        }
    }

    // Phase 2.
    let cost = st.cost.clone();
    let mut obj = st.reduced_costs(&cost);
    let bounded = st.iterate(&mut obj, false, &mut iters, max_iters)?;
    if !bounded {
        return Ok(LpSolution::unbounded(lp).with_iterations(iters));
    }

    let mut z = vec![0.0; cols];
    for r in 0..m {
        z[st.basis[r]] = st.rhs(r).max(0.0);
    }
    let mut x = vec![0.0; n];
    for (j, map) in maps.iter().enumerate() {
        x[j] = match *map {
            VarMap::Shift { col, lo } => lo + z[col],
            VarMap::Negate { col, hi } => hi - z[col],
            VarMap::Split { pos, neg } => z[pos] - z[neg],
        };
        let (lo, hi) = lp.bounds[j];
        x[j] = x[j].clamp(lo, hi);
    }

    let mut duals_ineq = vec![0.0; lp.ineq.len()];
    let mut duals_eq = vec![0.0; lp.eq.len()];
    for r in 0..m {
        let Some((origin, mult)) = st.row_origin[r] else {
            continue;
        };
        let ic = st.init_col[r];
        let y_std: f64 = (0..m).map(|k| cost[st.basis[k]] * st.at(k, ic)).sum();
        let y = y_std * mult;
        match origin {
            RowRef::Ineq(i) => duals_ineq[i] = y,
            RowRef::Eq(i) => duals_eq[i] = y,
        }
    }

    let sol = LpSolution {
        status: LpStatus::Optimal,
        objective: crate::linalg::dot(&lp.cost, &x),
        x,
        duals_ineq,
        duals_eq,
        iterations: iters,
    };
    let worst = lp.max_residual(&sol.x);
    if worst > 1e-6 && phase1_residue > 0.0 {
        // feasible only within the phase-1 tolerance
        return Ok(LpSolution::infeasible(lp).with_iterations(iters));
    }
    if worst > 1e-6 {
        return Err(Error::NumericalFailure(format!(
            "primal residual {worst:.3e} after {iters} pivots"
        )));
    }
    Ok(sol)
}
