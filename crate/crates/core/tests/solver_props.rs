use aro_core::solver::{
    bisect_max, cutting_plane_norm2, solve_lp, CuttingPlaneOptions, LinearProgram, LpStatus, SocRow,
};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = f64> {
    (-20i32..=20).prop_map(|k| k as f64 / 4.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Boxed LPs are always bounded; a point inside the rows keeps them feasible.
    #[test]
    fn strong_duality(
        n in 1usize..5,
        rows in prop::collection::vec(prop::collection::vec(coeff(), 5), 1..6),
        eq_row in prop::option::of(prop::collection::vec(coeff(), 5)),
        cost in prop::collection::vec(coeff(), 5),
        slack in prop::collection::vec(0.0f64..3.0, 6),
    ) {
        let mut lp = LinearProgram::new(n);
        lp.cost = cost[..n].to_vec();
        for j in 0..n {
            lp.set_bounds(j, -2.0, 3.0);
        }
        let anchor = vec![0.5; n];
        for (r, s) in rows.iter().zip(&slack) {
            let a = r[..n].to_vec();
            let at: f64 = a.iter().zip(&anchor).map(|(x, y)| x * y).sum();
            lp.add_le(a, at + s);
        }
        if let Some(r) = eq_row {
            let a = r[..n].to_vec();
            let at: f64 = a.iter().zip(&anchor).map(|(x, y)| x * y).sum();
            lp.add_eq(a, at);
        }
        let sol = solve_lp(&lp).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        prop_assert!(lp.max_residual(&sol.x) <= 1e-7);
        let dual = lp.dual_objective(&sol.duals_ineq, &sol.duals_eq);
        prop_assert!((dual - sol.objective).abs() <= 1e-6 * (1.0 + sol.objective.abs()),
            "primal {} dual {}", sol.objective, dual);
        prop_assert!(sol.duals_ineq.iter().all(|y| *y <= 1e-9));
    }

    #[test]
    fn bisection_brackets_threshold(t in 0.0f64..1.0, tol in 1e-7f64..1e-2) {
        let a = bisect_max(|x| Ok(x <= t), 0.0, 1.0, tol).unwrap();
        prop_assert!(a <= t);
        prop_assert!(a + 2.0 * tol > t);
    }

    /// min -⟨c, z⟩ s.t. ‖z‖₂ <= t <= 1 has optimum -‖c‖₂.
    #[test]
    fn cutting_plane_trace_is_monotone(c in prop::collection::vec(-0.6f64..0.6, 2..4)) {
        let m = c.len();
        let mut lp = LinearProgram::new(m + 1);
        for (j, cj) in c.iter().enumerate() {
            lp.cost[j] = -cj;
        }
        lp.set_bounds(m, 0.0, 1.0);
        let matrix: Vec<Vec<f64>> = (0..m).map(|k| {
            let mut r = vec![0.0; m + 1];
            r[k] = 1.0;
            r
        }).collect();
        let soc = [SocRow { matrix, offset: vec![0.0; m], bound_var: m }];
        let out = cutting_plane_norm2(&lp, &soc, CuttingPlaneOptions::default()).unwrap();
        for w in out.objective_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9);
        }
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((out.solution.objective + norm).abs() <= 1e-5);
    }
}
