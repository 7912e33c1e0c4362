use aro_core::geometry::{contains_base, coverage_count, enumerate_vertices, ScaledSet};
use aro_core::model::{
    eval_constraint, validate_program, BiAffineConstraint, DecisionSet, Polytope, RobustProgram,
    SampleSet, UncertaintySet,
};
use aro_core::solver::{solve_lp, LinearProgram, LpStatus};
use proptest::prelude::*;

/// A box with one extra cut through its interior.
fn polytope2() -> impl Strategy<Value = Polytope> {
    (
        -5.0f64..0.0,
        0.5f64..5.0,
        -5.0f64..0.0,
        0.5f64..5.0,
        prop::option::of((-1.0f64..1.0, -1.0f64..1.0, 0.1f64..3.0)),
    )
        .prop_map(|(x0, w, y0, h, cut)| {
            let mut p = Polytope::boxed(&[x0, y0], &[x0 + w, y0 + h]);
            if let Some((a, b, off)) = cut {
                if a.abs() + b.abs() > 1e-3 {
                    let cx = x0 + w / 2.0;
                    let cy = y0 + h / 2.0;
                    p.v.push(vec![a, b]);
                    p.d.push(a * cx + b * cy + off);
                }
            }
            p
        })
}

fn in_box(lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, 2)
}

/// Whether `xi` is a convex combination of `verts`.
fn in_hull(verts: &[Vec<f64>], xi: &[f64]) -> bool {
    let k = verts.len();
    let mut lp = LinearProgram::new(k);
    lp.set_nonneg(0..k);
    lp.add_eq(vec![1.0; k], 1.0);
    for c in 0..xi.len() {
        lp.add_eq(verts.iter().map(|v| v[c]).collect(), xi[c]);
    }
    solve_lp(&lp).unwrap().status == LpStatus::Optimal
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vertices_are_tight_and_span_the_set(p in polytope2(), pts in prop::collection::vec(in_box(-6.0, 6.0), 20)) {
        let verts = enumerate_vertices(&p).unwrap();
        for v in &verts {
            let tight = p.v.iter().zip(&p.d)
                .filter(|(r, d)| (r[0] * v[0] + r[1] * v[1] - **d).abs() <= 1e-7 * (1.0 + d.abs()))
                .count();
            prop_assert!(p.contains(v, 1e-8));
            prop_assert!(tight >= 2);
        }
        for xi in pts.iter().filter(|x| p.contains(x, 0.0)) {
            prop_assert!(in_hull(&verts, xi));
        }
    }

    #[test]
    fn scaling_is_nested(p in polytope2(), t in 0.0f64..1.0, a in 0.0f64..1.0, b in 0.0f64..1.0,
                         data in prop::collection::vec(in_box(-6.0, 6.0), 50)) {
        let verts = enumerate_vertices(&p).unwrap();
        // an anchor inside S: a mix of the first two vertices
        let anchor: Vec<f64> = (0..2).map(|c| t * verts[0][c] + (1.0 - t) * verts[1][c]).collect();
        let set = UncertaintySet::Polytope(p.clone());
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let small = ScaledSet::new(set.clone(), lo, Some(anchor.clone())).unwrap();
        let big = ScaledSet::new(set.clone(), hi, Some(anchor.clone())).unwrap();
        for v in small.vertices().unwrap() {
            prop_assert!(big.contains(&v).unwrap());
            prop_assert!(p.contains(&v, 1e-8));
        }
        let samples = SampleSet::new(data.clone(), None, "prop");
        prop_assert!(coverage_count(&small, &samples) <= coverage_count(&big, &samples));

        let full = ScaledSet::identity(set.clone(), Some(anchor)).unwrap();
        for xi in &data {
            prop_assert_eq!(full.contains(xi).unwrap(), contains_base(&set, xi).unwrap());
        }
    }

    #[test]
    fn constraint_is_biaffine(
        a in prop::collection::vec(-3.0f64..3.0, 3),
        e in prop::collection::vec(-3.0f64..3.0, 2),
        q in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 3),
        k in -5.0f64..5.0,
        x in prop::collection::vec(-2.0f64..2.0, 3),
        dx in prop::collection::vec(-2.0f64..2.0, 3),
        xi in prop::collection::vec(-2.0f64..2.0, 2),
        dxi in prop::collection::vec(-2.0f64..2.0, 2),
        t in -3.0f64..3.0,
    ) {
        let c = BiAffineConstraint::new(a, e, k).with_cross(q);
        let f = |x: &[f64], xi: &[f64]| eval_constraint(&c, x, xi).unwrap();
        let step = |v: &[f64], d: &[f64], s: f64| -> Vec<f64> { v.iter().zip(d).map(|(a, b)| a + s * b).collect() };
        // affine along a line: f(p + t d) = f(p) + t (f(p + d) - f(p))
        let lin_x = f(&x, &xi) + t * (f(&step(&x, &dx, 1.0), &xi) - f(&x, &xi));
        prop_assert!((f(&step(&x, &dx, t), &xi) - lin_x).abs() <= 1e-9 * (1.0 + lin_x.abs()));
        let lin_xi = f(&x, &xi) + t * (f(&x, &step(&xi, &dxi, 1.0)) - f(&x, &xi));
        prop_assert!((f(&x, &step(&xi, &dxi, t)) - lin_xi).abs() <= 1e-9 * (1.0 + lin_xi.abs()));
    }

    #[test]
    fn validation_is_pure(p in polytope2(), k in -5.0f64..5.0) {
        let prog = RobustProgram {
            objective: vec![1.0, -1.0],
            constraints: vec![BiAffineConstraint::new(vec![1.0, 1.0], vec![1.0, -1.0], k)],
            decision_set: DecisionSet::boxed(&[0.0, 0.0], &[1.0, 1.0]),
            uncertainty_dim: 2,
        };
        let set = UncertaintySet::Polytope(p);
        let (p0, s0) = (prog.clone(), set.clone());
        let r1 = validate_program(&prog, &set);
        let r2 = validate_program(&prog, &set);
        prop_assert_eq!(r1, r2);
        prop_assert_eq!(prog, p0);
        prop_assert_eq!(set, s0);
    }
}
