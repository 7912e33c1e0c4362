use aro_core::dro::evaluate_scaled;
use aro_core::geometry::enumerate_vertices;
use aro_core::model::{
    BiAffineConstraint, DecisionSet, NormP, Polytope, RobustProgram, SampleSet, UncertaintySet,
};
use aro_core::{
    dro_synthesize, robust_feasible_at, solve_robust, synthesize, AmbiguitySpec, DroConfig,
    DroObjective, ScaledSet, SynthesisConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two decisions in `[0, 2]²`, two uncertain rows over `S = [-1, 1]²`, each
/// satisfied with margin at `x = 0, ξ = 0`.
fn program() -> impl Strategy<Value = RobustProgram> {
    let row = (
        prop::collection::vec(0.0f64..2.0, 2),
        prop::collection::vec(-2.0f64..2.0, 2),
        0.2f64..2.5,
    );
    (
        prop::collection::vec(row, 1..=2),
        prop::collection::vec(-1.0f64..1.0, 2),
    )
        .prop_map(|(rows, c)| RobustProgram {
            objective: c,
            constraints: rows
                .into_iter()
                .map(|(a, e, margin)| BiAffineConstraint::new(a, e, -margin))
                .collect(),
            decision_set: DecisionSet::boxed(&[0.0, 0.0], &[2.0, 2.0]),
            uncertainty_dim: 2,
        })
}

/// Largest α keeping `x = 0` robustly feasible about the origin.
fn alpha_cap(p: &RobustProgram) -> f64 {
    p.constraints
        .iter()
        .map(|c| -c.constant / c.e.iter().map(|v| v.abs()).sum::<f64>())
        .fold(1.0, f64::min)
}

fn square() -> UncertaintySet {
    UncertaintySet::Polytope(Polytope::boxed(&[-1.0, -1.0], &[1.0, 1.0]))
}

fn uniform(n: usize, seed: u64) -> SampleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = (0..n)
        .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    SampleSet::new(s, Some(seed), "prop")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stage1_is_feasible_contained_and_maximal(p in program(), seed in 0u64..1000) {
        let cfg = SynthesisConfig::default();
        let data = uniform(40, seed);
        let r = synthesize(&p, &square(), &data, &cfg).unwrap();
        prop_assert!(robust_feasible_at(&p, &r.scaled).unwrap().feasible);
        let base = square();
        let poly = base.as_polytope().unwrap();
        for v in r.scaled.vertices().unwrap() {
            prop_assert!(poly.contains(&v, 1e-8));
        }
        let bumped = r.alpha_star + 2.0 * cfg.alpha_tol;
        if bumped <= 1.0 {
            let s = ScaledSet::new(base, bumped, r.scaled.anchor.clone()).unwrap();
            prop_assert!(!robust_feasible_at(&p, &s).unwrap().feasible);
        }
    }

    #[test]
    fn penalty_inert_without_data(p in program(), gamma in 0.0f64..5.0) {
        let empty = SampleSet::default();
        let zero = synthesize(&p, &square(), &empty, &SynthesisConfig { gamma: 0.0, ..Default::default() }).unwrap();
        let some = synthesize(&p, &square(), &empty, &SynthesisConfig { gamma, ..Default::default() }).unwrap();
        prop_assert_eq!(zero.scaled, some.scaled);
    }

    #[test]
    fn stage2_vertices_suffice(p in program(), t in 0.0f64..1.0, seed in 0u64..1000) {
        let alpha = t * alpha_cap(&p);
        let s = ScaledSet::new(square(), alpha, Some(vec![0.0, 0.0])).unwrap();
        let rep = solve_robust(&p, &s).unwrap();
        let verts = s.vertices().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (j, c) in p.constraints.iter().enumerate() {
            let vmax = verts.iter().map(|v| c.eval(&rep.x_opt, v).unwrap()).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((vmax - rep.worst_case_value[j]).abs() <= 1e-9);
            prop_assert!(vmax <= 1e-7);
            for _ in 0..1000 {
                let w: Vec<f64> = (0..verts.len()).map(|_| rng.random::<f64>()).collect();
                let total: f64 = w.iter().sum();
                let xi: Vec<f64> = (0..2).map(|k| verts.iter().zip(&w).map(|(v, wi)| v[k] * wi).sum::<f64>() / total).collect();
                prop_assert!(c.eval(&rep.x_opt, &xi).unwrap() <= vmax + 1e-7);
            }
        }
    }

    #[test]
    fn stage2_objective_grows_with_the_set(p in program(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let cap = alpha_cap(&p);
        let (lo, hi) = if a <= b { (a * cap, b * cap) } else { (b * cap, a * cap) };
        let obj = |alpha| solve_robust(&p, &ScaledSet::new(square(), alpha, Some(vec![0.0, 0.0])).unwrap()).unwrap().objective;
        prop_assert!(obj(lo) <= obj(hi) + 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn dro_result_is_consistent(p in program(), seed in 0u64..1000, eps in 0.0f64..0.3) {
        let cfg = DroConfig {
            anchor_grid_steps: 5,
            ..DroConfig::new(DroObjective::MaxBestSafe, AmbiguitySpec::new(eps, NormP::Inf, uniform(30, seed)))
        };
        let r = dro_synthesize(&p, &square(), &cfg).unwrap();
        prop_assert!(robust_feasible_at(&p, &r.scaled).unwrap().feasible);
        prop_assert!((0.0..=1.0).contains(&r.prob));
        let base = square();
        let poly = base.as_polytope().unwrap();
        let anchor = r.scaled.anchor.clone().unwrap();
        let again = evaluate_scaled(&cfg, poly, r.scaled.alpha, &anchor).unwrap().prob;
        prop_assert!((again - r.prob).abs() <= 1e-8);
        for k in 0..5 {
            let alpha = r.scaled.alpha * k as f64 / 5.0;
            prop_assert!(evaluate_scaled(&cfg, poly, alpha, &anchor).unwrap().prob <= r.prob + 1e-8);
        }
        prop_assert!(!enumerate_vertices(poly).unwrap().is_empty());
    }
}
