//! Distributionally robust stage-1 synthesis: choose the anchor and scale
//! of the uncertainty set by its Wasserstein safety probability.

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{enumerate_vertices, homothety_rhs_raw, ScaledSet};
use crate::model::{validate_program, Polytope, RobustProgram, UncertaintySet};
use crate::stage1::{
    alpha_max, anchor_candidates, robust_feasible_at, select_best, AnchorEval, AnchorSearch, Rank,
};
use crate::wasserstein::{
    best_case_safe, worst_case_unsafe_lenient, AmbiguitySpec, DualCertificate, Quantification,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DroObjective {
    MinWorstUnsafe,
    #[default]
    MaxBestSafe,
}

impl std::str::FromStr for DroObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "worst" | "min_worst_unsafe" => Ok(Self::MinWorstUnsafe),
            "best" | "max_best_safe" => Ok(Self::MaxBestSafe),
            other => Err(Error::InvalidParameter(format!(
                "unknown DRO objective '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroConfig {
    pub objective: DroObjective,
    pub amb: AmbiguitySpec,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: usize,
    #[serde(default)]
    pub anchor_search: AnchorSearch,
    #[serde(default = "default_grid_steps")]
    pub anchor_grid_steps: usize,
    #[serde(default = "default_alpha_tol")]
    pub alpha_tol: f64,
}

fn default_alpha_grid() -> usize {
    101
}

fn default_grid_steps() -> usize {
    9
}

fn default_alpha_tol() -> f64 {
    1e-6
}

impl DroConfig {
    pub fn new(objective: DroObjective, amb: AmbiguitySpec) -> Self {
        Self {
            objective,
            amb,
            alpha_grid: default_alpha_grid(),
            anchor_search: AnchorSearch::default(),
            anchor_grid_steps: default_grid_steps(),
            alpha_tol: default_alpha_tol(),
        }
    }

    pub fn check(&self, m: usize) -> Result<()> {
        if self.alpha_grid < 2 {
            return Err(Error::InvalidParameter("alpha_grid must be >= 2".into()));
        }
        if self.anchor_grid_steps < 2 {
            return Err(Error::InvalidParameter(
                "anchor_grid_steps must be >= 2".into(),
            ));
        }
        if !(self.alpha_tol > 0.0) {
            return Err(Error::InvalidParameter("alpha_tol must be > 0".into()));
        }
        self.amb.check(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub alpha: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroResult {
    pub scaled: ScaledSet,
    pub witness_x: Vec<f64>,
    pub prob: f64,
    pub cert: DualCertificate,
    pub rhs: Vec<f64>,
    /// Probability at the chosen anchor for the grid values of α up to the
    /// chosen α (and at the chosen α itself).
    pub alpha_profile: Vec<ProfilePoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped_faces: Vec<usize>,
    pub anchors_evaluated: usize,
}

/// Probability of `Ŝ(α, v)` under the configured objective.
pub fn evaluate_scaled(
    cfg: &DroConfig,
    base: &Polytope,
    alpha: f64,
    anchor: &[f64],
) -> Result<Quantification> {
    let safe = Polytope {
        v: base.v.clone(),
        d: homothety_rhs_raw(base, alpha, anchor),
    };
    match cfg.objective {
        DroObjective::MaxBestSafe => best_case_safe(&cfg.amb, base, &safe),
        DroObjective::MinWorstUnsafe => worst_case_unsafe_lenient(&cfg.amb, base, &safe),
    }
}

fn score_of(cfg: &DroConfig, q: &Quantification) -> f64 {
    match cfg.objective {
        DroObjective::MaxBestSafe => q.prob,
        DroObjective::MinWorstUnsafe => -q.prob,
    }
}

/// Searches anchors; for each one takes the largest robustly feasible α and
/// scores the set by its Wasserstein probability.
pub fn dro_synthesize(p: &RobustProgram, s: &UncertaintySet, cfg: &DroConfig) -> Result<DroResult> {
    let base = s.as_polytope()?;
    cfg.check(p.m())?;
    validate_program(p, s)?;
    let verts = enumerate_vertices(base)?;

    let (anchor, alpha, evaluated) = if verts.len() == 1 {
        if p.feasible_at(&verts)?.is_none() {
            return Err(Error::NominallyInfeasible);
        }
        (verts[0].clone(), 1.0, 1)
    } else {
        let score = |ev: &AnchorEval| -> Result<f64> {
            Ok(score_of(
                cfg,
                &evaluate_scaled(cfg, base, ev.alpha, &ev.anchor)?,
            ))
        };
        let cands = anchor_candidates(
            p,
            base,
            &verts,
            cfg.anchor_search,
            cfg.anchor_grid_steps,
            cfg.alpha_tol,
            Rank::ScoreFirst,
            score,
        )?;
        let best = select_best(&cands, cfg.alpha_tol, Rank::ScoreFirst)
            .ok_or(Error::NominallyInfeasible)?;
        let (ev, sc) = &cands[best];
        info!(
            "dro: alpha {:.6} at anchor {:?}, score {sc:.6}",
            ev.alpha, ev.anchor
        );
        (ev.anchor.clone(), ev.alpha, cands.len())
    };

    let scaled = ScaledSet::new(s.clone(), alpha, Some(anchor.clone()))?;
    let check = robust_feasible_at(p, &scaled)?;
    let witness_x = match (check.feasible, check.witness_x) {
        (true, Some(x)) => x,
        _ => {
            return Err(Error::NumericalFailure(
                "selected set failed the robust feasibility re-check".into(),
            ))
        }
    };
    let q = evaluate_scaled(cfg, base, alpha, &anchor)?;
    let alpha_profile = profile(cfg, base, alpha, &anchor)?;
    Ok(DroResult {
        rhs: homothety_rhs_raw(base, alpha, &anchor),
        scaled,
        witness_x,
        prob: q.prob,
        cert: q.cert,
        alpha_profile,
        dropped_faces: q.dropped_faces,
        anchors_evaluated: evaluated,
    })
}

/// Probability along `α ∈ {0, 1/(K-1), ...} ∩ [0, α_max]` plus `α_max`.
pub fn profile(
    cfg: &DroConfig,
    base: &Polytope,
    alpha_max: f64,
    anchor: &[f64],
) -> Result<Vec<ProfilePoint>> {
    let k = cfg.alpha_grid;
    let mut alphas: Vec<f64> = (0..k)
        .map(|i| i as f64 / (k - 1) as f64)
        .filter(|a| *a < alpha_max - 1e-12)
        .collect();
    alphas.push(alpha_max);
    alphas
        .into_par_iter()
        .map(|alpha| {
            Ok(ProfilePoint {
                alpha,
                prob: evaluate_scaled(cfg, base, alpha, anchor)?.prob,
            })
        })
        .collect()
}

/// `α_max(v)` for a polytope base, exposed for spot checks.
pub fn max_alpha_at(
    p: &RobustProgram,
    base: &Polytope,
    anchor: &[f64],
    tol: f64,
) -> Result<Option<f64>> {
    let verts = enumerate_vertices(base)?;
    alpha_max(p, &verts, anchor, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BiAffineConstraint, DecisionSet, NormP, SampleSet};

    fn motivating() -> (RobustProgram, UncertaintySet) {
        let p = RobustProgram {
            objective: vec![1.0],
            constraints: vec![BiAffineConstraint::new(vec![1.0], vec![1.0], -5.0)],
            decision_set: DecisionSet::boxed(&[1.0], &[2.0]),
            uncertainty_dim: 1,
        };
        (p, UncertaintySet::Polytope(Polytope::interval(3.0, 5.0)))
    }

    fn samples(v: &[f64]) -> SampleSet {
        SampleSet::new(v.iter().map(|&x| vec![x]).collect(), None, "hand")
    }

    #[test]
    fn motivating_best_and_worst() {
        let (p, s) = motivating();
        let data = samples(&[3.1, 3.6, 3.9, 4.2, 4.8]);
        for objective in [DroObjective::MaxBestSafe, DroObjective::MinWorstUnsafe] {
            let cfg = DroConfig::new(
                objective,
                AmbiguitySpec::new(0.05, NormP::Inf, data.clone()),
            );
            let r = dro_synthesize(&p, &s, &cfg).unwrap();
            assert!((r.scaled.alpha - 0.5).abs() < 1e-5);
            assert!((r.rhs[0] - 4.0).abs() < 1e-5);
            assert!((0.0..=1.0).contains(&r.prob));
            let again = evaluate_scaled(
                &cfg,
                s.as_polytope().unwrap(),
                r.scaled.alpha,
                r.scaled.anchor.as_ref().unwrap(),
            )
            .unwrap();
            assert!((again.prob - r.prob).abs() <= 1e-8);
        }
    }

    #[test]
    fn profile_is_monotone_for_best_case() {
        let (p, s) = motivating();
        let cfg = DroConfig::new(
            DroObjective::MaxBestSafe,
            AmbiguitySpec::new(0.02, NormP::Inf, samples(&[3.1, 3.6, 3.9, 4.2, 4.8])),
        );
        let r = dro_synthesize(&p, &s, &cfg).unwrap();
        assert_eq!(r.alpha_profile.last().unwrap().alpha, r.scaled.alpha);
        for w in r.alpha_profile.windows(2) {
            assert!(w[1].prob >= w[0].prob - 1e-12);
        }
    }

    #[test]
    fn requires_polytope_and_samples() {
        let (p, _) = motivating();
        let ball = UncertaintySet::NormBall {
            p: NormP::Two,
            radius: 1.0,
            dim: 1,
        };
        let cfg = DroConfig::new(
            DroObjective::MaxBestSafe,
            AmbiguitySpec::new(0.1, NormP::Inf, samples(&[1.0])),
        );
        assert_eq!(dro_synthesize(&p, &ball, &cfg), Err(Error::NotPolytope));
        let (p, s) = motivating();
        let cfg = DroConfig::new(
            DroObjective::MaxBestSafe,
            AmbiguitySpec::new(0.1, NormP::Inf, SampleSet::default()),
        );
        assert_eq!(dro_synthesize(&p, &s, &cfg), Err(Error::EmptySamples));
    }
}
