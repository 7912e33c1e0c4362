//! Worst-case-unsafe and best-case-safe probabilities over a Wasserstein
//! ball around the empirical distribution of a sample set.
//!
//! Both quantities are the optimal values of finite LPs in `(λ, s, θ, γ)`.
//! For fixed `λ` the LPs separate per sample, and each per-sample block is
//! `λ` times a normalized distance LP. [`best_case_safe`] and
//! [`worst_case_unsafe`] solve the normalized blocks once and then minimize
//! the resulting piecewise-linear function of `λ` exactly. The full LPs are
//! available in [`reference`] for cross-checking.

pub mod oracle;
pub mod reference;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, mat_t_vec};
use crate::model::{NormP, Polytope, SampleSet};
use crate::solver::{
    cutting_plane_norm2, solve_lp, CuttingPlaneOptions, LinearProgram, LpStatus, SocRow,
};

pub use oracle::{transport_oracle, Direction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguitySpec {
    pub epsilon: f64,
    #[serde(default = "default_ground_norm")]
    pub ground_norm: NormP,
    pub data: SampleSet,
}

fn default_ground_norm() -> NormP {
    NormP::Two
}

impl AmbiguitySpec {
    pub fn new(epsilon: f64, ground_norm: NormP, data: SampleSet) -> Self {
        Self {
            epsilon,
            ground_norm,
            data,
        }
    }

    pub fn check(&self, m: usize) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Wasserstein radius must be finite and >= 0, got {}",
                self.epsilon
            )));
        }
        if self.data.is_empty() {
            return Err(Error::EmptySamples);
        }
        self.data.check_dim(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `sup_Q Q(ξ ∉ safe)`
    Worst,
    /// `sup_Q Q(ξ ∈ safe)`
    Best,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "worst" => Ok(Mode::Worst),
            "best" => Ok(Mode::Best),
            other => Err(Error::InvalidParameter(format!("unknown mode '{other}'"))),
        }
    }
}

/// Dual variables of the finite reformulation.
///
/// `theta[i][l]` multiplies safe-set row `l` for sample `i`. `gamma[i][b]`
/// holds the support-row multipliers of block `b`: one block per safe-set
/// face for the worst-case program, a single block for the best-case one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub lambda: f64,
    pub s: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<Vec<f64>>>,
    /// `λ ε + (1/N) Σ s_i`, before clipping to `[0, 1]`.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantification {
    pub prob: f64,
    pub cert: DualCertificate,
    /// Safe-set faces left out because their outer half-space misses the
    /// support (only for the lenient worst-case entry point).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped_faces: Vec<usize>,
}

/// Normalized distance LP from `point` to `{ξ : G ξ <= h}`:
/// `min Σ y_k (h_k - g_k·point)` over `y >= 0` with `‖Gᵀy‖_* <= 1`.
///
/// Returns the distance (the negated optimum, clamped at zero) and the
/// multipliers, scaled so the dual-norm row holds exactly. `None` when the
/// target is empty.
pub(crate) fn dual_distance(
    g: &[Vec<f64>],
    h: &[f64],
    point: &[f64],
    ground: NormP,
) -> Result<Option<(f64, Vec<f64>)>> {
    let k = g.len();
    let m = point.len();
    if g.iter().zip(h).all(|(row, &hk)| dot(row, point) <= hk) {
        return Ok(Some((0.0, vec![0.0; k])));
    }
    let mut lp = LinearProgram::new(k);
    lp.set_nonneg(0..k);
    lp.cost = g
        .iter()
        .zip(h)
        .map(|(row, &hk)| hk - dot(row, point))
        .collect();
    // w = Gᵀ y, component c has coefficients g[·][c]
    let w_rows: Vec<Vec<f64>> = (0..m)
        .map(|c| g.iter().map(|row| row[c]).collect())
        .collect();
    let mut soc = Vec::new();
    match ground.dual() {
        NormP::One => {
            let first = lp.num_vars();
            for _ in 0..m {
                lp.add_var(0.0, f64::INFINITY, 0.0);
            }
            let nv = lp.num_vars();
            for (c, wr) in w_rows.iter().enumerate() {
                for sign in [1.0, -1.0] {
                    let mut row: Vec<f64> = wr.iter().map(|v| sign * v).collect();
                    row.resize(nv, 0.0);
                    row[first + c] = -1.0;
                    lp.add_le(row, 0.0);
                }
            }
            lp.add_le_sparse(&(first..nv).map(|j| (j, 1.0)).collect::<Vec<_>>(), 1.0);
        }
        NormP::Inf => {
            for wr in &w_rows {
                lp.add_le(wr.clone(), 1.0);
                lp.add_ge(wr.clone(), -1.0);
            }
        }
        NormP::Two => {
            let t = lp.add_var(0.0, 1.0, 0.0);
            let nv = lp.num_vars();
            soc.push(SocRow {
                matrix: w_rows
                    .iter()
                    .map(|wr| {
                        let mut r = wr.clone();
                        r.resize(nv, 0.0);
                        r
                    })
                    .collect(),
                offset: vec![0.0; m],
                bound_var: t,
            });
        }
    }
    let sol = if soc.is_empty() {
        solve_lp(&lp)?
    } else {
        cutting_plane_norm2(&lp, &soc, CuttingPlaneOptions::default())?.solution
    };
    match sol.status {
        LpStatus::Unbounded => Ok(None),
        LpStatus::Infeasible => Err(Error::NumericalFailure(
            "distance LP reported infeasible".into(),
        )),
        LpStatus::Optimal => {
            let mut y: Vec<f64> = sol.x[..k].iter().map(|v| v.max(0.0)).collect();
            let w = mat_t_vec(g, &y, m);
            let dn = ground.dual().norm(&w);
            if dn > 1.0 {
                y.iter_mut().for_each(|v| *v /= dn);
            }
            let value: f64 = y
                .iter()
                .zip(g.iter().zip(h))
                .map(|(yk, (row, &hk))| yk * (hk - dot(row, point)))
                .sum();
            Ok(Some(((-value).max(0.0), y)))
        }
    }
}

/// Exact minimizer of `h(λ) = λ ε + (1/N) Σ max(0, 1 - λ δ_i)` over `λ >= 0`.
pub(crate) fn minimize_hinge(eps: f64, delta: &[f64]) -> (f64, f64) {
    let n = delta.len() as f64;
    let mut sorted: Vec<f64> = delta.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best = (0.0, 1.0);
    let mut count = 0usize;
    let mut sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let dk = sorted[i];
        if dk > 0.0 {
            let lambda = 1.0 / dk;
            let val = eps * lambda + (count as f64 - sum * lambda) / n;
            if val < best.1 {
                best = (lambda, val);
            }
        }
        // absorb every entry equal to dk before the next breakpoint
        while i < sorted.len() && sorted[i] == dk {
            count += 1;
            sum += sorted[i];
            i += 1;
        }
    }
    best
}

fn objective_of(eps: f64, lambda: f64, s: &[f64]) -> f64 {
    lambda * eps + s.iter().sum::<f64>() / s.len() as f64
}

fn check_inputs(amb: &AmbiguitySpec, support: &Polytope, safe: &Polytope) -> Result<usize> {
    support.check()?;
    safe.check()?;
    let m = support.dim();
    if safe.dim() != m {
        return Err(Error::dim("safe set", m, safe.dim()));
    }
    amb.check(m)?;
    Ok(m)
}

fn nonempty(rows: &[Vec<f64>], rhs: &[f64], m: usize) -> Result<bool> {
    let mut lp = LinearProgram::new(m);
    for (r, &b) in rows.iter().zip(rhs) {
        lp.add_le(r.clone(), b);
    }
    Ok(solve_lp(&lp)?.status == LpStatus::Optimal)
}

/// Rows of `{a_l ξ >= b_l} ∩ support`.
fn face_target(support: &Polytope, safe: &Polytope, l: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut g = vec![safe.v[l].iter().map(|v| -v).collect::<Vec<f64>>()];
    let mut h = vec![-safe.d[l]];
    g.extend(support.v.iter().cloned());
    h.extend(support.d.iter().copied());
    (g, h)
}

/// Best-case probability `sup_{Q ∈ B_ε} Q(ξ ∈ safe)` with its dual certificate.
pub fn best_case_safe(
    amb: &AmbiguitySpec,
    support: &Polytope,
    safe: &Polytope,
) -> Result<Quantification> {
    let m = check_inputs(amb, support, safe)?;
    let mut g = safe.v.clone();
    g.extend(support.v.iter().cloned());
    let mut h = safe.d.clone();
    h.extend(support.d.iter().copied());
    if !nonempty(&g, &h, m)? {
        return Err(Error::HypothesisViolated(
            "safe set does not intersect the support".into(),
        ));
    }
    let per_sample: Vec<(f64, Vec<f64>)> = amb
        .data
        .samples
        .par_iter()
        .map(|xi| {
            dual_distance(&g, &h, xi, amb.ground_norm)?.ok_or_else(|| {
                Error::NumericalFailure("distance LP unbounded for a nonempty target".into())
            })
        })
        .collect::<Result<_>>()?;

    let delta: Vec<f64> = per_sample.iter().map(|(d, _)| *d).collect();
    let (lambda, _) = minimize_hinge(amb.epsilon, &delta);
    let ls = safe.num_rows();
    let s: Vec<f64> = delta.iter().map(|d| (1.0 - lambda * d).max(0.0)).collect();
    let theta = per_sample
        .iter()
        .map(|(_, y)| y[..ls].iter().map(|v| lambda * v).collect())
        .collect();
    let gamma = per_sample
        .iter()
        .map(|(_, y)| vec![y[ls..].iter().map(|v| lambda * v).collect()])
        .collect();
    let objective = objective_of(amb.epsilon, lambda, &s);
    Ok(Quantification {
        prob: objective.clamp(0.0, 1.0),
        cert: DualCertificate {
            lambda,
            s,
            theta,
            gamma,
            objective,
        },
        dropped_faces: Vec::new(),
    })
}

/// Worst-case probability `sup_{Q ∈ B_ε} Q(ξ ∉ safe)` with its dual
/// certificate. Every outer half-space of the safe set must meet the support.
pub fn worst_case_unsafe(
    amb: &AmbiguitySpec,
    support: &Polytope,
    safe: &Polytope,
) -> Result<Quantification> {
    worst_case_impl(amb, support, safe, false)
}

/// As [`worst_case_unsafe`], but faces whose outer half-space misses the
/// support are dropped (they carry no unsafe mass) and reported.
pub fn worst_case_unsafe_lenient(
    amb: &AmbiguitySpec,
    support: &Polytope,
    safe: &Polytope,
) -> Result<Quantification> {
    worst_case_impl(amb, support, safe, true)
}

fn worst_case_impl(
    amb: &AmbiguitySpec,
    support: &Polytope,
    safe: &Polytope,
    lenient: bool,
) -> Result<Quantification> {
    let m = check_inputs(amb, support, safe)?;
    let ls = safe.num_rows();
    let mut faces = Vec::new();
    let mut dropped = Vec::new();
    for l in 0..ls {
        let (g, h) = face_target(support, safe, l);
        if nonempty(&g, &h, m)? {
            faces.push(l);
        } else if lenient {
            dropped.push(l);
        } else {
            return Err(Error::HypothesisViolated(format!(
                "outer half-space of safe-set face {l} misses the support"
            )));
        }
    }
    let targets: Vec<(Vec<Vec<f64>>, Vec<f64>)> = faces
        .iter()
        .map(|&l| face_target(support, safe, l))
        .collect();

    let per_sample: Vec<Vec<(f64, Vec<f64>)>> = amb
        .data
        .samples
        .par_iter()
        .map(|xi| {
            targets
                .iter()
                .map(|(g, h)| {
                    dual_distance(g, h, xi, amb.ground_norm)?.ok_or_else(|| {
                        Error::NumericalFailure(
                            "distance LP unbounded for a nonempty target".into(),
                        )
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let delta: Vec<f64> = per_sample
        .iter()
        .map(|blocks| blocks.iter().map(|(d, _)| *d).fold(f64::INFINITY, f64::min))
        .collect();
    let (lambda, s) = if faces.is_empty() {
        (0.0, vec![0.0; delta.len()])
    } else {
        let (lambda, _) = minimize_hinge(amb.epsilon, &delta);
        (
            lambda,
            delta.iter().map(|d| (1.0 - lambda * d).max(0.0)).collect(),
        )
    };
    let lsup = support.num_rows();
    let mut theta = Vec::with_capacity(delta.len());
    let mut gamma = Vec::with_capacity(delta.len());
    for blocks in &per_sample {
        let mut th = vec![0.0; ls];
        let mut gm = vec![vec![0.0; lsup]; ls];
        for (&l, (_, y)) in faces.iter().zip(blocks) {
            th[l] = lambda * y[0];
            gm[l] = y[1..].iter().map(|v| lambda * v).collect();
        }
        theta.push(th);
        gamma.push(gm);
    }
    let objective = objective_of(amb.epsilon, lambda, &s);
    Ok(Quantification {
        prob: objective.clamp(0.0, 1.0),
        cert: DualCertificate {
            lambda,
            s,
            theta,
            gamma,
            objective,
        },
        dropped_faces: dropped,
    })
}

/// Largest violation of the finite-program constraints by a certificate,
/// including sign constraints and the objective identity.
pub fn check_certificate(
    amb: &AmbiguitySpec,
    support: &Polytope,
    safe: &Polytope,
    mode: Mode,
    cert: &DualCertificate,
) -> Result<f64> {
    let m = check_inputs(amb, support, safe)?;
    let n = amb.data.len();
    let ls = safe.num_rows();
    let lsup = support.num_rows();
    let blocks = match mode {
        Mode::Best => 1,
        Mode::Worst => ls,
    };
    if cert.s.len() != n || cert.theta.len() != n || cert.gamma.len() != n {
        return Err(Error::dim("certificate samples", n, cert.s.len()));
    }
    let dual = amb.ground_norm.dual();
    let mut worst = (-cert.lambda).max(0.0);
    worst = worst.max((objective_of(amb.epsilon, cert.lambda, &cert.s) - cert.objective).abs());
    for i in 0..n {
        let xi = &amb.data.samples[i];
        let th = &cert.theta[i];
        if th.len() != ls
            || cert.gamma[i].len() != blocks
            || cert.gamma[i].iter().any(|g| g.len() != lsup)
        {
            return Err(Error::dim("certificate block", ls, th.len()));
        }
        worst = worst.max(-cert.s[i]);
        worst = th
            .iter()
            .chain(cert.gamma[i].iter().flatten())
            .fold(worst, |w, v| w.max(-v));
        let sup_slack: Vec<f64> = support
            .v
            .iter()
            .zip(&support.d)
            .map(|(r, d)| d - dot(r, xi))
            .collect();
        match mode {
            Mode::Best => {
                let gm = &cert.gamma[i][0];
                let lhs = 1.0
                    + th.iter()
                        .zip(safe.v.iter().zip(&safe.d))
                        .map(|(t, (r, b))| t * (b - dot(r, xi)))
                        .sum::<f64>()
                    + dot(gm, &sup_slack);
                worst = worst.max(lhs - cert.s[i]);
                let mut w = mat_t_vec(&safe.v, th, m);
                let wc = mat_t_vec(&support.v, gm, m);
                w.iter_mut().zip(&wc).for_each(|(a, b)| *a += b);
                worst = worst.max(dual.norm(&w) - cert.lambda);
            }
            Mode::Worst => {
                for l in 0..ls {
                    let gm = &cert.gamma[i][l];
                    let lhs = 1.0 - th[l] * (safe.d[l] - dot(&safe.v[l], xi)) + dot(gm, &sup_slack);
                    worst = worst.max(lhs - cert.s[i]);
                    let wc = mat_t_vec(&support.v, gm, m);
                    let w: Vec<f64> = safe.v[l]
                        .iter()
                        .zip(&wc)
                        .map(|(a, c)| a * th[l] - c)
                        .collect();
                    worst = worst.max(dual.norm(&w) - cert.lambda);
                }
            }
        }
    }
    Ok(worst)
}

/// Dispatches on `mode`.
pub fn quantify(
    amb: &AmbiguitySpec,
    support: &Polytope,
    safe: &Polytope,
    mode: Mode,
) -> Result<Quantification> {
    match mode {
        Mode::Best => best_case_safe(amb, support, safe),
        Mode::Worst => worst_case_unsafe(amb, support, safe),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d(samples: &[f64], eps: f64, norm: NormP) -> (AmbiguitySpec, Polytope, Polytope) {
        let data = SampleSet::new(samples.iter().map(|&v| vec![v]).collect(), None, "hand");
        (
            AmbiguitySpec::new(eps, norm, data),
            Polytope::interval(0.0, 10.0),
            Polytope::interval(3.0, 4.0),
        )
    }

    #[test]
    fn hand_instance_both_modes() {
        for norm in [NormP::Inf, NormP::One, NormP::Two] {
            let (amb, sup, safe) = one_d(&[3.5, 4.5], 0.2, norm);
            let b = best_case_safe(&amb, &sup, &safe).unwrap();
            assert!((b.prob - 0.9).abs() < 1e-9, "{norm}: {}", b.prob);
            let w = worst_case_unsafe(&amb, &sup, &safe).unwrap();
            assert!((w.prob - 0.9).abs() < 1e-9, "{norm}: {}", w.prob);
            assert!(check_certificate(&amb, &sup, &safe, Mode::Best, &b.cert).unwrap() <= 1e-7);
            assert!(check_certificate(&amb, &sup, &safe, Mode::Worst, &w.cert).unwrap() <= 1e-7);
        }
    }

    #[test]
    fn zero_radius_is_empirical() {
        let (amb, sup, safe) = one_d(&[3.2, 3.9, 4.5, 9.0, 0.5], 0.0, NormP::Inf);
        assert!((best_case_safe(&amb, &sup, &safe).unwrap().prob - 0.4).abs() < 1e-12);
        assert!((worst_case_unsafe(&amb, &sup, &safe).unwrap().prob - 0.6).abs() < 1e-12);
    }

    #[test]
    fn large_radius_saturates() {
        let (amb, sup, safe) = one_d(&[0.0, 10.0], 5.0, NormP::Inf);
        let b = best_case_safe(&amb, &sup, &safe).unwrap();
        assert_eq!(b.prob, 1.0);
    }

    #[test]
    fn hypotheses() {
        let (amb, sup, _) = one_d(&[1.0], 0.1, NormP::Inf);
        let outside = Polytope::interval(20.0, 30.0);
        assert!(matches!(
            best_case_safe(&amb, &sup, &outside),
            Err(Error::HypothesisViolated(_))
        ));
        // safe = [-1, 4]: the outer half-space ξ <= -1 misses the support [0, 10].
        let safe = Polytope::interval(-1.0, 4.0);
        assert!(matches!(
            worst_case_unsafe(&amb, &sup, &safe),
            Err(Error::HypothesisViolated(_))
        ));
        let q = worst_case_unsafe_lenient(&amb, &sup, &safe).unwrap();
        assert_eq!(q.dropped_faces, vec![1]);
        let empty = AmbiguitySpec::new(0.1, NormP::Inf, SampleSet::default());
        assert_eq!(
            best_case_safe(&empty, &sup, &safe),
            Err(Error::EmptySamples)
        );
    }

    #[test]
    fn hinge_minimizer() {
        let (l, v) = minimize_hinge(0.1, &[0.0, 0.0]);
        assert_eq!((l, v), (0.0, 1.0));
        let (l, v) = minimize_hinge(0.2, &[0.0, 0.5]);
        assert!((l - 2.0).abs() < 1e-12 && (v - 0.9).abs() < 1e-12);
        let (_, v) = minimize_hinge(0.0, &[1.0, 2.0, 0.0]);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn two_d_distances() {
        let g = vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![-1.0, 0.0],
            vec![0.0, -1.0],
        ];
        let h = vec![1.0, 1.0, 1.0, 1.0];
        for (norm, expect) in [
            (NormP::Inf, 2.0),
            (NormP::One, 4.0),
            (NormP::Two, 8f64.sqrt()),
        ] {
            let (d, _) = dual_distance(&g, &h, &[3.0, 3.0], norm).unwrap().unwrap();
            assert!((d - expect).abs() < 1e-6, "{norm}: {d}");
        }
    }
}
