//! Brute-force optimal-transport oracle for small instances.
//!
//! Distances are computed geometrically from the vertices of the target
//! region, and the transport plan is a fractional knapsack. Nothing here
//! goes through the LP engine except vertex enumeration's boundedness check.

use serde::{Deserialize, Serialize};

use super::AmbiguitySpec;
use crate::error::{Error, Result};
use crate::geometry::enumerate_vertices;
use crate::linalg::dot;
use crate::model::{NormP, Polytope};

pub const ORACLE_MAX_DIM: usize = 2;
pub const ORACLE_MAX_SAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    IntoSafe,
    OutOfSafe,
}

/// Probability of the safe set (into_safe) or of its complement
/// (out_of_safe) after the cheapest transport within budget `ε`.
pub fn transport_oracle(
    amb: &AmbiguitySpec,
    support: &Polytope,
    safe: &Polytope,
    direction: Direction,
) -> Result<f64> {
    let m = support.dim();
    if m > ORACLE_MAX_DIM {
        return Err(Error::DimensionTooLarge(format!(
            "oracle supports m <= {ORACLE_MAX_DIM}, got {m}"
        )));
    }
    if amb.data.len() > ORACLE_MAX_SAMPLES {
        return Err(Error::DimensionTooLarge(format!(
            "oracle supports N <= {ORACLE_MAX_SAMPLES}, got {}",
            amb.data.len()
        )));
    }
    amb.check(m)?;
    if safe.dim() != m {
        return Err(Error::dim("safe set", m, safe.dim()));
    }

    let targets: Vec<Polytope> = match direction {
        Direction::IntoSafe => vec![stack(safe, support, None)],
        Direction::OutOfSafe => (0..safe.num_rows())
            .map(|l| stack(safe, support, Some(l)))
            .collect(),
    };
    let mut target_vertices = Vec::new();
    for t in &targets {
        match enumerate_vertices(t) {
            Ok(v) => target_vertices.push((t, v)),
            Err(Error::EmptySet) if direction == Direction::OutOfSafe => {}
            Err(e) => return Err(e),
        }
    }

    let dist: Vec<f64> = amb
        .data
        .samples
        .iter()
        .map(|xi| {
            target_vertices
                .iter()
                .map(|(t, verts)| distance_to_polytope(xi, t, verts, amb.ground_norm))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(knapsack(&dist, amb.epsilon))
}

fn stack(safe: &Polytope, support: &Polytope, face: Option<usize>) -> Polytope {
    let (mut v, mut d) = match face {
        None => (safe.v.clone(), safe.d.clone()),
        Some(l) => (
            vec![safe.v[l].iter().map(|x| -x).collect()],
            vec![-safe.d[l]],
        ),
    };
    v.extend(support.v.iter().cloned());
    d.extend(support.d.iter().copied());
    Polytope { v, d }
}

/// Fraction of unit masses at distances `dist` that reach the target with
/// average transport budget `eps`.
pub fn knapsack(dist: &[f64], eps: f64) -> f64 {
    let n = dist.len() as f64;
    let mut sorted = dist.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut budget = eps * n;
    let mut moved = 0.0;
    for d in sorted {
        if d == 0.0 {
            moved += 1.0;
        } else if d <= budget {
            budget -= d;
            moved += 1.0;
        } else {
            moved += budget / d;
            break;
        }
    }
    moved / n
}

fn distance_to_polytope(p: &[f64], poly: &Polytope, verts: &[Vec<f64>], norm: NormP) -> f64 {
    if poly.v.iter().zip(&poly.d).all(|(r, &d)| dot(r, p) <= d) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..verts.len() {
        best = best.min(norm.norm(&diff(p, &verts[i])));
        for j in i + 1..verts.len() {
            best = best.min(point_segment(p, &verts[i], &verts[j], norm));
        }
    }
    best
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Distance from `p` to the segment `[a, b]` under `norm`.
fn point_segment(p: &[f64], a: &[f64], b: &[f64], norm: NormP) -> f64 {
    let d = diff(b, a);
    let r0 = diff(p, a);
    // residual r(t) = r0 - t d
    let at = |t: f64| -> f64 {
        let r: Vec<f64> = r0.iter().zip(&d).map(|(r, dk)| r - t * dk).collect();
        norm.norm(&r)
    };
    let mut ts = vec![0.0, 1.0];
    match norm {
        NormP::Two => {
            let dd = dot(&d, &d);
            if dd > 0.0 {
                ts.push(dot(&r0, &d) / dd);
            }
        }
        NormP::One | NormP::Inf => {
            for k in 0..d.len() {
                if d[k] != 0.0 {
                    ts.push(r0[k] / d[k]);
                }
            }
            if norm == NormP::Inf {
                for k in 0..d.len() {
                    for l in k + 1..d.len() {
                        for sign in [1.0, -1.0] {
                            // r_k(t) = sign * r_l(t)
                            let den = d[k] - sign * d[l];
                            if den != 0.0 {
                                ts.push((r0[k] - sign * r0[l]) / den);
                            }
                        }
                    }
                }
            }
        }
    }
    ts.into_iter()
        .filter(|t| t.is_finite())
        .map(|t| at(t.clamp(0.0, 1.0)))
        .fold(f64::INFINITY, f64::min)
}
