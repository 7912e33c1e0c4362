//! Seeded uniform sampling over uncertainty sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::bounding_box;
use crate::linalg::norm2;
use crate::model::{NormP, SampleSet, UncertaintySet};

const STALL_CHECK: usize = 10_000;
const STALL_RATE: f64 = 1e-4;

/// `n` i.i.d. uniform samples from `set`, deterministic in `seed`.
pub fn generate_samples(set: &UncertaintySet, n: usize, seed: u64) -> Result<SampleSet> {
    set.check_shape()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = set.dim();
    let mut samples = Vec::with_capacity(n);
    let source;
    match set {
        UncertaintySet::NormBall { p, radius, .. } => {
            source = format!("uniform norm ball p={p} r={radius}");
            for _ in 0..n {
                samples.push(ball_point(&mut rng, *p, *radius, m));
            }
        }
        UncertaintySet::Polytope(poly) => {
            source = "uniform polytope (rejection from bounding box)".to_string();
            if n > 0 {
                let bbox = bounding_box(poly)?;
                let mut attempts = 0usize;
                while samples.len() < n {
                    attempts += 1;
                    let xi: Vec<f64> = bbox
                        .iter()
                        .map(|&(lo, hi)| {
                            if hi > lo {
                                rng.random_range(lo..hi)
                            } else {
                                lo
                            }
                        })
                        .collect();
                    if poly.contains(&xi, 0.0) {
                        samples.push(xi);
                    }
                    if attempts >= STALL_CHECK {
                        let rate = samples.len() as f64 / attempts as f64;
                        if rate < STALL_RATE {
                            return Err(Error::RejectionStall { rate });
                        }
                    }
                }
            }
        }
    }
    Ok(SampleSet::new(samples, Some(seed), source))
}

fn ball_point(rng: &mut ChaCha8Rng, p: NormP, r: f64, m: usize) -> Vec<f64> {
    match p {
        NormP::Inf => (0..m).map(|_| rng.random_range(-r..r)).collect(),
        NormP::Two => loop {
            let g: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            let ng = norm2(&g);
            if ng > 0.0 {
                let scale = r * rng.random::<f64>().powf(1.0 / m as f64) / ng;
                break g.into_iter().map(|v| v * scale).collect();
            }
        },
        NormP::One => {
            let e: Vec<f64> = (0..=m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = e.iter().sum();
            e[..m]
                .iter()
                .map(|v| {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    sign * r * v / total
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Polytope;

    #[test]
    fn empty_and_deterministic() {
        let s = UncertaintySet::Polytope(Polytope::interval(20.0, 35.0));
        assert!(generate_samples(&s, 0, 1).unwrap().is_empty());
        let a = generate_samples(&s, 50, 9).unwrap();
        let b = generate_samples(&s, 50, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_samples(&s, 50, 10).unwrap());
    }

    #[test]
    fn interval_mean() {
        let s = UncertaintySet::Polytope(Polytope::interval(20.0, 35.0));
        let d = generate_samples(&s, 500, 7).unwrap();
        assert!(d.samples.iter().all(|x| (20.0..=35.0).contains(&x[0])));
        let mean = d.samples.iter().map(|x| x[0]).sum::<f64>() / 500.0;
        assert!((mean - 27.5).abs() < 0.5, "{mean}");
    }

    #[test]
    fn balls_stay_inside() {
        for p in [NormP::One, NormP::Two, NormP::Inf] {
            let s = UncertaintySet::NormBall {
                p,
                radius: 2.0,
                dim: 3,
            };
            let d = generate_samples(&s, 200, 3).unwrap();
            assert!(d.samples.iter().all(|x| p.norm(x) <= 2.0 + 1e-12));
        }
    }

    #[test]
    fn thin_polytope_stalls() {
        // a sliver of width 1e-6 inside a unit bounding box
        let poly = Polytope::new(
            vec![
                vec![1.0, -1.0],
                vec![-1.0, 1.0],
                vec![1.0, 0.0],
                vec![-1.0, 0.0],
                vec![0.0, 1.0],
                vec![0.0, -1.0],
            ],
            vec![1e-7, 1e-7, 1.0, 0.0, 1.0, 0.0],
        )
        .unwrap();
        let r = generate_samples(&UncertaintySet::Polytope(poly), 10, 1);
        assert!(matches!(r, Err(Error::RejectionStall { .. })));
    }
}
