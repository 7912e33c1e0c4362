use std::hint::black_box;

use aro_bench::fixture;
use aro_core::{
    best_case_safe, dro_synthesize, solve_robust, synthesize, transport_oracle, worst_case_unsafe,
    AmbiguitySpec, Direction, DroConfig, DroObjective, NormP, SynthesisConfig,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const IDS: [&str; 3] = ["motivating", "numerical_lp", "opf_5bus"];

fn stage1(c: &mut Criterion) {
    let mut g = c.benchmark_group("stage1");
    g.sample_size(10);
    for id in IDS {
        let f = fixture(id, 500);
        g.bench_function(id, |b| {
            b.iter(|| {
                synthesize(
                    &f.bench.program,
                    &f.bench.base_set,
                    &f.data,
                    &SynthesisConfig::default(),
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

fn stage2(c: &mut Criterion) {
    let mut g = c.benchmark_group("stage2");
    for id in IDS {
        let f = fixture(id, 500);
        g.bench_function(id, |b| {
            b.iter(|| solve_robust(&f.bench.program, black_box(&f.scaled)).unwrap())
        });
    }
    g.finish();
}

fn wasserstein(c: &mut Criterion) {
    let mut g = c.benchmark_group("wasserstein");
    for n in [50, 500, 2000] {
        let f = fixture("numerical_lp", n);
        let (support, safe) = (f.support(), f.safe());
        for norm in [NormP::One, NormP::Two, NormP::Inf] {
            let amb = f.ambiguity(0.05, norm);
            g.bench_with_input(
                BenchmarkId::new(format!("best/{norm}"), n),
                &amb,
                |b, amb| b.iter(|| best_case_safe(amb, &support, &safe).unwrap()),
            );
            g.bench_with_input(
                BenchmarkId::new(format!("worst/{norm}"), n),
                &amb,
                |b, amb| b.iter(|| worst_case_unsafe(amb, &support, &safe).unwrap()),
            );
        }
        if n <= 50 {
            let amb = f.ambiguity(0.05, NormP::Inf);
            g.bench_with_input(
                BenchmarkId::new("oracle/into_safe", n),
                &amb,
                |b, amb: &AmbiguitySpec| {
                    b.iter(|| transport_oracle(amb, &support, &safe, Direction::IntoSafe).unwrap())
                },
            );
        }
    }
    g.finish();
}

fn dro(c: &mut Criterion) {
    let mut g = c.benchmark_group("dro");
    g.sample_size(10);
    for id in IDS {
        let f = fixture(id, 500);
        let cfg = DroConfig::new(DroObjective::MaxBestSafe, f.ambiguity(0.05, NormP::Two));
        g.bench_function(id, |b| {
            b.iter(|| dro_synthesize(&f.bench.program, &f.bench.base_set, &cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, stage1, stage2, wasserstein, dro);
criterion_main!(benches);
