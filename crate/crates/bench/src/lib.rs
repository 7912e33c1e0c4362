//! Fixtures for the pipeline benchmarks.

use aro_core::{
    generate_samples, homothety_rhs, load_benchmark, synthesize, AmbiguitySpec, Benchmark, NormP,
    Polytope, SampleSet, ScaledSet, SynthesisConfig,
};

pub const SEED: u64 = 7;

pub struct Fixture {
    pub bench: Benchmark,
    pub data: SampleSet,
    pub scaled: ScaledSet,
}

/// Benchmark `id` with `n` seeded samples and its synthesized set.
pub fn fixture(id: &str, n: usize) -> Fixture {
    let bench = load_benchmark(id).expect("bundled benchmark");
    let data = generate_samples(&bench.base_set, n, SEED).expect("sampling");
    let scaled = synthesize(
        &bench.program,
        &bench.base_set,
        &data,
        &SynthesisConfig::default(),
    )
    .expect("synthesis")
    .scaled;
    Fixture {
        bench,
        data,
        scaled,
    }
}

impl Fixture {
    pub fn support(&self) -> Polytope {
        self.bench
            .base_set
            .as_polytope()
            .expect("polytope base")
            .clone()
    }

    /// The synthesized set as an explicit polytope.
    pub fn safe(&self) -> Polytope {
        let base = self.support();
        Polytope {
            v: base.v,
            d: homothety_rhs(&self.scaled).expect("polytope base"),
        }
    }

    pub fn ambiguity(&self, eps: f64, norm: NormP) -> AmbiguitySpec {
        AmbiguitySpec::new(eps, norm, self.data.clone())
    }
}
