//! Adjustable robust optimization: uncertainty-set synthesis by homothety,
//! Wasserstein distributionally robust scaling, and robust solves over the
//! resulting sets.

pub mod benchmarks;
pub mod dro;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod solver;
pub mod stage1;
pub mod stage2;
pub mod wasserstein;

pub use benchmarks::{
    generate_samples, load_benchmark, load_benchmark_with, Benchmark, BenchmarkId,
};
pub use dro::{dro_synthesize, DroConfig, DroObjective, DroResult};
pub use error::{Error, ErrorKind, Result};
pub use geometry::{coverage_count, enumerate_vertices, homothety_rhs, ScaledSet};
pub use model::{
    eval_constraint, validate_program, BiAffineConstraint, DecisionSet, NormP, Polytope,
    RobustProgram, SampleSet, UncertaintySet, ValidationReport,
};
pub use stage1::{
    robust_feasible_at, synthesize, AnchorSearch, Feasibility, SynthesisConfig, SynthesisResult,
};
pub use stage2::{solve_robust, SolveReport};
pub use wasserstein::{
    best_case_safe, check_certificate, transport_oracle, worst_case_unsafe, AmbiguitySpec,
    Direction, DualCertificate, Mode, Quantification,
};

/// Numerical tolerances shared across modules.
pub mod tol {
    /// Phase-one infeasibility threshold on equilibrated rows.
    pub const LP_FEAS: f64 = 1e-7;
    /// Default comparison tolerance for reported quantities.
    pub const CMP: f64 = 1e-6;
    /// Absolute slack for set membership and sample coverage.
    pub const MEMBERSHIP: f64 = 1e-9;
    /// ∞-norm radius for merging duplicate vertices.
    pub const DEDUP: f64 = 1e-8;
    /// Allowed violation of the base set by an anchor.
    pub const ANCHOR: f64 = 1e-9;
}
