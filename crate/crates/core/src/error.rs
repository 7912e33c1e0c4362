use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the library.
///
/// The variants fall into three families which the CLI maps to exit codes:
/// input problems ([`ErrorKind::Input`]), numerical or solver breakdowns
/// ([`ErrorKind::Solver`]) and infeasibility verdicts ([`ErrorKind::Infeasible`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },
    #[error("decision set is empty")]
    EmptyDecisionSet,
    #[error("uncertainty set is empty")]
    EmptySet,
    #[error("uncertainty set is unbounded")]
    UnboundedSet,
    #[error("invalid uncertainty set: {0}")]
    InvalidSet(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("anchor lies outside the base set (max violation {violation:.3e})")]
    AnchorOutsideBase { violation: f64 },
    #[error("operation requires a polytope uncertainty set")]
    NotPolytope,
    #[error("vertex enumeration too large: {0}")]
    DimensionTooLarge(String),
    #[error("numerical failure in LP solver: {0}")]
    NumericalFailure(String),
    #[error("cutting-plane loop hit the limit of {cuts} cuts (max violation {violation:.3e})")]
    IterationLimit { cuts: usize, violation: f64 },
    #[error("predicate is false at the lower end of the bracket ({lo})")]
    NotEvenLo { lo: f64 },
    #[error("problem is infeasible at every point of the uncertainty set")]
    NominallyInfeasible,
    #[error("robust counterpart is infeasible; first failing constraint: {constraint:?}")]
    Infeasible { constraint: Option<usize> },
    #[error("robust counterpart is unbounded below")]
    UnboundedObjective,
    #[error("Wasserstein reformulation hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("sample set is empty")]
    EmptySamples,
    #[error("unknown benchmark '{0}'")]
    UnknownBenchmark(String),
    #[error("case file not found: {0}")]
    MissingCaseFile(String),
    #[error("malformed case file: {0}")]
    CaseFormat(String),
    #[error("rejection sampling stalled (acceptance rate {rate:.2e})")]
    RejectionStall { rate: f64 },
}

/// Coarse classification used by front ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Solver,
    Infeasible,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NumericalFailure(_)
            | Error::IterationLimit { .. }
            | Error::RejectionStall { .. } => ErrorKind::Solver,
            Error::EmptyDecisionSet | Error::NominallyInfeasible | Error::Infeasible { .. } => {
                ErrorKind::Infeasible
            }
            _ => ErrorKind::Input,
        }
    }

    /// Stable snake_case tag for machine-readable reports.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::EmptyDecisionSet => "empty_decision_set",
            Error::EmptySet => "empty_set",
            Error::UnboundedSet => "unbounded_set",
            Error::InvalidSet(_) => "invalid_set",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::AnchorOutsideBase { .. } => "anchor_outside_base",
            Error::NotPolytope => "not_polytope",
            Error::DimensionTooLarge(_) => "dimension_too_large",
            Error::NumericalFailure(_) => "numerical_failure",
            Error::IterationLimit { .. } => "iteration_limit",
            Error::NotEvenLo { .. } => "not_even_lo",
            Error::NominallyInfeasible => "nominally_infeasible",
            Error::Infeasible { .. } => "infeasible",
            Error::UnboundedObjective => "unbounded_objective",
            Error::HypothesisViolated(_) => "hypothesis_violated",
            Error::EmptySamples => "empty_samples",
            Error::UnknownBenchmark(_) => "unknown_benchmark",
            Error::MissingCaseFile(_) => "missing_case_file",
            Error::CaseFormat(_) => "case_format",
            Error::RejectionStall { .. } => "rejection_stall",
        }
    }

    pub(crate) fn dim(context: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            found,
        }
    }
}
