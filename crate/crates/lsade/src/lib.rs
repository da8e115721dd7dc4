//! Lipschitz surrogate-assisted differential evolution (LSADE) for expensive
//! black-box optimization under a strict evaluation budget.
//!
//! The optimizer keeps an archive of all exactly evaluated points and spends
//! its budget through three scheduled components, each proposing one point per
//! firing:
//!
//! * a global RBF interpolant screened over freshly generated DE children,
//! * a Lipschitz cone underestimator screened over the same children,
//! * a local RBF model over the current elite, minimized inside their
//!   bounding box.
//!
//! [`optimizer::run_lsade`] is the end-to-end driver; [`experiment`] adds
//! replicated seeded runs, statistics, and trace persistence behind the
//! `lsade` CLI.

pub mod archive;
pub mod bounds;
pub mod budget;
pub mod de;
pub mod experiment;
pub mod lipschitz;
pub mod local_opt;
pub mod optimizer;
pub mod problems;
pub mod rbf;
pub mod rng;
pub mod sampling;
pub mod schedule;

pub use archive::{Archive, EvaluatedPoint, InsertOutcome, DUP_TOL};
pub use bounds::BoxBounds;
pub use budget::BudgetCounter;
pub use optimizer::{run_lsade, run_variant, LsadeConfig, RunTrace, VariantTriplet};
pub use rbf::{KernelKind, RbfKernel, RbfModel};
pub use rng::RngStream;
pub use schedule::{Component, SchedulePolicy};

/// Errors surfaced by the library; everything else is a caller contract
/// violation and panics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("objective returned non-finite value {value} at x = {x:?}")]
    NonFiniteObjective { value: f64, x: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("surrogate fit failed: {0}")]
    SurrogateFit(String),

    #[error("external evaluator: {0}")]
    Evaluator(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for [`Error::InvalidArgument`] with a formatted message.
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
