use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("singular system: smallest singular value {sigma_min:e} is below {tol:e}")]
    Singular { sigma_min: f64, tol: f64 },
    #[error("degenerate face: the active set is empty")]
    DegenerateFace,
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("origin is not an interior point of the body")]
    OriginNotInterior,
    #[error("rejection sampling exhausted: sample {index} failed all {attempts} draws")]
    RejectionExhausted { index: usize, attempts: usize },
    #[error("random walk exhausted its budget of {0} restarts")]
    RestartBudget(usize),
    #[error("pipeline exhausted {attempts} attempts ({failures})")]
    PipelineExhausted {
        attempts: usize,
        failures: FailureCounts,
    },
}

impl Error {
    /// True for errors that signal an exhausted retry budget rather than bad input.
    pub fn is_budget_exhaustion(&self) -> bool {
        matches!(
            self,
            Error::RestartBudget(_)
                | Error::PipelineExhausted { .. }
                | Error::RejectionExhausted { .. }
        )
    }
}

/// Per-stage failure tallies of a coloring pipeline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FailureCounts {
    /// Recentering returned FAIL.
    pub recenter_fail: usize,
    /// Rejection sampling inside recentering ran out of draws.
    pub rejection_exhausted: usize,
    /// The symmetric strategy gave up (restart budget).
    pub strategy_exhausted: usize,
    /// The final vertex failed the membership or vertex check.
    pub rejected_vertex: usize,
}

impl fmt::Display for FailureCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "recenter_fail={} rejection_exhausted={} strategy_exhausted={} rejected_vertex={}",
            self.recenter_fail,
            self.rejection_exhausted,
            self.strategy_exhausted,
            self.rejected_vertex
        )
    }
}
