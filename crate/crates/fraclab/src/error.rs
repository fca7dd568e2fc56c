use thiserror::Error;

/// Errors shared by every module. Numerical routines refuse bad input
/// eagerly so that verification suites never run on silently invalid
/// configurations.
#[derive(Debug, Error)]
pub enum FraclabError {
    /// A constructor or operation precondition failed. The message names the
    /// offending field and the violated bound.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Functions on different grids were mixed in one operation.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A kernel was evaluated on the full diagonal where it is singular.
    #[error("singular kernel evaluation: {0}")]
    SingularEvaluation(String),

    /// A quadrature was requested below the resolution needed for its
    /// stated accuracy; the message names the required node count.
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    /// A verification suite refused to run because a measured hypothesis
    /// (for example a weight class constant) was infinite or unstable.
    #[error("suite precondition failed: {0}")]
    SuiteRefused(String),

    /// The requested work exceeds the supported cost envelope.
    #[error("cost bound exceeded: {0}")]
    CostBound(String),
}

impl FraclabError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        FraclabError::InvalidConfig(msg.into())
    }
}
