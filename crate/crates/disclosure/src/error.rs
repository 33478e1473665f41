use thiserror::Error;

/// Errors surfaced by the solver, detector and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model parameter is outside its admissible domain.
    #[error("invalid parameter {name}: {value} ({constraint})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// A time index lies outside the range it is defined on.
    #[error("time index {t} out of range [{min}, {max}]")]
    TimeOutOfRange { t: usize, min: usize, max: usize },

    /// The queried message history has probability zero under the policy.
    #[error("unreachable history: the conditioning event has probability zero")]
    UnreachableHistory,

    /// The detector routines only support policies that always keep silent
    /// in the good state; anything else would require the full message tree.
    #[error("unsupported policy: {0}")]
    UnsupportedPolicy(&'static str),

    /// The closed-form cap on the threshold-period silence probability is
    /// undefined (zero jump probability or zero delay cost).
    #[error("degenerate silence cap: {0}")]
    DegenerateCap(&'static str),

    /// An exhaustive routine was asked to run at a horizon it cannot handle.
    #[error("horizon {horizon} too large for {routine} (max {max})")]
    HorizonTooLarge {
        routine: &'static str,
        horizon: usize,
        max: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
