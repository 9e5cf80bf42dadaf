use thiserror::Error;

/// Errors raised by the graphon, game engine, learner and simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is out of range: {bound}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("graphon evaluated outside the unit square at ({x}, {y})")]
    Domain { x: f64, y: f64 },

    #[error("cannot normalize a graph with zero edges")]
    ZeroDensity,

    #[error("step graphon must use an equal-width partition to be smoothed")]
    UnequalPartition,

    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what} index {index} out of range (len {len})")]
    Index {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("invalid transition row for state {state}, action {action}: {reason}")]
    InvalidTransition {
        state: usize,
        action: usize,
        reason: String,
    },

    #[error("marginal of class {class} at t={t} drifted from unit mass by {drift:e}")]
    MassDrift { class: usize, t: usize, drift: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(name: &'static str, value: f64, ok: bool, bound: &'static str) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, bound })
    }
}
