use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid lattice size: {what} = {value} (need {need})")]
    LatticeSize {
        what: &'static str,
        value: usize,
        need: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    /// The square-root radicand of the correlator symbol vanished, which only
    /// happens at the critical point itself.
    #[error("symbol radicand non-positive at theta = {theta} (z = {z})")]
    SingularSymbol { theta: f64, z: f64 },

    #[error("quadrature did not converge: {points} points, last change {change:e}")]
    NonConvergence { points: usize, change: f64 },

    #[error("odd number of defects in {sector} sector ({count})")]
    OddDefectCount { sector: &'static str, count: usize },

    #[error("chain is not a cycle: {0} defects remain")]
    NotACycle(usize),

    #[error("chain size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("no crossing found inside the scanned grid")]
    NoCrossing,

    #[error("determinant dimension {0} too large for brute force (max 8)")]
    BruteForceTooLarge(usize),
}
