//! Error types shared across the simulation core.

use thiserror::Error;

/// Failures that abort a simulation step or run.
///
/// Configuration problems are reported separately by
/// [`config::ConfigErrors`](crate::config::ConfigErrors); everything here is
/// a runtime failure.
#[derive(Debug, Error)]
pub enum SimError {
    /// A field update produced (or was handed) a non-finite value.
    #[error("non-finite {what} at node ({i}, {j}): {value}")]
    NonFinite {
        what: &'static str,
        i: usize,
        j: usize,
        value: f64,
    },

    /// The stay weight of the biased walk went negative, meaning the walk
    /// time step is too large for the local field gradient. Callers are
    /// expected to shrink the step and retry.
    #[error("biased-walk stay weight is negative (p0 = {p0:.6e}) at node ({i}, {j}); walk step too large")]
    StepSize { p0: f64, i: usize, j: usize },

    /// An agent position was handed to a field operation outside the
    /// unit-square domain.
    #[error("position ({x}, {y}) lies outside the unit square")]
    OutOfDomain { x: f64, y: f64 },

    /// Artifact output failed.
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}
