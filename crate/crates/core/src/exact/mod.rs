//! Exact random-cluster measure on tiny edge sets.
//!
//! The full configuration table is enumerated: configurations are bitmasks
//! over the canonical edge order of the [`EdgeSystem`] (bit `i` is edge
//! `i`). This engine is the oracle the samplers and estimators are checked
//! against.

mod ising;
mod measure;

pub(crate) use measure::check_params;
pub use ising::{ising_exact, ising_exact_with, IsingExact};
pub use measure::{
    count_clusters, exact_conditional, exact_event, exact_measure, dlr_measure, BondConfig,
    BoundaryCondition, ExactRCMeasure,
};

use thiserror::Error;

use crate::disorder::DisorderError;

/// Largest edge count for exact enumeration.
pub const EXACT_CAP: usize = 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("{what} has {size} degrees of freedom, above the exact cap of {cap}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("cluster weight q = {0} must be at least 1")]
    QBelowOne(f64),
    #[error(transparent)]
    Disorder(#[from] DisorderError),
    #[error("invalid boundary condition: {0}")]
    BadBoundary(String),
    #[error("conditioning event has probability zero")]
    ZeroProbabilityCondition,
    #[error("edge index {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("{0} values supplied for {1} items")]
    LengthMismatch(usize, usize),
}

pub(crate) fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
