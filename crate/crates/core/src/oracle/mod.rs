//! Brute-force dense simulation used as ground truth for the tracking layer.
//!
//! States are explicit amplitude vectors of length `d^n`, so everything here
//! is exponential in the number of qudits and guarded by a size cap. Phases
//! are kept exactly, unlike in the tracking layer.

mod compare;
mod dense;
mod gates;
mod mixed;
mod replay;
#[cfg(test)]
mod tests;

use thiserror::Error;

use crate::fidelity::FidelityError;
use crate::gf::{FieldCtx, GfError};
use crate::graph::{GraphError, Vertex};
use crate::measure::MeasureError;

pub use compare::{
    compare_with_tracked, graph_basis_coefficients, tracked_density, z_index, Comparison,
};
pub use dense::DenseState;
pub use gates::{
    distance_up_to_phase, eigenvector, gate_local_ops, h_op, m_op, max_abs_diff, operator_matrix,
    projector, r_op, s_op, weyl_op, x_op, z_op, LocalOp,
};
pub use mixed::{DensityMatrix, Ensemble, MAX_DENSITY_DIM};
pub use replay::{replay, replay_depolarized, PhysicalNoise};

/// Default bound on `d^n`.
pub const DEFAULT_DENSE_CAP: usize = 1 << 16;

/// The amplitude cap: `NSF_DENSE_CAP` if set to a positive integer, else
/// [`DEFAULT_DENSE_CAP`].
pub fn dense_cap() -> usize {
    std::env::var("NSF_DENSE_CAP")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&c| c > 0)
        .unwrap_or(DEFAULT_DENSE_CAP)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error(
        "even-extension unsupported: the dense oracle needs d = 2 or odd p, got p = {p}, m = {m}"
    )]
    EvenExtensionUnsupported { p: u32, m: u32 },
    #[error("dense state with d = {d}, n = {n} exceeds the amplitude cap {cap} (set NSF_DENSE_CAP to raise it)")]
    CapExceeded { d: u32, n: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vertex {0} is not part of the dense state")]
    UnknownVertex(Vertex),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Fidelity(#[from] FidelityError),
}

/// Phase-exact operators exist for odd `p` and for `d = 2`.
pub fn check_supported(f: &FieldCtx) -> Result<(), OracleError> {
    if f.p() == 2 && f.m() > 1 {
        Err(OracleError::EvenExtensionUnsupported { p: f.p(), m: f.m() })
    } else {
        Ok(())
    }
}

/// Whether `n` qudits over `f` fit under the current amplitude cap.
pub fn check_capacity(f: &FieldCtx, n: usize) -> Result<(), OracleError> {
    check_supported(f)?;
    dense::checked_dim(f.order(), n, dense_cap()).map(|_| ())
}
