//! Z-type noise channels on graph states and the tracking engine.
//!
//! On a graph state every Pauli error is equivalent to a Z-type one, so a
//! channel is a probability distribution over exponent vectors
//! [`ZNoiseVector`]. Graph manipulations and measurements act on these vectors
//! through affine update rules, letting the graph and the channels evolve
//! independently.

mod channel;
mod engine;
mod update;
mod vector;

use thiserror::Error;

use crate::gf::GfError;
use crate::graph::{GraphError, Vertex};
use crate::measure::MeasureError;

pub use channel::{
    compact, dephasing_channel, depolarizing_channel, pauli_channel, translate_to_z, NoiseChannel,
    NoiseTerm,
};
pub use engine::{nsf_apply, Operation, StepStats, TrackedState};
pub use update::{
    update_for_cz, update_for_local_complement, update_for_local_multiply, update_for_measurement,
    LinearUpdate, RuleCache,
};
pub use vector::ZNoiseVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("noise acts on vertex {0}, which is not in the graph")]
    UnknownVertex(Vertex),
    #[error("negative probability {0}")]
    NegativeProbability(f64),
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("depolarizing parameter {0} is outside [0, 1]")]
    LambdaOutOfRange(f64),
    #[error(
        "channel type {0:?} is not Pauli-diagonal; only mixtures of Weyl conjugations can be tracked on graph states"
    )]
    NonPauliDiagonal(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Field(#[from] GfError),
}
