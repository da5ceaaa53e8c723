use crate::graph::{Vertex, WeightedGraph};
use crate::measure::{self, MeasurementSpec, RuleTag};
use crate::noise::{Operation, ZNoiseVector};

use super::{DenseState, DensityMatrix, Ensemble, OracleError};

/// A physical Pauli channel: `(p, z, x)` meaning `Z(z) X(x)` with probability `p`.
pub type PhysicalNoise = Vec<(f64, ZNoiseVector, ZNoiseVector)>;

/// Runs `script` densely on `|G0>` after applying `noise` physically.
///
/// Each measurement is post-selected on its outcome and followed by the
/// inverse of its recorded correction, so that the noiseless branch is again
/// a graph state. Isolated X-type measurements are averaged over outcomes.
/// Returns the final graph and the (unnormalised) branch ensemble.
pub fn replay(
    g0: &WeightedGraph,
    noise: &[PhysicalNoise],
    script: &[Operation],
) -> Result<(WeightedGraph, Ensemble), OracleError> {
    let mut g = g0.clone();
    let mut ens = Ensemble::pure(DenseState::graph_state(g0)?);
    for ch in noise {
        ens.apply_pauli_mixture(ch)?;
    }
    for op in script {
        match op {
            Operation::LocalComplement { vertex, factor } => {
                ens.for_each_state(|s| s.apply_local_complement(&g, *vertex, *factor))?;
                g.local_complement_in_place(*vertex, *factor)?;
            }
            Operation::LocalMultiply { vertex, factor } => {
                g.local_multiply_in_place(*vertex, *factor)?;
                ens.for_each_state(|s| s.apply_local_multiply(*vertex, *factor))?;
            }
            Operation::Cz { a, b, count } => {
                g.apply_cz_in_place(*a, *b, *count)?;
                ens.for_each_state(|s| s.apply_cz(*a, *b, *count))?;
            }
            Operation::Measure(spec) => {
                let m = measure::measure(&g, spec)?;
                if m.rule == RuleTag::Isolated {
                    ens.measure_and_discard(spec.vertex, spec.basis)?;
                } else {
                    ens.project(spec.vertex, spec.basis, spec.outcome)?;
                }
                ens.for_each_state(|s| s.undo_correction(&m.correction.gates))?;
                g = m.graph;
            }
        }
    }
    Ok((g, ens))
}

/// Depolarizes `|G0><G0|` physically with `(vertex, lambda)` pairs, then
/// performs the measurements, each post-selected and followed by the inverse
/// of its correction. Returns the final graph and the normalised state.
pub fn replay_depolarized(
    g0: &WeightedGraph,
    noise: &[(Vertex, f64)],
    measurements: &[MeasurementSpec],
) -> Result<(WeightedGraph, DensityMatrix), OracleError> {
    let mut g = g0.clone();
    let mut rho = DensityMatrix::from_pure(&DenseState::graph_state(g0)?)?;
    for &(v, lambda) in noise {
        rho.depolarize(v, lambda)?;
    }
    for spec in measurements {
        let m = measure::measure(&g, spec)?;
        if m.rule == RuleTag::Isolated {
            rho = rho.partial_trace(spec.vertex)?;
        } else {
            rho.project_weyl(spec.vertex, spec.basis, spec.outcome)?;
        }
        rho.normalize();
        rho.undo_correction(&m.correction.gates)?;
        g = m.graph;
    }
    Ok((g, rho))
}
