use num_complex::Complex64;

use crate::fidelity::compose;
use crate::graph::{Vertex, WeightedGraph};
use crate::noise::{NoiseChannel, ZNoiseVector};
use crate::prob::Probability;

use super::{DenseState, DensityMatrix, Ensemble, LocalOp, OracleError, MAX_DENSITY_DIM};

/// Dimension up to which [`compare_with_tracked`] also builds both density
/// matrices and compares them entry by entry.
const DIRECT_COMPARE_DIM: usize = 729;

/// Index `sum_k z_{v_k} d^k` of a word over `vertices`.
pub fn z_index(d: u32, vertices: &[Vertex], z: &ZNoiseVector) -> Result<usize, OracleError> {
    let mut idx = 0;
    for &(v, x) in z.entries() {
        let k = vertices
            .iter()
            .position(|&u| u == v)
            .ok_or(OracleError::UnknownVertex(v))?;
        idx += x.index() as usize * (d as usize).pow(k as u32);
    }
    Ok(idx)
}

/// Coefficients `c_z = <G|Z(z)^dagger|phi>` of `phi` in the orthonormal basis
/// `{Z(z)|G>}`, indexed like [`z_index`].
pub fn graph_basis_coefficients(
    g: &WeightedGraph,
    phi: &DenseState,
) -> Result<Vec<Complex64>, OracleError> {
    let gs = DenseState::graph_state(g)?;
    if gs.vertices() != phi.vertices() {
        return Err(OracleError::DimensionMismatch {
            expected: gs.dim(),
            got: phi.dim(),
        });
    }
    let f = g.field().clone();
    let amps: Vec<Complex64> = gs
        .amplitudes()
        .iter()
        .zip(phi.amplitudes())
        .map(|(a, b)| a.conj() * b)
        .collect();
    let mut psi = DenseState::from_amplitudes(f.clone(), gs.vertices().to_vec(), amps)?;
    let d = f.order() as usize;
    let mut t = Vec::with_capacity(d * d);
    for z in f.elements() {
        for x in f.elements() {
            t.push(f.chi(f.neg(f.mul(z, x))).to_complex());
        }
    }
    let t = LocalOp::Dense(t);
    for k in 0..psi.vertices().len() {
        psi.apply_local_at(k, &t);
    }
    Ok(psi.amplitudes().to_vec())
}

/// Outcome of comparing an oracle ensemble with a tracked state.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    /// Rigorous upper bound on the Frobenius norm, hence on every entry, of
    /// `rho_oracle - rho_tracked`.
    pub frobenius_bound: f64,
    /// Direct entrywise maximum in the computational basis, when small enough.
    pub max_entry: Option<f64>,
    pub oracle_fidelity: f64,
    pub tracked_fidelity: f64,
}

impl Comparison {
    pub fn within(&self, tol: f64) -> bool {
        self.frobenius_bound <= tol
            && self.max_entry.is_none_or(|e| e <= tol)
            && (self.oracle_fidelity - self.tracked_fidelity).abs() <= tol
    }
}

/// Compares the trace-normalised oracle state with
/// `sum_z P(z) Z(z)|G><G|Z(z)^dagger` built from `channels` on `g`.
///
/// Each oracle member `c` is split as `alpha e_z + r` in the graph basis,
/// with `e_z` its dominant basis vector, and
/// `||c c^dagger - e_z e_z^dagger||_F <= | |alpha|^2 - 1 | + 2 |alpha| |r| + |r|^2`.
/// The weights of the dominant vectors are then compared with `P`.
pub fn compare_with_tracked<P: Probability>(
    oracle: &Ensemble,
    g: &WeightedGraph,
    channels: &[NoiseChannel<P>],
) -> Result<Comparison, OracleError> {
    let vertices: Vec<Vertex> = g.vertices().collect();
    let dist = compose(g.field().clone(), vertices.clone(), channels)?;
    let total = oracle.total_weight();
    let mut member_bound = 0.0;
    let mut dominant = vec![0.0f64; DenseState::graph_state(g)?.dim()];
    let mut oracle_fidelity = 0.0;
    for (w, s) in oracle.members() {
        let q = w / total;
        let c = graph_basis_coefficients(g, s)?;
        let (zmax, alpha) = c
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().partial_cmp(&b.1.norm_sqr()).unwrap())
            .map(|(i, a)| (i, *a))
            .unwrap();
        let rest: f64 = c
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != zmax)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let r = rest.sqrt();
        member_bound += q * ((alpha.norm_sqr() - 1.0).abs() + 2.0 * alpha.norm() * r + rest);
        dominant[zmax] += q;
        oracle_fidelity += q * c[0].norm_sqr();
    }
    let d = g.field().order();
    let mut tracked = vec![0.0f64; dominant.len()];
    for (z, p) in dist.iter() {
        tracked[z_index(d, &vertices, &z)?] = p.to_f64();
    }
    let diag: f64 = dominant
        .iter()
        .zip(&tracked)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();

    let max_entry = if dominant.len() <= DIRECT_COMPARE_DIM.min(MAX_DENSITY_DIM) {
        let mut rho_o = oracle.to_density_matrix()?;
        rho_o.normalize();
        let gs = DenseState::graph_state(g)?;
        let mut rho_t = DensityMatrix::zeros(g.field().clone(), vertices.clone())?;
        for (z, p) in dist.iter() {
            let mut s = gs.clone();
            s.apply_z(&z)?;
            rho_t.add_pure(p.to_f64(), &s)?;
        }
        Some(rho_o.max_abs_diff(&rho_t)?)
    } else {
        None
    };
    Ok(Comparison {
        frobenius_bound: member_bound + diag,
        max_entry,
        oracle_fidelity,
        tracked_fidelity: dist.identity_mass().to_f64(),
    })
}

/// `sum_z P(z) Z(z)|G><G|Z(z)^dagger` for the composed `channels`.
pub fn tracked_density<P: Probability>(
    g: &WeightedGraph,
    channels: &[NoiseChannel<P>],
) -> Result<DensityMatrix, OracleError> {
    let vertices: Vec<Vertex> = g.vertices().collect();
    let dist = compose(g.field().clone(), vertices.clone(), channels)?;
    let gs = DenseState::graph_state(g)?;
    let mut rho = DensityMatrix::zeros(g.field().clone(), vertices)?;
    for (z, p) in dist.iter() {
        let mut s = gs.clone();
        s.apply_z(&z)?;
        rho.add_pure(p.to_f64(), &s)?;
    }
    Ok(rho)
}
