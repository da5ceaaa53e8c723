use num_complex::Complex64;

use crate::gf::{Field, FieldElement};
use crate::graph::Vertex;
use crate::measure::{Gate, WeylIndex};
use crate::noise::{NoiseChannel, ZNoiseVector};
use crate::prob::Probability;

use super::dense::checked_dim;
use super::gates::{eigenvector, gate_local_ops, weyl_op};
use super::{DenseState, LocalOp, OracleError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest Hilbert-space dimension for which a full density matrix is built.
pub const MAX_DENSITY_DIM: usize = 4096;

/// Members below this weight are dropped after a projection.
const NEGLIGIBLE: f64 = 1e-300;

/// A mixed state as a weighted list of pure states. Weights need not sum to 1.
#[derive(Clone, Debug)]
pub struct Ensemble {
    members: Vec<(f64, DenseState)>,
}

impl Ensemble {
    pub fn pure(state: DenseState) -> Self {
        Ensemble {
            members: vec![(1.0, state)],
        }
    }

    pub fn from_members(members: Vec<(f64, DenseState)>) -> Self {
        Ensemble { members }
    }

    pub fn members(&self) -> &[(f64, DenseState)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|(w, _)| w).sum()
    }

    pub fn normalize_weights(&mut self) {
        let t = self.total_weight();
        if t > 0.0 {
            for (w, _) in self.members.iter_mut() {
                *w /= t;
            }
        }
    }

    /// Applies the same unitary to every member.
    pub fn for_each_state(
        &mut self,
        mut f: impl FnMut(&mut DenseState) -> Result<(), OracleError>,
    ) -> Result<(), OracleError> {
        self.members.iter_mut().try_for_each(|(_, s)| f(s))
    }

    /// A mixture of `Z(z) X(x)` conjugations, given as `(p, z, x)` triples.
    pub fn apply_pauli_mixture(
        &mut self,
        terms: &[(f64, ZNoiseVector, ZNoiseVector)],
    ) -> Result<(), OracleError> {
        let mut out = Vec::with_capacity(self.members.len() * terms.len());
        for (w, s) in &self.members {
            for (p, z, x) in terms {
                if *p == 0.0 {
                    continue;
                }
                let mut t = s.clone();
                t.apply_pauli(z, x)?;
                out.push((w * p, t));
            }
        }
        self.members = out;
        Ok(())
    }

    /// A tracked Z-type channel applied as diagonal phase operators.
    pub fn apply_z_channel<P: Probability>(
        &mut self,
        channel: &NoiseChannel<P>,
    ) -> Result<(), OracleError> {
        let terms: Vec<(f64, ZNoiseVector, ZNoiseVector)> = channel
            .terms()
            .iter()
            .map(|t| {
                (
                    t.probability.to_f64(),
                    t.op.clone(),
                    ZNoiseVector::identity(),
                )
            })
            .collect();
        self.apply_pauli_mixture(&terms)
    }

    /// Post-selects outcome `b` of `W_v(z,x)` and removes qudit `v`.
    /// Weights are multiplied by the branch probability; returns the total
    /// probability of the branch.
    pub fn project(
        &mut self,
        v: Vertex,
        basis: WeylIndex,
        b: FieldElement,
    ) -> Result<f64, OracleError> {
        let Some((_, first)) = self.members.first() else {
            return Ok(0.0);
        };
        let f = first.field().clone();
        let bra: Vec<Complex64> = eigenvector(&f, basis, b)?
            .iter()
            .map(|x| x.conj())
            .collect();
        let mut out = Vec::with_capacity(self.members.len());
        let mut total = 0.0;
        for (w, s) in &self.members {
            let mut t = s.contract(v, &bra)?;
            let n = t.norm_sqr();
            total += w * n;
            if w * n > NEGLIGIBLE {
                t.normalize();
                out.push((w * n, t));
            }
        }
        self.members = out;
        Ok(total)
    }

    /// Measures `W_v(z,x)` and forgets the outcome.
    pub fn measure_and_discard(&mut self, v: Vertex, basis: WeylIndex) -> Result<(), OracleError> {
        let Some((_, first)) = self.members.first() else {
            return Ok(());
        };
        let f = first.field().clone();
        let mut all = Vec::new();
        for b in f.elements() {
            let mut branch = self.clone();
            branch.project(v, basis, b)?;
            all.extend(branch.members);
        }
        self.members = all;
        Ok(())
    }

    /// `<psi|rho|psi> / tr(rho)`.
    pub fn fidelity(&self, target: &DenseState) -> Result<f64, OracleError> {
        let mut acc = 0.0;
        for (w, s) in &self.members {
            acc += w * target.inner(s)?.norm_sqr();
        }
        Ok(acc / self.total_weight())
    }

    pub fn to_density_matrix(&self) -> Result<DensityMatrix, OracleError> {
        let Some((_, first)) = self.members.first() else {
            return Err(OracleError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        };
        let mut rho = DensityMatrix::zeros(first.field().clone(), first.vertices().to_vec())?;
        for (w, s) in &self.members {
            rho.add_pure(*w, s)?;
        }
        Ok(rho)
    }
}

/// A density matrix over `vertices`, stored row-major.
///
/// Internally the matrix is a vector on `2n` qudits: column digits occupy
/// positions `0..n` and row digits `n..2n`, so single-qudit maps reuse the
/// pure-state kernels.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    vertices: Vec<Vertex>,
    dim: usize,
    data: DenseState,
}

impl DensityMatrix {
    pub fn zeros(field: Field, vertices: Vec<Vertex>) -> Result<Self, OracleError> {
        let d = field.order();
        let dim = checked_dim(d, vertices.len(), MAX_DENSITY_DIM)?;
        let n = vertices.len();
        let data = DenseState::from_amplitudes(
            field,
            (0..2 * n as Vertex).collect(),
            vec![ZERO; dim * dim],
        )?;
        Ok(DensityMatrix {
            vertices,
            dim,
            data,
        })
    }

    pub fn from_pure(state: &DenseState) -> Result<Self, OracleError> {
        let mut rho = Self::zeros(state.field().clone(), state.vertices().to_vec())?;
        rho.add_pure(1.0, state)?;
        Ok(rho)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> &Field {
        self.data.field()
    }

    pub fn entries(&self) -> &[Complex64] {
        self.data.amplitudes()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries()[row * self.dim + col]
    }

    fn entries_mut(&mut self) -> &mut Vec<Complex64> {
        self.data.amps_mut()
    }

    /// `rho += w |psi><psi|`.
    pub fn add_pure(&mut self, w: f64, psi: &DenseState) -> Result<(), OracleError> {
        if psi.vertices() != self.vertices.as_slice() {
            return Err(OracleError::DimensionMismatch {
                expected: self.dim,
                got: psi.dim(),
            });
        }
        let dim = self.dim;
        let amps = psi.amplitudes().to_vec();
        let data = self.entries_mut();
        for (r, ar) in amps.iter().enumerate() {
            let ar = ar * w;
            for (c, ac) in amps.iter().enumerate() {
                data[r * dim + c] += ar * ac.conj();
            }
        }
        Ok(())
    }

    fn pos(&self, v: Vertex) -> Result<usize, OracleError> {
        self.vertices
            .iter()
            .position(|&u| u == v)
            .ok_or(OracleError::UnknownVertex(v))
    }

    /// `rho -> U rho U^dagger` for `U` acting on `v`.
    pub fn apply_local(&mut self, v: Vertex, op: &LocalOp) -> Result<(), OracleError> {
        let k = self.pos(v)?;
        let n = self.vertices.len();
        self.data.apply_local_at(n + k, op);
        self.data.apply_local_at(k, &op.conj());
        Ok(())
    }

    /// `U^dagger rho U` for a correction `U` given as gates in application order.
    pub fn undo_correction(&mut self, gates: &[Gate]) -> Result<(), OracleError> {
        let f = self.field().clone();
        for g in gates.iter().rev() {
            for (v, op) in gate_local_ops(&f, g, true)? {
                self.apply_local(v, &op)?;
            }
        }
        Ok(())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    pub fn normalize(&mut self) {
        let t = self.trace().re;
        if t > 0.0 {
            for x in self.entries_mut().iter_mut() {
                *x /= t;
            }
        }
    }

    /// `<psi|rho|psi>`.
    pub fn fidelity(&self, psi: &DenseState) -> Result<f64, OracleError> {
        if psi.vertices() != self.vertices.as_slice() {
            return Err(OracleError::DimensionMismatch {
                expected: self.dim,
                got: psi.dim(),
            });
        }
        let a = psi.amplitudes();
        let mut acc = ZERO;
        for r in 0..self.dim {
            let row: Complex64 = (0..self.dim).map(|c| self.entry(r, c) * a[c]).sum();
            acc += a[r].conj() * row;
        }
        Ok(acc.re)
    }

    /// `<e|_v rho |e>_v`, removing qudit `v`; returns the unnormalised trace.
    pub fn project(&mut self, v: Vertex, e: &[Complex64]) -> Result<f64, OracleError> {
        let k = self.pos(v)?;
        let n = self.vertices.len();
        let bra: Vec<Complex64> = e.iter().map(|x| x.conj()).collect();
        let rows = self.data.contract_at(n + k, &bra);
        self.data = rows.contract_at(k, e);
        self.vertices.remove(k);
        self.dim /= self.field().order() as usize;
        Ok(self.trace().re)
    }

    /// Projects onto outcome `b` of `W_v(z,x)`.
    pub fn project_weyl(
        &mut self,
        v: Vertex,
        basis: WeylIndex,
        b: FieldElement,
    ) -> Result<f64, OracleError> {
        let e = eigenvector(self.field(), basis, b)?;
        self.project(v, &e)
    }

    /// `tr_v rho`, as a matrix over the remaining qudits.
    pub fn partial_trace(&self, v: Vertex) -> Result<DensityMatrix, OracleError> {
        let k = self.pos(v)?;
        let n = self.vertices.len();
        let d = self.field().order() as usize;
        let mut out: Option<DenseState> = None;
        for x in 0..d {
            let mut e = vec![ZERO; d];
            e[x] = Complex64::new(1.0, 0.0);
            let part = self.data.contract_at(n + k, &e).contract_at(k, &e);
            out = Some(match out {
                None => part,
                Some(mut acc) => {
                    for (a, b) in acc.amps_mut().iter_mut().zip(part.amplitudes()) {
                        *a += b;
                    }
                    acc
                }
            });
        }
        let mut vertices = self.vertices.clone();
        vertices.remove(k);
        Ok(DensityMatrix {
            vertices,
            dim: self.dim / d,
            data: out.expect("d >= 2"),
        })
    }

    /// `lambda rho + (1 - lambda) I/d (x) tr_v rho`.
    pub fn depolarize(&mut self, v: Vertex, lambda: f64) -> Result<(), OracleError> {
        let k = self.pos(v)?;
        let reduced = self.partial_trace(v)?;
        let d = self.field().order() as usize;
        let dim = self.dim;
        let stride = d.pow(k as u32);
        let strip = |i: usize| (i / (stride * d)) * stride + i % stride;
        let digit = |i: usize| (i / stride) % d;
        let small = reduced.dim;
        let red = reduced.entries().to_vec();
        let data = self.entries_mut();
        for r in 0..dim {
            for c in 0..dim {
                let x = &mut data[r * dim + c];
                *x *= lambda;
                if digit(r) == digit(c) {
                    *x += red[strip(r) * small + strip(c)] * ((1.0 - lambda) / d as f64);
                }
            }
        }
        Ok(())
    }

    /// `lambda rho + (1 - lambda)/d^2 sum_{z,x} W rho W^dagger`, summed literally.
    pub fn depolarize_weyl_sum(&mut self, v: Vertex, lambda: f64) -> Result<(), OracleError> {
        let f = self.field().clone();
        let d2 = (f.order() as f64).powi(2);
        let mut acc: Vec<Complex64> = self.entries().iter().map(|x| x * lambda).collect();
        for z in f.elements() {
            for x in f.elements() {
                let mut t = self.clone();
                t.apply_local(v, &weyl_op(&f, z, x)?)?;
                for (a, b) in acc.iter_mut().zip(t.entries()) {
                    *a += b * ((1.0 - lambda) / d2);
                }
            }
        }
        *self.entries_mut() = acc;
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Result<f64, OracleError> {
        if self.vertices != other.vertices {
            return Err(OracleError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(super::gates::max_abs_diff(self.entries(), other.entries()))
    }
}
