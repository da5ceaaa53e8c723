use num_complex::Complex64;

use crate::gf::{Field, FieldElement};
use crate::graph::{Vertex, WeightedGraph};

use super::{check_supported, dense_cap, LocalOp, OracleError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A pure state of `n` qudits as `d^n` amplitudes.
///
/// Basis index `x = sum_k x_k d^k`, where `x_k` is the encoding of the field
/// element held by `vertices[k]`.
#[derive(Clone, Debug)]
pub struct DenseState {
    field: Field,
    vertices: Vec<Vertex>,
    amps: Vec<Complex64>,
}

pub(crate) fn checked_dim(d: u32, n: usize, cap: usize) -> Result<usize, OracleError> {
    let mut dim: usize = 1;
    for _ in 0..n {
        dim = dim
            .checked_mul(d as usize)
            .filter(|&x| x <= cap)
            .ok_or(OracleError::CapExceeded { d, n, cap })?;
    }
    Ok(dim)
}

impl DenseState {
    pub fn from_amplitudes(
        field: Field,
        vertices: Vec<Vertex>,
        amps: Vec<Complex64>,
    ) -> Result<Self, OracleError> {
        check_supported(&field)?;
        let dim = checked_dim(field.order(), vertices.len(), usize::MAX)?;
        if amps.len() != dim {
            return Err(OracleError::DimensionMismatch {
                expected: dim,
                got: amps.len(),
            });
        }
        Ok(DenseState {
            field,
            vertices,
            amps,
        })
    }

    /// The computational basis state `|x>`.
    pub fn basis(field: Field, vertices: Vec<Vertex>, index: usize) -> Result<Self, OracleError> {
        check_supported(&field)?;
        let dim = checked_dim(field.order(), vertices.len(), dense_cap())?;
        let mut amps = vec![ZERO; dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(DenseState {
            field,
            vertices,
            amps,
        })
    }

    /// `|G>` with amplitudes `d^{-n/2} chi(sum_{i<j} A_ij x_i x_j)`.
    pub fn graph_state(g: &WeightedGraph) -> Result<Self, OracleError> {
        Self::graph_state_with_cap(g, dense_cap())
    }

    pub fn graph_state_with_cap(g: &WeightedGraph, cap: usize) -> Result<Self, OracleError> {
        let f = g.field().clone();
        check_supported(&f)?;
        let vertices: Vec<Vertex> = g.vertices().collect();
        let d = f.order() as usize;
        let dim = checked_dim(f.order(), vertices.len(), cap)?;
        let pos = |v: Vertex| vertices.binary_search(&v).unwrap();
        let edges: Vec<(usize, usize, FieldElement)> =
            g.edges().map(|(u, v, w)| (pos(u), pos(v), w)).collect();
        let norm = (dim as f64).sqrt().recip();
        let mut digits = vec![0usize; vertices.len()];
        let amps = (0..dim)
            .map(|x| {
                let mut k = x;
                for dgt in digits.iter_mut() {
                    *dgt = k % d;
                    k /= d;
                }
                let mut s = FieldElement::ZERO;
                for &(i, j, w) in &edges {
                    let xi = FieldElement::from_index_unchecked(digits[i] as u32);
                    let xj = FieldElement::from_index_unchecked(digits[j] as u32);
                    s = f.add(s, f.mul(w, f.mul(xi, xj)));
                }
                f.chi(s).to_complex() * norm
            })
            .collect();
        Ok(DenseState {
            field: f,
            vertices,
            amps,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub(crate) fn amps_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.amps
    }

    pub fn position(&self, v: Vertex) -> Result<usize, OracleError> {
        self.vertices
            .iter()
            .position(|&u| u == v)
            .ok_or(OracleError::UnknownVertex(v))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for a in self.amps.iter_mut() {
                *a /= n;
            }
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &DenseState) -> Result<Complex64, OracleError> {
        if self.vertices != other.vertices {
            return Err(OracleError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<a|b>| = 1` within `tol`, for normalised states.
    pub fn equal_up_to_phase(&self, other: &DenseState, tol: f64) -> bool {
        match self.inner(other) {
            Ok(ip) => (ip.norm() - 1.0).abs() <= tol && (self.norm_sqr() - 1.0).abs() <= tol,
            Err(_) => false,
        }
    }

    /// Max-norm distance after removing the relative global phase.
    pub fn distance_up_to_phase(&self, other: &DenseState) -> Result<f64, OracleError> {
        let ip = self.inner(other)?;
        let phase = if ip.norm() > 0.0 {
            ip / ip.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max))
    }

    fn blocks(&self, pos: usize) -> (usize, usize, usize) {
        let d = self.field.order() as usize;
        let stride = d.pow(pos as u32);
        (d, stride, self.amps.len() / (stride * d))
    }

    pub fn apply_local(&mut self, v: Vertex, op: &LocalOp) -> Result<(), OracleError> {
        let pos = self.position(v)?;
        self.apply_local_at(pos, op);
        Ok(())
    }

    pub(crate) fn apply_local_at(&mut self, pos: usize, op: &LocalOp) {
        let (d, stride, outer) = self.blocks(pos);
        let mut buf = vec![ZERO; d];
        for hi in 0..outer {
            for lo in 0..stride {
                let base = hi * stride * d + lo;
                match op {
                    LocalOp::Diagonal(diag) => {
                        for (k, dk) in diag.iter().enumerate() {
                            self.amps[base + k * stride] *= dk;
                        }
                    }
                    LocalOp::Permutation(perm) => {
                        for k in 0..d {
                            buf[perm[k]] = self.amps[base + k * stride];
                        }
                        for (k, b) in buf.iter().enumerate() {
                            self.amps[base + k * stride] = *b;
                        }
                    }
                    LocalOp::Dense(m) => {
                        for (k, b) in buf.iter_mut().enumerate() {
                            *b = self.amps[base + k * stride];
                        }
                        for j in 0..d {
                            let row = &m[j * d..(j + 1) * d];
                            self.amps[base + j * stride] =
                                row.iter().zip(&buf).map(|(a, b)| a * b).sum();
                        }
                    }
                }
            }
        }
    }

    /// Multiplies amplitude `|..x_a..x_b..>` by `phase[x_a * d + x_b]`.
    pub fn apply_two_qudit_diagonal(
        &mut self,
        a: Vertex,
        b: Vertex,
        phase: &[Complex64],
    ) -> Result<(), OracleError> {
        let (pa, pb) = (self.position(a)?, self.position(b)?);
        let d = self.field.order() as usize;
        let (sa, sb) = (d.pow(pa as u32), d.pow(pb as u32));
        for (x, amp) in self.amps.iter_mut().enumerate() {
            let (xa, xb) = ((x / sa) % d, (x / sb) % d);
            *amp *= phase[xa * d + xb];
        }
        Ok(())
    }

    /// `sum_k coeffs[k] psi(.., x_v = k, ..)`: removes qudit `v`.
    pub fn contract(&self, v: Vertex, coeffs: &[Complex64]) -> Result<DenseState, OracleError> {
        let pos = self.position(v)?;
        Ok(self.contract_at(pos, coeffs))
    }

    pub(crate) fn contract_at(&self, pos: usize, coeffs: &[Complex64]) -> DenseState {
        let (d, stride, outer) = self.blocks(pos);
        let mut out = vec![ZERO; stride * outer];
        for hi in 0..outer {
            for lo in 0..stride {
                let base = hi * stride * d + lo;
                out[hi * stride + lo] = (0..d)
                    .map(|k| coeffs[k] * self.amps[base + k * stride])
                    .sum();
            }
        }
        let mut vertices = self.vertices.clone();
        vertices.remove(pos);
        DenseState {
            field: self.field.clone(),
            vertices,
            amps: out,
        }
    }

    /// `|e>_v (x) |self>`, with `v` appended as the most significant qudit.
    pub fn tensor_front(&self, v: Vertex, e: &[Complex64]) -> DenseState {
        let mut amps = Vec::with_capacity(self.amps.len() * e.len());
        for ek in e {
            amps.extend(self.amps.iter().map(|a| a * ek));
        }
        let mut vertices = self.vertices.clone();
        vertices.push(v);
        DenseState {
            field: self.field.clone(),
            vertices,
            amps,
        }
    }

    /// Reorders qudits so that vertices are ascending.
    pub fn sorted(&self) -> DenseState {
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.sort_by_key(|&k| self.vertices[k]);
        if order.iter().enumerate().all(|(i, &k)| i == k) {
            return self.clone();
        }
        let d = self.field.order() as usize;
        let mut amps = vec![ZERO; self.amps.len()];
        for (x, a) in self.amps.iter().enumerate() {
            let mut y = 0usize;
            for (newpos, &oldpos) in order.iter().enumerate() {
                let digit = (x / d.pow(oldpos as u32)) % d;
                y += digit * d.pow(newpos as u32);
            }
            amps[y] = *a;
        }
        DenseState {
            field: self.field.clone(),
            vertices: order.iter().map(|&k| self.vertices[k]).collect(),
            amps,
        }
    }
}
