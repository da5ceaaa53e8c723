use num_complex::Complex64;

use crate::gf::{chi4, FieldCtx, FieldElement};
use crate::graph::{Vertex, WeightedGraph};
use crate::measure::{Gate, WeylIndex};
use crate::noise::ZNoiseVector;

use super::{check_supported, DenseState, OracleError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A single-qudit operator in the cheapest exact representation.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalOp {
    Diagonal(Vec<Complex64>),
    /// `|k> -> |perm[k]>`.
    Permutation(Vec<usize>),
    /// Row-major `d x d` matrix.
    Dense(Vec<Complex64>),
}

impl LocalOp {
    pub fn dim(&self) -> usize {
        match self {
            LocalOp::Diagonal(v) => v.len(),
            LocalOp::Permutation(p) => p.len(),
            LocalOp::Dense(m) => (m.len() as f64).sqrt().round() as usize,
        }
    }

    pub fn matrix(&self) -> Vec<Complex64> {
        let d = self.dim();
        let mut m = vec![ZERO; d * d];
        match self {
            LocalOp::Diagonal(diag) => {
                for (k, x) in diag.iter().enumerate() {
                    m[k * d + k] = *x;
                }
            }
            LocalOp::Permutation(perm) => {
                for (k, &j) in perm.iter().enumerate() {
                    m[j * d + k] = ONE;
                }
            }
            LocalOp::Dense(dense) => m.copy_from_slice(dense),
        }
        m
    }

    pub fn adjoint(&self) -> LocalOp {
        match self {
            LocalOp::Diagonal(diag) => LocalOp::Diagonal(diag.iter().map(|x| x.conj()).collect()),
            LocalOp::Permutation(perm) => {
                let mut inv = vec![0; perm.len()];
                for (k, &j) in perm.iter().enumerate() {
                    inv[j] = k;
                }
                LocalOp::Permutation(inv)
            }
            LocalOp::Dense(m) => {
                let d = self.dim();
                LocalOp::Dense((0..d * d).map(|i| m[(i % d) * d + i / d].conj()).collect())
            }
        }
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> LocalOp {
        match self {
            LocalOp::Diagonal(diag) => LocalOp::Diagonal(diag.iter().map(|x| x.conj()).collect()),
            LocalOp::Permutation(p) => LocalOp::Permutation(p.clone()),
            LocalOp::Dense(m) => LocalOp::Dense(m.iter().map(|x| x.conj()).collect()),
        }
    }

    /// `self * other` as a dense matrix.
    pub fn compose(&self, other: &LocalOp) -> LocalOp {
        let d = self.dim();
        let (a, b) = (self.matrix(), other.matrix());
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            for k in 0..d {
                let aik = a[i * d + k];
                if aik == ZERO {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += aik * b[k * d + j];
                }
            }
        }
        LocalOp::Dense(out)
    }
}

fn elem(k: usize) -> FieldElement {
    FieldElement::from_index_unchecked(k as u32)
}

/// `Z(z)|y> = chi(zy)|y>`.
pub fn z_op(f: &FieldCtx, z: FieldElement) -> LocalOp {
    LocalOp::Diagonal(
        f.elements()
            .map(|y| f.chi(f.mul(z, y)).to_complex())
            .collect(),
    )
}

/// `X(x)|y> = |y + x>`.
pub fn x_op(f: &FieldCtx, x: FieldElement) -> LocalOp {
    LocalOp::Permutation(f.elements().map(|y| f.add(y, x).index() as usize).collect())
}

/// The Weyl operator with its canonical phase: `chi(-zx/2) Z(z) X(x)` for odd
/// `p`, `i^{-zx} Z(z) X(x)` for `d = 2`.
pub fn weyl_op(f: &FieldCtx, z: FieldElement, x: FieldElement) -> Result<LocalOp, OracleError> {
    check_supported(f)?;
    let phase = match f.inv2() {
        Some(h) => f.chi(f.neg(f.mul(h, f.mul(z, x)))).to_complex(),
        None => chi4((4 - z.index() * x.index()) % 4),
    };
    let d = f.order() as usize;
    let mut m = vec![ZERO; d * d];
    for y in f.elements() {
        let t = f.add(y, x);
        m[t.index() as usize * d + y.index() as usize] = phase * f.chi(f.mul(z, t)).to_complex();
    }
    Ok(LocalOp::Dense(m))
}

/// `H|x> = d^{-1/2} sum_y chi(xy)|y>`.
pub fn h_op(f: &FieldCtx) -> LocalOp {
    let d = f.order() as usize;
    let s = (d as f64).sqrt().recip();
    LocalOp::Dense(
        (0..d * d)
            .map(|i| f.chi(f.mul(elem(i / d), elem(i % d))).to_complex() * s)
            .collect(),
    )
}

/// `S(lambda)|x> = chi(lambda x^2 / 2)|x>`; for `d = 2`, `i^{lambda x}`.
pub fn s_op(f: &FieldCtx, lambda: FieldElement) -> Result<LocalOp, OracleError> {
    check_supported(f)?;
    Ok(LocalOp::Diagonal(match f.inv2() {
        Some(h) => f
            .elements()
            .map(|y| f.chi(f.mul(h, f.mul(lambda, f.mul(y, y)))).to_complex())
            .collect(),
        None => f
            .elements()
            .map(|y| chi4(lambda.index() * y.index()))
            .collect(),
    }))
}

/// `M(lambda)|x> = |lambda x>`.
pub fn m_op(f: &FieldCtx, lambda: FieldElement) -> Result<LocalOp, OracleError> {
    if lambda.is_zero() {
        return Err(OracleError::Field(crate::gf::GfError::DivisionByZero));
    }
    Ok(LocalOp::Permutation(
        f.elements()
            .map(|y| f.mul(lambda, y).index() as usize)
            .collect(),
    ))
}

/// `R(lambda) = H S(lambda) H^dagger`.
pub fn r_op(f: &FieldCtx, lambda: FieldElement) -> Result<LocalOp, OracleError> {
    let h = h_op(f);
    Ok(h.compose(&s_op(f, lambda)?).compose(&h.adjoint()))
}

/// `P(W(z,x), b) = (1/d) sum_y conj(chi(yb)) W(yz, yx)`.
pub fn projector(f: &FieldCtx, basis: WeylIndex, b: FieldElement) -> Result<LocalOp, OracleError> {
    let d = f.order() as usize;
    let mut acc = vec![ZERO; d * d];
    for y in f.elements() {
        let w = weyl_op(f, f.mul(y, basis.z), f.mul(y, basis.x))?.matrix();
        let c = f.chi(f.mul(y, b)).conj().to_complex() / d as f64;
        for (a, wi) in acc.iter_mut().zip(w) {
            *a += c * wi;
        }
    }
    Ok(LocalOp::Dense(acc))
}

/// The normalised eigenvector `|(z,x),b>` spanning the rank-one projector.
pub fn eigenvector(
    f: &FieldCtx,
    basis: WeylIndex,
    b: FieldElement,
) -> Result<Vec<Complex64>, OracleError> {
    let d = f.order() as usize;
    let p = projector(f, basis, b)?.matrix();
    let col = (0..d)
        .max_by(|&i, &j| p[i * d + i].re.partial_cmp(&p[j * d + j].re).unwrap())
        .unwrap_or(0);
    let mut v: Vec<Complex64> = (0..d).map(|r| p[r * d + col]).collect();
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= n;
    }
    Ok(v)
}

impl DenseState {
    /// Applies `prod_v Z_v(z_v) X_v(x_v)`, no phase.
    pub fn apply_pauli(&mut self, z: &ZNoiseVector, x: &ZNoiseVector) -> Result<(), OracleError> {
        let f = self.field().clone();
        for &(v, xv) in x.entries() {
            self.apply_local(v, &x_op(&f, xv))?;
        }
        for &(v, zv) in z.entries() {
            self.apply_local(v, &z_op(&f, zv))?;
        }
        Ok(())
    }

    pub fn apply_z(&mut self, z: &ZNoiseVector) -> Result<(), OracleError> {
        self.apply_pauli(z, &ZNoiseVector::identity())
    }

    /// `CZ(c)|x, y> = chi(c x y)|x, y>`.
    pub fn apply_cz(&mut self, a: Vertex, b: Vertex, c: FieldElement) -> Result<(), OracleError> {
        let f = self.field().clone();
        let d = f.order() as usize;
        let phase: Vec<Complex64> = (0..d * d)
            .map(|i| {
                f.chi(f.mul(c, f.mul(elem(i / d), elem(i % d))))
                    .to_complex()
            })
            .collect();
        self.apply_two_qudit_diagonal(a, b, &phase)
    }

    /// `CX(c)|s, t> = |s, t + c s>` with control `s` and target `t`.
    pub fn apply_cx(
        &mut self,
        control: Vertex,
        target: Vertex,
        c: FieldElement,
    ) -> Result<(), OracleError> {
        let f = self.field().clone();
        let (pc, pt) = (self.position(control)?, self.position(target)?);
        let d = f.order() as usize;
        let (sc, st) = (d.pow(pc as u32), d.pow(pt as u32));
        let old = self.amplitudes().to_vec();
        let amps = self.amps_mut();
        for (i, a) in old.into_iter().enumerate() {
            let (xs, xt) = ((i / sc) % d, (i / st) % d);
            let nt = f.add(elem(xt), f.mul(c, elem(xs))).index() as usize;
            amps[i - xt * st + nt * st] = a;
        }
        Ok(())
    }

    /// `L_v(m) = R_v(m) prod_{j in N(v)} S_j(m A_vj^2)^dagger`, which maps
    /// `|G>` to `|tau_v(m) G>` up to a global phase.
    pub fn apply_local_complement(
        &mut self,
        g: &WeightedGraph,
        v: Vertex,
        m: FieldElement,
    ) -> Result<(), OracleError> {
        let f = self.field().clone();
        self.apply_local(v, &r_op(&f, m)?)?;
        for (j, w) in g.neighbors(v)? {
            self.apply_local(j, &s_op(&f, f.mul(m, f.mul(w, w)))?.adjoint())?;
        }
        Ok(())
    }

    /// `M_v(m^{-1})`, which maps `|G>` to `|G o_m v>`.
    pub fn apply_local_multiply(&mut self, v: Vertex, m: FieldElement) -> Result<(), OracleError> {
        let f = self.field().clone();
        let inv = f.inv(m)?;
        self.apply_local(v, &m_op(&f, inv)?)
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), OracleError> {
        self.apply_gate_inner(gate, false)
    }

    pub fn apply_gate_adjoint(&mut self, gate: &Gate) -> Result<(), OracleError> {
        self.apply_gate_inner(gate, true)
    }

    fn apply_gate_inner(&mut self, gate: &Gate, dagger: bool) -> Result<(), OracleError> {
        for (v, op) in gate_local_ops(self.field(), gate, dagger)? {
            self.apply_local(v, &op)?;
        }
        Ok(())
    }

    /// `U|self>` for a correction given as gates in application order.
    pub fn apply_correction(&mut self, gates: &[Gate]) -> Result<(), OracleError> {
        gates.iter().try_for_each(|g| self.apply_gate(g))
    }

    /// `U^dagger|self>`.
    pub fn undo_correction(&mut self, gates: &[Gate]) -> Result<(), OracleError> {
        gates
            .iter()
            .rev()
            .try_for_each(|g| self.apply_gate_adjoint(g))
    }
}

/// A correction gate, or its adjoint, as single-qudit factors.
pub fn gate_local_ops(
    f: &crate::gf::Field,
    gate: &Gate,
    dagger: bool,
) -> Result<Vec<(Vertex, LocalOp)>, OracleError> {
    let pick = |op: LocalOp, adj: bool| if adj { op.adjoint() } else { op };
    Ok(match gate {
        Gate::Z { exponents } => exponents
            .iter()
            .map(|&(v, e)| (v, pick(z_op(f, e), dagger)))
            .collect(),
        Gate::S { entries, adjoint } => entries
            .iter()
            .map(|&(v, l)| Ok((v, pick(s_op(f, l)?, adjoint ^ dagger))))
            .collect::<Result<_, OracleError>>()?,
        Gate::R {
            vertex,
            lambda,
            adjoint,
        } => vec![(*vertex, pick(r_op(f, *lambda)?, adjoint ^ dagger))],
        Gate::M { vertex, lambda } => vec![(*vertex, pick(m_op(f, *lambda)?, dagger))],
    })
}

/// The matrix of the linear map `apply` on the span of `vertices`, built
/// column by column from basis states.
pub fn operator_matrix(
    f: &crate::gf::Field,
    vertices: &[Vertex],
    mut apply: impl FnMut(&mut DenseState) -> Result<(), OracleError>,
) -> Result<Vec<Complex64>, OracleError> {
    let mut probe = DenseState::basis(f.clone(), vertices.to_vec(), 0)?;
    let dim = probe.dim();
    let mut out = vec![ZERO; dim * dim];
    for col in 0..dim {
        probe = DenseState::basis(f.clone(), vertices.to_vec(), col)?;
        apply(&mut probe)?;
        for (row, a) in probe.amplitudes().iter().enumerate() {
            out[row * dim + col] = *a;
        }
    }
    Ok(out)
}

/// Max-norm distance between two matrices.
pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max-norm distance between `a` and `b` after aligning a global phase.
pub fn distance_up_to_phase(a: &[Complex64], b: &[Complex64]) -> f64 {
    let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let phase = if ip.norm() > 0.0 { ip / ip.norm() } else { ONE };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x * phase - y).norm())
        .fold(0.0, f64::max)
}
