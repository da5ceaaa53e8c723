//! Fidelity of a noisy graph state with its noiseless target.
//!
//! Because `<G|Z(z)|G> = 0` unless `z = 0`, the fidelity after a set of
//! Z-type channels is the probability that their composed word is the
//! identity. Composition is convolution on the additive group `F_d^n`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::gf::{Field, FieldElement};
use crate::graph::{Vertex, WeightedGraph};
use crate::noise::{NoiseChannel, ZNoiseVector};
use crate::prob::Probability;

/// Largest `d^n` for a dense distribution.
pub const MAX_DISTRIBUTION_LEN: usize = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FidelityError {
    #[error("channel acts on vertex {0}, which is not in the final vertex set")]
    VertexMismatch(Vertex),
    #[error("distribution over d = {d}, n = {n} would need more than {max} entries", max = MAX_DISTRIBUTION_LEN)]
    TooLarge { d: u32, n: usize },
    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
}

/// A probability distribution over Z-type words on a fixed vertex set,
/// stored densely by word index `sum_k z_k d^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZDistribution<P> {
    field: Field,
    vertices: Vec<Vertex>,
    probs: Vec<P>,
}

impl<P: Probability> ZDistribution<P> {
    /// The point mass on the identity word.
    pub fn identity(field: Field, vertices: Vec<Vertex>) -> Result<Self, FidelityError> {
        let d = field.order();
        let mut len: usize = 1;
        for _ in 0..vertices.len() {
            len = len
                .checked_mul(d as usize)
                .filter(|&l| l <= MAX_DISTRIBUTION_LEN)
                .ok_or(FidelityError::TooLarge {
                    d,
                    n: vertices.len(),
                })?;
        }
        let mut probs = vec![P::zero(); len];
        probs[0] = P::one();
        Ok(ZDistribution {
            field,
            vertices,
            probs,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn index_of(&self, op: &ZNoiseVector) -> Result<usize, FidelityError> {
        let d = self.field.order() as usize;
        let mut idx = 0;
        for &(v, x) in op.entries() {
            let k = self
                .vertices
                .iter()
                .position(|&u| u == v)
                .ok_or(FidelityError::VertexMismatch(v))?;
            idx += x.index() as usize * d.pow(k as u32);
        }
        Ok(idx)
    }

    pub fn word(&self, index: usize) -> ZNoiseVector {
        let d = self.field.order() as usize;
        let values: Vec<FieldElement> = (0..self.vertices.len())
            .map(|k| FieldElement::from_index_unchecked(((index / d.pow(k as u32)) % d) as u32))
            .collect();
        ZNoiseVector::from_dense(&self.vertices, &values)
    }

    pub fn probability(&self, op: &ZNoiseVector) -> Result<P, FidelityError> {
        Ok(self.probs[self.index_of(op)?].clone())
    }

    pub fn identity_mass(&self) -> P {
        self.probs[0].clone()
    }

    pub fn total(&self) -> P {
        self.probs.iter().fold(P::zero(), |a, b| a + b.clone())
    }

    /// Nonzero entries in index order.
    pub fn iter(&self) -> impl Iterator<Item = (ZNoiseVector, &P)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, p)| (self.word(i), p))
    }

    /// Convolves with one channel.
    pub fn add_channel(&mut self, channel: &NoiseChannel<P>) -> Result<(), FidelityError> {
        let f = self.field.clone();
        let d = f.order() as usize;
        let n = self.vertices.len();
        let mut shifts = Vec::with_capacity(channel.len());
        for t in channel.terms() {
            self.index_of(&t.op)?;
            shifts.push((t.probability.clone(), t.op.to_dense(&self.vertices)));
        }
        let mut out = vec![P::zero(); self.probs.len()];
        let mut digits = vec![0usize; n];
        for (i, pi) in self.probs.iter().enumerate() {
            if pi.is_zero() {
                continue;
            }
            let mut k = i;
            for dg in digits.iter_mut() {
                *dg = k % d;
                k /= d;
            }
            for (p, shift) in &shifts {
                let mut j = 0;
                let mut scale = 1;
                for (dg, s) in digits.iter().zip(shift) {
                    j += f
                        .add(FieldElement::from_index_unchecked(*dg as u32), *s)
                        .index() as usize
                        * scale;
                    scale *= d;
                }
                out[j] = out[j].clone() + pi.clone() * p.clone();
            }
        }
        self.probs = out;
        Ok(())
    }
}

/// The distribution of the product of all channels' words.
pub fn compose<P: Probability>(
    field: Field,
    vertices: Vec<Vertex>,
    channels: &[NoiseChannel<P>],
) -> Result<ZDistribution<P>, FidelityError> {
    let mut dist = ZDistribution::identity(field, vertices)?;
    for ch in channels {
        dist.add_channel(ch)?;
    }
    Ok(dist)
}

/// `<G| E_k ... E_1(|G><G|) |G>` for Z-type channels on `target`.
///
/// Channels are grouped into components of overlapping support. Words on
/// disjoint vertex sets multiply to the identity only if each does, so the
/// fidelity is the product over components, and only each component's own
/// support needs a dense distribution.
pub fn fidelity_of<P: Probability>(
    channels: &[NoiseChannel<P>],
    target: &WeightedGraph,
) -> Result<P, FidelityError> {
    let supports: Vec<BTreeSet<Vertex>> = channels.iter().map(|c| c.support()).collect();
    for &v in supports.iter().flatten() {
        if !target.contains(v) {
            return Err(FidelityError::VertexMismatch(v));
        }
    }
    let mut parent: Vec<usize> = (0..channels.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut owner: BTreeMap<Vertex, usize> = BTreeMap::new();
    for (i, s) in supports.iter().enumerate() {
        for &v in s {
            if let Some(&j) = owner.get(&v) {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a] = b;
            } else {
                owner.insert(v, i);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..channels.len() {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut total = P::one();
    for members in groups.values() {
        let vertices: BTreeSet<Vertex> = members
            .iter()
            .flat_map(|&i| supports[i].iter().copied())
            .collect();
        let chans: Vec<NoiseChannel<P>> = members.iter().map(|&i| channels[i].clone()).collect();
        total = total
            * compose(
                target.field().clone(),
                vertices.into_iter().collect(),
                &chans,
            )?
            .identity_mass();
    }
    Ok(total)
}

/// Choi-state fidelity of single-qudit depolarizing noise: `lambda + (1 - lambda)/d^2`.
pub fn choi_fidelity_depolarizing<P: Probability>(lambda: P, d: u64) -> P {
    let d2 = (d * d) as i64;
    lambda.clone() + (P::one() - lambda) * P::from_ratio(1, d2)
}

/// Average channel fidelity from the Choi fidelity: `(d F + 1)/(d + 1)`.
pub fn average_from_choi<P: Probability>(f_choi: P, d: u64) -> P {
    (P::from_ratio(d as i64, 1) * f_choi + P::one()) / P::from_ratio(d as i64 + 1, 1)
}

/// The depolarizing parameter of `m` parallel qubit channels with parameter
/// `q2`, matched by Choi fidelity: `((3 q2 + 1)^m - 1)/(4^m - 1)`.
pub fn q_d_choi<P: Probability>(q2: P, m: u32) -> P {
    let base = P::from_ratio(3, 1) * q2 + P::one();
    let four = P::from_ratio(4, 1).ipow(m as u64);
    (base.ipow(m as u64) - P::one()) / (four - P::one())
}

/// `q2^{d/2}`: linearly many two-level operations.
pub fn q_d_linear(q2: f64, d: u64) -> f64 {
    q2.powf(d as f64 / 2.0)
}

/// `q2^{d(d-1)/2}`: one two-level operation per pair of levels.
pub fn q_d_quadratic(q2: f64, d: u64) -> f64 {
    q2.powf((d * (d - 1)) as f64 / 2.0)
}

/// `F^{1/m}`, comparing a `2^m`-level pair with `m` qubit pairs.
pub fn adapted_fidelity(f: f64, m: u32) -> f64 {
    f.powf(1.0 / m as f64)
}

/// Range check shared by the CLI and sweeps.
pub fn check_unit_interval(name: &'static str, value: f64) -> Result<f64, FidelityError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(FidelityError::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}
