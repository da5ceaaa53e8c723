use std::collections::BTreeSet;

use smallvec::SmallVec;

use crate::graph::{Vertex, WeightedGraph};
use crate::prob::Probability;

use super::{NoiseError, ZNoiseVector};

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseTerm<P> {
    pub probability: P,
    pub op: ZNoiseVector,
}

/// A Pauli-diagonal channel written as a distribution over Z-type words.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseChannel<P> {
    terms: Vec<NoiseTerm<P>>,
}

impl<P> Default for NoiseChannel<P> {
    fn default() -> Self {
        NoiseChannel { terms: Vec::new() }
    }
}

impl<P: Probability> NoiseChannel<P> {
    /// Validates probabilities and compacts.
    pub fn new(terms: Vec<NoiseTerm<P>>) -> Result<Self, NoiseError> {
        if let Some(t) = terms.iter().find(|t| t.probability.is_negative()) {
            return Err(NoiseError::NegativeProbability(t.probability.to_f64()));
        }
        let ch = NoiseChannel { terms }.compacted();
        let total = ch.total_probability();
        if !total.approx_eq(&P::one(), 1e-12) {
            return Err(NoiseError::NotNormalized(total.to_f64()));
        }
        Ok(ch)
    }

    pub fn identity() -> Self {
        NoiseChannel {
            terms: vec![NoiseTerm {
                probability: P::one(),
                op: ZNoiseVector::identity(),
            }],
        }
    }

    pub(crate) fn from_terms_unchecked(terms: Vec<NoiseTerm<P>>) -> Self {
        NoiseChannel { terms }
    }

    pub(crate) fn terms_mut(&mut self) -> &mut [NoiseTerm<P>] {
        &mut self.terms
    }

    pub fn terms(&self) -> &[NoiseTerm<P>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_probability(&self) -> P {
        self.terms
            .iter()
            .fold(P::zero(), |acc, t| acc + t.probability.clone())
    }

    /// Vertices on which some term acts nontrivially, ascending.
    pub fn support(&self) -> BTreeSet<Vertex> {
        self.terms.iter().flat_map(|t| t.op.support()).collect()
    }

    pub(crate) fn support_sorted(&self) -> SmallVec<[Vertex; 8]> {
        let mut s: SmallVec<[Vertex; 8]> = self.terms.iter().flat_map(|t| t.op.support()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn probability_of(&self, op: &ZNoiseVector) -> P {
        self.terms
            .iter()
            .filter(|t| &t.op == op)
            .fold(P::zero(), |acc, t| acc + t.probability.clone())
    }

    pub fn identity_probability(&self) -> P {
        self.probability_of(&ZNoiseVector::identity())
    }

    /// Merges terms with equal words and drops zero-probability terms.
    /// Terms end up sorted by word.
    pub fn compacted(mut self) -> Self {
        self.compact_in_place();
        self
    }

    pub fn compact_in_place(&mut self) {
        if self.terms.len() > 1 {
            self.terms.sort_by(|a, b| a.op.cmp(&b.op));
        }
        self.terms.dedup_by(|t, kept| {
            if t.op == kept.op {
                kept.probability = kept.probability.clone() + t.probability.clone();
                true
            } else {
                false
            }
        });
        self.terms.retain(|t| !t.probability.is_zero());
    }

    /// Applies `f` to every word, then compacts.
    pub fn map_ops(&self, mut f: impl FnMut(&ZNoiseVector) -> ZNoiseVector) -> Self {
        NoiseChannel {
            terms: self
                .terms
                .iter()
                .map(|t| NoiseTerm {
                    probability: t.probability.clone(),
                    op: f(&t.op),
                })
                .collect(),
        }
        .compacted()
    }

    pub fn to_f64(&self) -> NoiseChannel<f64> {
        NoiseChannel {
            terms: self
                .terms
                .iter()
                .map(|t| NoiseTerm {
                    probability: t.probability.to_f64(),
                    op: t.op.clone(),
                })
                .collect(),
        }
    }
}

pub fn compact<P: Probability>(channel: NoiseChannel<P>) -> NoiseChannel<P> {
    channel.compacted()
}

/// `X(x)|G> = Z(-x A)|G>`: the Z-type word equivalent to `Z(z) X(x)` on the
/// graph state, with the global phase discarded.
pub fn translate_to_z(
    g: &WeightedGraph,
    z: &ZNoiseVector,
    x: &ZNoiseVector,
) -> Result<ZNoiseVector, NoiseError> {
    let f = g.field();
    for v in z.support().chain(x.support()) {
        if !g.contains(v) {
            return Err(NoiseError::UnknownVertex(v));
        }
    }
    let mut out = z.clone();
    for &(v, xv) in x.entries() {
        let nx = f.neg(xv);
        let row = ZNoiseVector::from_entries(f, g.row(v)?.map(|(u, a)| (u, f.mul(nx, a))));
        out = out.add(f, &row);
    }
    Ok(out)
}

/// A general Pauli channel given by `(probability, z, x)` triples.
pub fn pauli_channel<P: Probability>(
    g: &WeightedGraph,
    terms: impl IntoIterator<Item = (P, ZNoiseVector, ZNoiseVector)>,
) -> Result<NoiseChannel<P>, NoiseError> {
    let mut out = Vec::new();
    for (p, z, x) in terms {
        out.push(NoiseTerm {
            probability: p,
            op: translate_to_z(g, &z, &x)?,
        });
    }
    NoiseChannel::new(out)
}

/// Single-qudit depolarizing noise `lambda rho + (1 - lambda)/d^2 sum W rho W^dagger` on `v`.
pub fn depolarizing_channel<P: Probability>(
    g: &WeightedGraph,
    v: Vertex,
    lambda: P,
) -> Result<NoiseChannel<P>, NoiseError> {
    if lambda.is_negative() || lambda > P::one() {
        return Err(NoiseError::LambdaOutOfRange(lambda.to_f64()));
    }
    if !g.contains(v) {
        return Err(NoiseError::UnknownVertex(v));
    }
    let f = g.field();
    let d = f.order() as i64;
    let each = (P::one() - lambda.clone()) * P::from_ratio(1, d * d);
    let mut terms = vec![NoiseTerm {
        probability: lambda,
        op: ZNoiseVector::identity(),
    }];
    for zv in f.elements() {
        for xv in f.elements() {
            let op = translate_to_z(g, &ZNoiseVector::unit(v, zv), &ZNoiseVector::unit(v, xv))?;
            terms.push(NoiseTerm {
                probability: each.clone(),
                op,
            });
        }
    }
    Ok(NoiseChannel::from_terms_unchecked(terms).compacted())
}

/// The fully dephasing channel on `v`: uniform over `Z_v(u)`.
pub fn dephasing_channel<P: Probability>(
    g: &WeightedGraph,
    v: Vertex,
    lambda: P,
) -> Result<NoiseChannel<P>, NoiseError> {
    if lambda.is_negative() || lambda > P::one() {
        return Err(NoiseError::LambdaOutOfRange(lambda.to_f64()));
    }
    if !g.contains(v) {
        return Err(NoiseError::UnknownVertex(v));
    }
    let f = g.field();
    let each = (P::one() - lambda.clone()) * P::from_ratio(1, f.order() as i64);
    let mut terms = vec![NoiseTerm {
        probability: lambda,
        op: ZNoiseVector::identity(),
    }];
    terms.extend(f.elements().map(|u| NoiseTerm {
        probability: each.clone(),
        op: ZNoiseVector::unit(v, u),
    }));
    Ok(NoiseChannel::from_terms_unchecked(terms).compacted())
}
