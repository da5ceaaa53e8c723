use std::cmp::Ordering;

use smallvec::SmallVec;

use crate::gf::{FieldCtx, FieldElement};
use crate::graph::Vertex;

/// Exponent vector `z` of a Z-type Pauli word `Z(z)`.
///
/// Stored sparsely as `(vertex, exponent)` pairs sorted by vertex with zero
/// exponents dropped, so equal words have equal representations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZNoiseVector(SmallVec<[(Vertex, FieldElement); 4]>);

impl ZNoiseVector {
    pub fn identity() -> Self {
        ZNoiseVector(SmallVec::new())
    }

    pub fn unit(v: Vertex, x: FieldElement) -> Self {
        let mut s = SmallVec::new();
        if !x.is_zero() {
            s.push((v, x));
        }
        ZNoiseVector(s)
    }

    /// Builds a vector from arbitrary pairs; repeated vertices are summed.
    pub fn from_entries(
        f: &FieldCtx,
        entries: impl IntoIterator<Item = (Vertex, FieldElement)>,
    ) -> Self {
        let mut raw: SmallVec<[(Vertex, FieldElement); 4]> = entries.into_iter().collect();
        raw.sort_by_key(|&(v, _)| v);
        let mut out: SmallVec<[(Vertex, FieldElement); 4]> = SmallVec::with_capacity(raw.len());
        for (v, x) in raw {
            match out.last_mut() {
                Some((u, y)) if *u == v => *y = f.add(*y, x),
                _ => out.push((v, x)),
            }
        }
        out.retain(|(_, x)| !x.is_zero());
        ZNoiseVector(out)
    }

    /// From values listed in the order of `vertices`.
    pub fn from_dense(vertices: &[Vertex], values: &[FieldElement]) -> Self {
        let mut pairs: SmallVec<[(Vertex, FieldElement); 4]> = vertices
            .iter()
            .copied()
            .zip(values.iter().copied())
            .filter(|(_, x)| !x.is_zero())
            .collect();
        pairs.sort_by_key(|&(v, _)| v);
        ZNoiseVector(pairs)
    }

    pub fn to_dense(&self, vertices: &[Vertex]) -> Vec<FieldElement> {
        vertices.iter().map(|&v| self.get(v)).collect()
    }

    pub fn entries(&self) -> &[(Vertex, FieldElement)] {
        &self.0
    }

    pub fn support(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.0.iter().map(|&(v, _)| v)
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: Vertex) -> FieldElement {
        match self.0.binary_search_by_key(&v, |&(u, _)| u) {
            Ok(i) => self.0[i].1,
            Err(_) => FieldElement::ZERO,
        }
    }

    pub fn set(&mut self, v: Vertex, x: FieldElement) {
        match self.0.binary_search_by_key(&v, |&(u, _)| u) {
            Ok(i) if x.is_zero() => {
                self.0.remove(i);
            }
            Ok(i) => self.0[i].1 = x,
            Err(_) if x.is_zero() => {}
            Err(i) => self.0.insert(i, (v, x)),
        }
    }

    pub fn remove(&mut self, v: Vertex) {
        self.set(v, FieldElement::ZERO);
    }

    pub fn scale(&self, f: &FieldCtx, c: FieldElement) -> ZNoiseVector {
        if c.is_zero() {
            return ZNoiseVector::identity();
        }
        ZNoiseVector(self.0.iter().map(|&(v, x)| (v, f.mul(c, x))).collect())
    }

    /// `self + other` by a sorted merge.
    pub fn add(&self, f: &FieldCtx, other: &ZNoiseVector) -> ZNoiseVector {
        if other.is_identity() {
            return self.clone();
        }
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let s = f.add(a[i].1, b[j].1);
                    if !s.is_zero() {
                        out.push((a[i].0, s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        ZNoiseVector(out)
    }

    pub fn neg(&self, f: &FieldCtx) -> ZNoiseVector {
        ZNoiseVector(self.0.iter().map(|&(v, x)| (v, f.neg(x))).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldCtx;

    fn fe(x: u32) -> FieldElement {
        FieldElement::from_index_unchecked(x)
    }

    #[test]
    fn canonical_form() {
        let f = FieldCtx::new(3, 1).unwrap();
        let a = ZNoiseVector::from_entries(&f, [(3, fe(1)), (1, fe(2)), (3, fe(2)), (2, fe(0))]);
        assert_eq!(a.entries(), &[(1, fe(2))]);
        let b = ZNoiseVector::from_dense(&[5, 1], &[fe(1), fe(1)]);
        assert_eq!(b.entries(), &[(1, fe(1)), (5, fe(1))]);
        assert_eq!(a.add(&f, &b).entries(), &[(5, fe(1))]);
        let mut c = b.clone();
        c.set(3, fe(2));
        c.remove(1);
        assert_eq!(c.entries(), &[(3, fe(2)), (5, fe(1))]);
        assert_eq!(c.to_dense(&[1, 3, 5]), vec![fe(0), fe(2), fe(1)]);
        assert_eq!(c.scale(&f, fe(2)).get(3), fe(1));
        assert!(c.add(&f, &c.neg(&f)).is_identity());
    }
}
