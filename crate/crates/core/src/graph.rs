//! Weighted graph states over GF(p^m) and the Clifford graph manipulations.
//!
//! Adjacency is stored sparsely as one ordered map per vertex, so local
//! operations cost time proportional to the neighbourhood size rather than to
//! the number of vertices. Vertex labels are stable: deleting a vertex never
//! renames the others.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::gf::{Field, FieldElement, GfError};

pub type Vertex = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(Vertex),
    #[error("vertex {0} appears more than once")]
    DuplicateVertex(Vertex),
    #[error("self-loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("local multiplication by zero is not invertible")]
    ZeroMultiplier,
    #[error("a linear cluster needs at least 2 vertices, got {0}")]
    TooSmall(usize),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// A simple undirected graph with edge weights in GF(p^m).
#[derive(Clone)]
pub struct WeightedGraph {
    field: Field,
    adj: BTreeMap<Vertex, BTreeMap<Vertex, FieldElement>>,
}

impl PartialEq for WeightedGraph {
    fn eq(&self, other: &Self) -> bool {
        *self.field == *other.field && self.adj == other.adj
    }
}
impl Eq for WeightedGraph {}

impl std::fmt::Debug for WeightedGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "WeightedGraph({:?}; V={:?}; E=[",
            self.field,
            self.vertices().collect::<Vec<_>>()
        )?;
        for (i, (u, v, w)) in self.edges().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{u}-{v}:{}", self.field.format(w))?;
        }
        write!(f, "])")
    }
}

impl WeightedGraph {
    /// A graph with the given vertices and no edges.
    pub fn new(
        field: Field,
        vertices: impl IntoIterator<Item = Vertex>,
    ) -> Result<Self, GraphError> {
        let mut adj = BTreeMap::new();
        for v in vertices {
            if adj.insert(v, BTreeMap::new()).is_some() {
                return Err(GraphError::DuplicateVertex(v));
            }
        }
        Ok(WeightedGraph { field, adj })
    }

    /// The path `1 - 2 - ... - n` with all weights 1.
    pub fn linear_cluster(field: Field, n: usize) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooSmall(n));
        }
        let mut g = WeightedGraph::new(field, 1..=n as Vertex)?;
        for v in 1..n as Vertex {
            g.set_weight(v, v + 1, FieldElement::ONE)?;
        }
        Ok(g)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.adj.contains_key(&v)
    }

    /// Vertex labels in ascending order.
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.adj.keys().copied()
    }

    /// Each edge once, as `(u, v, weight)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex, FieldElement)> + '_ {
        self.adj
            .iter()
            .flat_map(|(&u, row)| row.range(u + 1..).map(move |(&v, &w)| (u, v, w)))
    }

    fn check(&self, v: Vertex) -> Result<(), GraphError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::UnknownVertex(v))
        }
    }

    pub fn weight(&self, u: Vertex, v: Vertex) -> FieldElement {
        self.adj
            .get(&u)
            .and_then(|r| r.get(&v))
            .copied()
            .unwrap_or_default()
    }

    /// Nonzero entries of row `v`, i.e. the neighbours with their weights.
    pub fn neighbors(&self, v: Vertex) -> Result<Vec<(Vertex, FieldElement)>, GraphError> {
        Ok(self.row(v)?.collect())
    }

    pub fn row(
        &self,
        v: Vertex,
    ) -> Result<impl Iterator<Item = (Vertex, FieldElement)> + '_, GraphError> {
        let r = self.adj.get(&v).ok_or(GraphError::UnknownVertex(v))?;
        Ok(r.iter().map(|(&u, &w)| (u, w)))
    }

    pub fn degree(&self, v: Vertex) -> Result<usize, GraphError> {
        self.adj
            .get(&v)
            .map(|r| r.len())
            .ok_or(GraphError::UnknownVertex(v))
    }

    pub fn set_weight(&mut self, u: Vertex, v: Vertex, w: FieldElement) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        self.check(u)?;
        self.check(v)?;
        self.field.element(w.index())?;
        self.put(u, v, w);
        Ok(())
    }

    fn put(&mut self, u: Vertex, v: Vertex, w: FieldElement) {
        if w.is_zero() {
            self.adj.get_mut(&u).unwrap().remove(&v);
            self.adj.get_mut(&v).unwrap().remove(&u);
        } else {
            self.adj.get_mut(&u).unwrap().insert(v, w);
            self.adj.get_mut(&v).unwrap().insert(u, w);
        }
    }

    /// Local complementation `tau_v(m)`: `A_ij += m A_vi A_vj` for `i != j`.
    pub fn local_complement_in_place(
        &mut self,
        v: Vertex,
        m: FieldElement,
    ) -> Result<(), GraphError> {
        let nbrs = self.neighbors(v)?;
        if m.is_zero() {
            return Ok(());
        }
        let f = self.field.clone();
        for (a, &(i, wi)) in nbrs.iter().enumerate() {
            let mwi = f.mul(m, wi);
            for &(j, wj) in &nbrs[a + 1..] {
                let w = f.add(self.weight(i, j), f.mul(mwi, wj));
                self.put(i, j, w);
            }
        }
        Ok(())
    }

    /// Local multiplication `G o_m v`: row and column `v` scaled by `m`.
    pub fn local_multiply_in_place(
        &mut self,
        v: Vertex,
        m: FieldElement,
    ) -> Result<(), GraphError> {
        self.check(v)?;
        if m.is_zero() {
            return Err(GraphError::ZeroMultiplier);
        }
        let nbrs = self.neighbors(v)?;
        for (u, w) in nbrs {
            let w = self.field.mul(m, w);
            self.put(u, v, w);
        }
        Ok(())
    }

    /// `c` applications of the controlled-Z gate between `v` and `w`.
    pub fn apply_cz_in_place(
        &mut self,
        v: Vertex,
        w: Vertex,
        c: FieldElement,
    ) -> Result<(), GraphError> {
        if v == w {
            return Err(GraphError::SelfLoop(v));
        }
        self.check(v)?;
        self.check(w)?;
        let nw = self.field.add(self.weight(v, w), c);
        self.put(v, w, nw);
        Ok(())
    }

    pub fn delete_vertex_in_place(&mut self, v: Vertex) -> Result<(), GraphError> {
        let row = self.adj.remove(&v).ok_or(GraphError::UnknownVertex(v))?;
        for u in row.keys() {
            self.adj.get_mut(u).unwrap().remove(&v);
        }
        Ok(())
    }

    pub fn local_complement(&self, v: Vertex, m: FieldElement) -> Result<Self, GraphError> {
        let mut g = self.clone();
        g.local_complement_in_place(v, m)?;
        Ok(g)
    }

    pub fn local_multiply(&self, v: Vertex, m: FieldElement) -> Result<Self, GraphError> {
        let mut g = self.clone();
        g.local_multiply_in_place(v, m)?;
        Ok(g)
    }

    pub fn apply_cz(&self, v: Vertex, w: Vertex, c: FieldElement) -> Result<Self, GraphError> {
        let mut g = self.clone();
        g.apply_cz_in_place(v, w, c)?;
        Ok(g)
    }

    pub fn delete_vertex(&self, v: Vertex) -> Result<Self, GraphError> {
        let mut g = self.clone();
        g.delete_vertex_in_place(v)?;
        Ok(g)
    }

    /// Debug check of the representation invariants.
    pub fn is_consistent(&self) -> bool {
        self.adj.iter().all(|(&u, row)| {
            !row.contains_key(&u)
                && row.iter().all(|(&v, &w)| {
                    !w.is_zero() && w.index() < self.field.order() && self.weight(v, u) == w
                })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldCtx;
    use proptest::prelude::*;

    fn fe(x: u32) -> FieldElement {
        FieldElement::from_index_unchecked(x)
    }

    fn path(d: u32) -> WeightedGraph {
        let f = match d {
            4 => FieldCtx::new(2, 2),
            9 => FieldCtx::new(3, 2),
            _ => FieldCtx::new(d, 1),
        }
        .unwrap();
        WeightedGraph::linear_cluster(f, 3).unwrap()
    }

    #[test]
    fn complement_path_gives_triangle() {
        let g = path(2).local_complement(2, fe(1)).unwrap();
        assert_eq!(g.weight(1, 3), fe(1));
        assert_eq!(g.weight(1, 2), fe(1));
        assert_eq!(g.weight(2, 3), fe(1));
        let g3 = path(3).local_complement(2, fe(2)).unwrap();
        assert_eq!(g3.weight(1, 3), fe(2));
        assert_eq!(path(5).local_complement(2, fe(0)).unwrap(), path(5));
    }

    #[test]
    fn multiply_examples() {
        let f5 = FieldCtx::new(5, 1).unwrap();
        let mut star = WeightedGraph::new(f5, [0, 1, 2, 3]).unwrap();
        for (leaf, w) in [(1, 1), (2, 2), (3, 3)] {
            star.set_weight(0, leaf, fe(w)).unwrap();
        }
        let s = star.local_multiply(0, fe(3)).unwrap();
        assert_eq!(
            s.neighbors(0).unwrap(),
            vec![(1, fe(3)), (2, fe(1)), (3, fe(4))]
        );
        assert_eq!(
            star.local_multiply(0, fe(0)),
            Err(GraphError::ZeroMultiplier)
        );
        assert_eq!(star.local_multiply(0, fe(1)).unwrap(), star);
    }

    #[test]
    fn cz_examples() {
        let f3 = FieldCtx::new(3, 1).unwrap();
        let g = WeightedGraph::new(f3, [1, 2]).unwrap();
        let g1 = g.apply_cz(1, 2, fe(1)).unwrap();
        assert_eq!(g1.weight(1, 2), fe(1));
        let g2 = g1.apply_cz(1, 2, fe(2)).unwrap();
        assert_eq!(g2.neighbors(1).unwrap(), vec![]);
        assert_eq!(g.apply_cz(1, 1, fe(1)), Err(GraphError::SelfLoop(1)));
    }

    #[test]
    fn deletion_and_neighbors() {
        let g = path(3);
        assert_eq!(g.neighbors(2).unwrap(), vec![(1, fe(1)), (3, fe(1))]);
        assert_eq!(g.neighbors(1).unwrap(), vec![(2, fe(1))]);
        let h = g.delete_vertex(2).unwrap();
        assert_eq!(h.vertices().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(h.edges().count(), 0);
        assert_eq!(h.neighbors(3).unwrap(), vec![]);
        assert_eq!(g.neighbors(7), Err(GraphError::UnknownVertex(7)));
        assert_eq!(
            WeightedGraph::linear_cluster(g.field().clone(), 1),
            Err(GraphError::TooSmall(1))
        );
    }

    fn arb_graph() -> impl Strategy<Value = (WeightedGraph, Vertex, u32)> {
        (prop::sample::select(vec![2u32, 3, 4, 5, 9]), 1usize..=6)
            .prop_flat_map(|(d, n)| {
                let pairs = n * (n - 1) / 2;
                (
                    Just(d),
                    Just(n),
                    prop::collection::vec(0..d, pairs),
                    0..n as u32,
                    0..d,
                )
            })
            .prop_map(|(d, n, ws, v, m)| {
                let f = match d {
                    4 => FieldCtx::new(2, 2),
                    9 => FieldCtx::new(3, 2),
                    _ => FieldCtx::new(d, 1),
                }
                .unwrap();
                let mut g = WeightedGraph::new(f, 0..n as u32).unwrap();
                let mut k = 0;
                for i in 0..n as u32 {
                    for j in i + 1..n as u32 {
                        g.set_weight(i, j, fe(ws[k])).unwrap();
                        k += 1;
                    }
                }
                (g, v, m)
            })
    }

    proptest! {
        #[test]
        fn complement_is_undone_by_negated_factor((g, v, m) in arb_graph()) {
            let f = g.field().clone();
            let h = g.local_complement(v, fe(m)).unwrap();
            prop_assert!(h.is_consistent());
            prop_assert_eq!(h.local_complement(v, f.neg(fe(m))).unwrap(), g);
        }

        #[test]
        fn multiply_is_undone_by_inverse((g, v, m) in arb_graph()) {
            prop_assume!(m != 0);
            let f = g.field().clone();
            let h = g.local_multiply(v, fe(m)).unwrap();
            prop_assert!(h.is_consistent());
            prop_assert_eq!(h.local_multiply(v, f.inv(fe(m)).unwrap()).unwrap(), g);
        }

        #[test]
        fn complement_matches_entrywise_formula((g, v, m) in arb_graph()) {
            let f = g.field().clone();
            let h = g.local_complement(v, fe(m)).unwrap();
            for i in g.vertices() {
                for j in g.vertices() {
                    let expected = if i == j {
                        FieldElement::ZERO
                    } else {
                        f.add(g.weight(i, j), f.mul(fe(m), f.mul(g.weight(v, i), g.weight(v, j))))
                    };
                    prop_assert_eq!(h.weight(i, j), expected);
                }
            }
        }
    }
}
