//! Update rules: how a Z-type word changes when a graph manipulation or a
//! measurement is commuted past it.
//!
//! Every rule is affine in the word: `op' = op + sum_u op_u * row_u`, followed
//! by deleting the measured coordinate. Only the coordinates `u` listed as
//! sources matter, which is what makes tracking local.

use smallvec::SmallVec;

use crate::gf::{FieldCtx, FieldElement};
use crate::graph::{GraphError, Vertex, WeightedGraph};
use crate::measure::{self, MeasurementSpec, RuleTag};

use super::{NoiseError, ZNoiseVector};

/// The affine map of one operation, built from the pre-operation graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearUpdate {
    sources: SmallVec<[(Vertex, ZNoiseVector); 2]>,
    drop: Option<Vertex>,
}

impl LinearUpdate {
    pub fn identity() -> Self {
        LinearUpdate {
            sources: SmallVec::new(),
            drop: None,
        }
    }

    /// `G o_m v`, realised by `M_v(1/m)`: the exponent at `v` is multiplied by `m`.
    pub fn local_multiply(f: &FieldCtx, v: Vertex, m: FieldElement) -> Result<Self, NoiseError> {
        if m.is_zero() {
            return Err(GraphError::ZeroMultiplier.into());
        }
        let mut sources = SmallVec::new();
        let delta = f.sub(m, FieldElement::ONE);
        if !delta.is_zero() {
            sources.push((v, ZNoiseVector::unit(v, delta)));
        }
        Ok(LinearUpdate {
            sources,
            drop: None,
        })
    }

    /// `tau_v(m)`: `op += m op_v A_v`.
    pub fn local_complement(
        g: &WeightedGraph,
        v: Vertex,
        m: FieldElement,
    ) -> Result<Self, NoiseError> {
        let row = scaled_row(g, v, m)?;
        let mut sources = SmallVec::new();
        if !row.is_identity() {
            sources.push((v, row));
        }
        Ok(LinearUpdate {
            sources,
            drop: None,
        })
    }

    pub fn cz() -> Self {
        Self::identity()
    }

    /// Closed-form measurement rule.
    ///
    /// For `z != 0`: `op + op_v (x/z) A_v`. For `z = 0` with neighbour `w0`,
    /// with `A'` the graph after `o_x v` and `A''` after additionally
    /// `tau_{w0}(r)`: `op + op_v x A''_v + op_{w0} r (A'_{w0} + A'_{w0 v} A''_v)`.
    /// In every case coordinate `v` is then dropped.
    pub fn measurement(g: &WeightedGraph, spec: &MeasurementSpec) -> Result<Self, NoiseError> {
        let f = g.field();
        let v = spec.vertex;
        let (tag, _, w0) = measure::reduction(g, spec)?;
        let (z, x) = (spec.basis.z, spec.basis.x);
        let mut sources: SmallVec<[(Vertex, ZNoiseVector); 2]> = SmallVec::new();
        match (tag, w0) {
            (RuleTag::Isolated, _) => {}
            (_, None) => {
                let row = scaled_row(g, v, f.div(x, z)?)?;
                if !row.is_identity() {
                    sources.push((v, row));
                }
            }
            (_, Some(w0)) => {
                let g1 = g.local_multiply(v, x)?;
                let a = g1.weight(w0, v);
                let r = f.neg(f.inv(f.mul(a, a))?);
                let g2 = g1.local_complement(w0, r)?;
                let a2_v = scaled_row(&g2, v, FieldElement::ONE)?;
                sources.push((v, a2_v.scale(f, x)));
                let w_row = scaled_row(&g1, w0, r)?.add(f, &a2_v.scale(f, f.mul(r, a)));
                sources.push((w0, w_row));
            }
        }
        for (_, row) in sources.iter_mut() {
            row.remove(v);
        }
        sources.retain(|(_, row)| !row.is_identity());
        Ok(LinearUpdate {
            sources,
            drop: Some(v),
        })
    }

    /// Vertices whose exponent feeds into the update, plus the dropped one.
    pub fn touched(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.sources.iter().map(|(u, _)| *u).chain(self.drop)
    }

    pub fn sources(&self) -> impl Iterator<Item = (Vertex, &ZNoiseVector)> {
        self.sources.iter().map(|(u, r)| (*u, r))
    }

    pub fn dropped(&self) -> Option<Vertex> {
        self.drop
    }

    pub fn apply(&self, f: &FieldCtx, op: &ZNoiseVector) -> ZNoiseVector {
        let mut out = op.clone();
        for (u, row) in &self.sources {
            let c = op.get(*u);
            if !c.is_zero() {
                out = out.add(f, &row.scale(f, c));
            }
        }
        if let Some(v) = self.drop {
            out.remove(v);
        }
        out
    }

    /// The memoising evaluator used by the engine.
    pub fn cache(&self, f: &FieldCtx) -> RuleCache<'_> {
        RuleCache {
            update: self,
            rows: vec![vec![None; f.order() as usize]; self.sources.len()],
            evaluations: 0,
        }
    }
}

fn scaled_row(g: &WeightedGraph, v: Vertex, m: FieldElement) -> Result<ZNoiseVector, NoiseError> {
    let f = g.field();
    Ok(ZNoiseVector::from_entries(
        f,
        g.row(v)?.map(|(u, a)| (u, f.mul(m, a))),
    ))
}

/// Evaluates a [`LinearUpdate`] while computing each distinct
/// `(source vertex, exponent)` contribution only once.
pub struct RuleCache<'a> {
    update: &'a LinearUpdate,
    rows: Vec<Vec<Option<ZNoiseVector>>>,
    evaluations: usize,
}

impl RuleCache<'_> {
    /// Number of distinct `(vertex, exponent)` contributions computed so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Precomputes the contributions needed by `ops`.
    pub fn prepare<'o>(&mut self, f: &FieldCtx, ops: impl IntoIterator<Item = &'o ZNoiseVector>) {
        for op in ops {
            for (k, (u, row)) in self.update.sources.iter().enumerate() {
                let c = op.get(*u);
                if !c.is_zero() && self.rows[k][c.index() as usize].is_none() {
                    self.rows[k][c.index() as usize] = Some(row.scale(f, c));
                    self.evaluations += 1;
                }
            }
        }
    }

    pub fn apply(&mut self, f: &FieldCtx, op: &ZNoiseVector) -> ZNoiseVector {
        self.prepare(f, std::iter::once(op));
        self.apply_prepared(f, op)
    }

    /// Updates `op` in place. Words without weight on any source vertex are
    /// only stripped of the dropped vertex.
    pub fn apply_in_place(&mut self, f: &FieldCtx, op: &mut ZNoiseVector) {
        let mut acc: Option<ZNoiseVector> = None;
        for k in 0..self.update.sources.len() {
            let (u, row) = &self.update.sources[k];
            let c = op.get(*u);
            if c.is_zero() {
                continue;
            }
            let slot = &mut self.rows[k][c.index() as usize];
            if slot.is_none() {
                *slot = Some(row.scale(f, c));
                self.evaluations += 1;
            }
            let contribution = slot.as_ref().expect("just filled");
            let base = acc.as_ref().unwrap_or(op);
            acc = Some(base.add(f, contribution));
        }
        if let Some(out) = acc {
            *op = out;
        }
        if let Some(v) = self.update.drop {
            op.remove(v);
        }
    }

    /// Like [`RuleCache::apply`] but requires `prepare` to have covered `op`.
    pub fn apply_prepared(&self, f: &FieldCtx, op: &ZNoiseVector) -> ZNoiseVector {
        let mut out = op.clone();
        for (k, (u, _)) in self.update.sources.iter().enumerate() {
            let c = op.get(*u);
            if !c.is_zero() {
                let row = self.rows[k][c.index() as usize]
                    .as_ref()
                    .expect("contribution was prepared");
                out = out.add(f, row);
            }
        }
        if let Some(v) = self.update.drop {
            out.remove(v);
        }
        out
    }
}

pub fn update_for_local_multiply(
    op: &ZNoiseVector,
    f: &FieldCtx,
    v: Vertex,
    m: FieldElement,
) -> Result<ZNoiseVector, NoiseError> {
    Ok(LinearUpdate::local_multiply(f, v, m)?.apply(f, op))
}

/// Uses `g` before the complementation.
pub fn update_for_local_complement(
    op: &ZNoiseVector,
    g: &WeightedGraph,
    v: Vertex,
    m: FieldElement,
) -> Result<ZNoiseVector, NoiseError> {
    Ok(LinearUpdate::local_complement(g, v, m)?.apply(g.field(), op))
}

/// Controlled-Z gates commute with Z-type noise.
pub fn update_for_cz(op: &ZNoiseVector) -> ZNoiseVector {
    op.clone()
}

/// Uses `g` before the measurement; the result lives on the surviving vertices.
pub fn update_for_measurement(
    op: &ZNoiseVector,
    g: &WeightedGraph,
    spec: &MeasurementSpec,
) -> Result<ZNoiseVector, NoiseError> {
    Ok(LinearUpdate::measurement(g, spec)?.apply(g.field(), op))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{Field, FieldCtx};
    use crate::measure::{ReductionStep, WeylIndex};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fe(x: u32) -> FieldElement {
        FieldElement::from_index_unchecked(x)
    }

    fn path(p: u32) -> WeightedGraph {
        WeightedGraph::linear_cluster(FieldCtx::new(p, 1).unwrap(), 3).unwrap()
    }

    #[test]
    fn multiply_rule() {
        let f5 = FieldCtx::new(5, 1).unwrap();
        let op = ZNoiseVector::unit(1, fe(1));
        assert_eq!(
            update_for_local_multiply(&op, &f5, 1, fe(2)).unwrap(),
            ZNoiseVector::unit(1, fe(2))
        );
        assert_eq!(update_for_local_multiply(&op, &f5, 1, fe(1)).unwrap(), op);
        assert_eq!(update_for_local_multiply(&op, &f5, 2, fe(3)).unwrap(), op);
        assert!(update_for_local_multiply(&op, &f5, 1, fe(0)).is_err());
    }

    #[test]
    fn complement_rule() {
        let g = path(3);
        let op = ZNoiseVector::unit(2, fe(1));
        let out = update_for_local_complement(&op, &g, 2, fe(1)).unwrap();
        assert_eq!(out.to_dense(&[1, 2, 3]), vec![fe(1); 3]);
        let other = ZNoiseVector::unit(1, fe(2));
        assert_eq!(
            update_for_local_complement(&other, &g, 2, fe(1)).unwrap(),
            other
        );

        let f2 = FieldCtx::new(2, 1).unwrap();
        let mut star = WeightedGraph::new(f2, [0, 1, 2]).unwrap();
        star.set_weight(0, 1, fe(1)).unwrap();
        star.set_weight(0, 2, fe(1)).unwrap();
        let out =
            update_for_local_complement(&ZNoiseVector::unit(0, fe(1)), &star, 0, fe(1)).unwrap();
        assert_eq!(out.to_dense(&[0, 1, 2]), vec![fe(1); 3]);
    }

    #[test]
    fn measurement_rule_examples() {
        let g = path(3);
        let op = ZNoiseVector::unit(2, fe(1));
        let y = MeasurementSpec::new(2, WeylIndex::new(fe(1), fe(1)), fe(0));
        assert_eq!(
            update_for_measurement(&op, &g, &y)
                .unwrap()
                .to_dense(&[1, 3]),
            vec![fe(1), fe(1)]
        );
        let z = MeasurementSpec::new(2, WeylIndex::new(fe(1), fe(0)), fe(0));
        assert!(update_for_measurement(&op, &g, &z).unwrap().is_identity());
        let far = ZNoiseVector::unit(3, fe(2));
        let x = MeasurementSpec::new(2, WeylIndex::new(fe(0), fe(1)), fe(0)).with_neighbor(1);
        assert_eq!(update_for_measurement(&far, &g, &x).unwrap(), far);
        assert_eq!(update_for_cz(&far), far);
    }

    fn random_graph(rng: &mut ChaCha8Rng, f: &Field, n: u32) -> WeightedGraph {
        let mut g = WeightedGraph::new(f.clone(), 1..=n).unwrap();
        for i in 1..=n {
            for j in i + 1..=n {
                if rng.random_bool(0.6) {
                    g.set_weight(i, j, fe(rng.random_range(0..f.order())))
                        .unwrap();
                }
            }
        }
        g
    }

    /// The closed-form rule equals the concatenation of the building-block
    /// rules along the reduction steps followed by the Z-measurement rule.
    #[test]
    fn closed_form_matches_concatenation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, m) in [(2, 1), (3, 1), (5, 1), (2, 2), (3, 2), (7, 1)] {
            let f = FieldCtx::new(p, m).unwrap();
            for _ in 0..200 {
                let n = rng.random_range(1..=5);
                let g = random_graph(&mut rng, &f, n);
                let v = rng.random_range(1..=n);
                let basis = loop {
                    let b = WeylIndex::new(
                        fe(rng.random_range(0..f.order())),
                        fe(rng.random_range(0..f.order())),
                    );
                    if !(b.z.is_zero() && b.x.is_zero()) {
                        break b;
                    }
                };
                let spec = MeasurementSpec::new(v, basis, fe(0));
                let op = ZNoiseVector::from_entries(
                    &f,
                    (1..=n).map(|u| (u, fe(rng.random_range(0..f.order())))),
                );
                let closed = update_for_measurement(&op, &g, &spec).unwrap();

                let (_, steps, _) = measure::reduction(&g, &spec).unwrap();
                let mut h = g.clone();
                let mut acc = op.clone();
                for s in steps {
                    match s {
                        ReductionStep::Complement { vertex, factor } => {
                            acc = update_for_local_complement(&acc, &h, vertex, factor).unwrap();
                            h.local_complement_in_place(vertex, factor).unwrap();
                        }
                        ReductionStep::Multiply { vertex, factor } => {
                            acc =
                                update_for_local_multiply(&acc, h.field(), vertex, factor).unwrap();
                            h.local_multiply_in_place(vertex, factor).unwrap();
                        }
                    }
                }
                acc.remove(v);
                assert_eq!(closed, acc, "GF({p}^{m}) {g:?} v={v} basis={basis:?}");
            }
        }
    }

    #[test]
    fn cache_counts_distinct_contributions() {
        let g = path(5);
        let up = LinearUpdate::local_complement(&g, 2, fe(1)).unwrap();
        let f = g.field().clone();
        let mut cache = up.cache(&f);
        for c in [1, 2, 1, 3, 0, 2] {
            let op = ZNoiseVector::unit(2, fe(c));
            assert_eq!(cache.apply(&f, &op), up.apply(&f, &op));
        }
        assert_eq!(cache.evaluations(), 3);
    }
}
