use std::collections::{BTreeMap, BTreeSet};

use itertools::{EitherOrBoth, Itertools};
use serde::{Deserialize, Serialize};

use crate::gf::FieldElement;
use crate::graph::{GraphError, Vertex, WeightedGraph};
use crate::measure::{self, CorrectionRecord, MeasurementSpec};
use crate::prob::Probability;

use super::update::LinearUpdate;
use super::{NoiseChannel, NoiseError};

/// One step of an operation script.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operation {
    LocalComplement {
        vertex: Vertex,
        factor: FieldElement,
    },
    LocalMultiply {
        vertex: Vertex,
        factor: FieldElement,
    },
    Cz {
        a: Vertex,
        b: Vertex,
        count: FieldElement,
    },
    Measure(MeasurementSpec),
}

/// Instrumentation for a single operation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    /// Distinct `(vertex, exponent)` update contributions computed.
    pub rule_evaluations: usize,
    pub channels_touched: usize,
    pub terms_updated: usize,
}

/// A graph state together with the Pauli-diagonal channels acting on it.
///
/// Channels are updated independently; an index from vertices to the
/// channels whose support contains them limits each step to the channels an
/// operation can actually change.
#[derive(Clone, Debug)]
pub struct TrackedState<P> {
    graph: WeightedGraph,
    channels: Vec<NoiseChannel<P>>,
    corrections: Vec<CorrectionRecord>,
    /// Ascending channel indices per vertex.
    index: BTreeMap<Vertex, Vec<usize>>,
    history: Vec<StepStats>,
}

impl<P: Probability> TrackedState<P> {
    pub fn new(graph: WeightedGraph, channels: Vec<NoiseChannel<P>>) -> Result<Self, NoiseError> {
        let mut index: BTreeMap<Vertex, Vec<usize>> = BTreeMap::new();
        for (i, ch) in channels.iter().enumerate() {
            for v in ch.support() {
                if !graph.contains(v) {
                    return Err(NoiseError::UnknownVertex(v));
                }
                index.entry(v).or_default().push(i);
            }
        }
        Ok(TrackedState {
            graph,
            channels,
            corrections: Vec::new(),
            index,
            history: Vec::new(),
        })
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn channels(&self) -> &[NoiseChannel<P>] {
        &self.channels
    }

    pub fn corrections(&self) -> &[CorrectionRecord] {
        &self.corrections
    }

    pub fn history(&self) -> &[StepStats] {
        &self.history
    }

    pub fn into_parts(self) -> (WeightedGraph, Vec<NoiseChannel<P>>, Vec<CorrectionRecord>) {
        (self.graph, self.channels, self.corrections)
    }

    /// Applies one operation. On error the state is left unchanged.
    pub fn apply(&mut self, op: &Operation) -> Result<StepStats, NoiseError> {
        let f = self.graph.field().clone();
        let update = match op {
            Operation::LocalComplement { vertex, factor } => {
                LinearUpdate::local_complement(&self.graph, *vertex, *factor)?
            }
            Operation::LocalMultiply { vertex, factor } => {
                if !self.graph.contains(*vertex) {
                    return Err(GraphError::UnknownVertex(*vertex).into());
                }
                LinearUpdate::local_multiply(&f, *vertex, *factor)?
            }
            Operation::Cz { a, b, .. } => {
                if a == b {
                    return Err(GraphError::SelfLoop(*a).into());
                }
                for v in [a, b] {
                    if !self.graph.contains(*v) {
                        return Err(GraphError::UnknownVertex(*v).into());
                    }
                }
                LinearUpdate::cz()
            }
            Operation::Measure(spec) => LinearUpdate::measurement(&self.graph, spec)?,
        };

        // The update above captured everything it needs from the old graph.
        match op {
            Operation::LocalComplement { vertex, factor } => {
                self.graph.local_complement_in_place(*vertex, *factor)?
            }
            Operation::LocalMultiply { vertex, factor } => {
                self.graph.local_multiply_in_place(*vertex, *factor)?
            }
            Operation::Cz { a, b, count } => self.graph.apply_cz_in_place(*a, *b, *count)?,
            Operation::Measure(spec) => {
                let (record, _, _) = measure::measure_in_place(&mut self.graph, spec)?;
                self.corrections.push(record);
            }
        }

        let mut affected: Vec<usize> = Vec::new();
        for u in update.touched() {
            if let Some(set) = self.index.get(&u) {
                affected.extend(set.iter().copied());
            }
        }
        affected.sort_unstable();
        affected.dedup();

        let mut cache = update.cache(&f);
        let mut stats = StepStats {
            channels_touched: affected.len(),
            ..StepStats::default()
        };
        let dropped = update.dropped();
        let mut removals: Vec<(Vertex, usize)> = Vec::new();
        let mut additions: Vec<(Vertex, usize)> = Vec::new();
        for &ci in &affected {
            let channel = &mut self.channels[ci];
            let old_support = channel.support_sorted();
            stats.terms_updated += channel.len();
            for t in channel.terms_mut() {
                cache.apply_in_place(&f, &mut t.op);
            }
            channel.compact_in_place();
            let new_support = channel.support_sorted();
            diff_supports(
                ci,
                &old_support,
                &new_support,
                &mut removals,
                &mut additions,
            );
        }
        removals.retain(|&(v, _)| Some(v) != dropped);
        self.reindex(removals, additions);
        if let Some(v) = dropped {
            self.index.remove(&v);
        }
        stats.rule_evaluations = cache.evaluations();
        self.history.push(stats);
        Ok(stats)
    }

    /// Applies batched index changes. Both lists come in ascending channel
    /// order per vertex, so every vertex list is updated by one merge.
    fn reindex(&mut self, mut removals: Vec<(Vertex, usize)>, mut additions: Vec<(Vertex, usize)>) {
        removals.sort_unstable();
        additions.sort_unstable();
        for group in removals.chunk_by(|a, b| a.0 == b.0) {
            if let Some(list) = self.index.get_mut(&group[0].0) {
                let mut gone = group.iter().map(|&(_, c)| c).peekable();
                list.retain(|c| {
                    while gone.next_if(|g| g < c).is_some() {}
                    gone.next_if_eq(c).is_none()
                });
                if list.is_empty() {
                    self.index.remove(&group[0].0);
                }
            }
        }
        for group in additions.chunk_by(|a, b| a.0 == b.0) {
            let list = self.index.entry(group[0].0).or_default();
            let fresh = group.iter().map(|&(_, c)| c);
            if list.last().is_none_or(|&l| l < group[0].1) {
                list.extend(fresh);
            } else {
                let old = std::mem::take(list);
                *list = old.into_iter().merge(fresh).collect();
            }
        }
    }

    /// Rebuilds the vertex index from scratch and compares; for tests.
    pub fn index_is_consistent(&self) -> bool {
        let mut fresh: BTreeMap<Vertex, BTreeSet<usize>> = BTreeMap::new();
        for (i, ch) in self.channels.iter().enumerate() {
            for v in ch.support() {
                fresh.entry(v).or_default().insert(i);
            }
        }
        let cleaned: BTreeMap<Vertex, BTreeSet<usize>> = self
            .index
            .iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(k, s)| (*k, s.iter().copied().collect()))
            .collect();
        fresh == cleaned
            && self
                .channels
                .iter()
                .all(|ch| ch.support().iter().all(|v| self.graph.contains(*v)))
    }
}

fn diff_supports(
    ci: usize,
    old: &[Vertex],
    new: &[Vertex],
    removals: &mut Vec<(Vertex, usize)>,
    additions: &mut Vec<(Vertex, usize)>,
) {
    for item in old.iter().merge_join_by(new.iter(), |a, b| a.cmp(b)) {
        match item {
            EitherOrBoth::Left(&v) => removals.push((v, ci)),
            EitherOrBoth::Right(&v) => additions.push((v, ci)),
            EitherOrBoth::Both(..) => {}
        }
    }
}

/// Runs a whole script.
pub fn nsf_apply<P: Probability>(
    mut state: TrackedState<P>,
    script: &[Operation],
) -> Result<TrackedState<P>, NoiseError> {
    for op in script {
        state.apply(op)?;
    }
    Ok(state)
}
