//! Graph-level rules for single-qudit Weyl measurements.
//!
//! Every rule is realised the same way: a short Clifford `C` built from
//! local complementations and local multiplications maps the measured
//! Weyl operator onto `Z_v`. Measuring `Z_v` deletes `v` and leaves the
//! byproduct `Z(b A_v)`; undoing the parts of `C` that act on the surviving
//! qudits yields the correction `U`.
//!
//! | basis `(z, x)`          | reduction `C` (first step first)                 |
//! |-------------------------|--------------------------------------------------|
//! | `z != 0`                | `tau_v(x/z)`, then `o_{1/z} v`                   |
//! | `z = 0`, `v` connected  | `o_x v`, then `tau_{w0}(r)`, then `tau_v(1)`     |
//! | `z = 0`, `v` isolated   | none; `v` is simply removed                      |
//!
//! with `r = -(A'_{w0 v})^{-2}` read from the graph after `o_x v`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{FieldElement, GfError};
use crate::graph::{GraphError, Vertex, WeightedGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MeasureError {
    #[error("cannot measure the identity: basis (0, 0)")]
    TrivialBasis,
    #[error("vertex {v}: {w0} is not a neighbour and cannot serve as w0")]
    InvalidNeighbor { v: Vertex, w0: Vertex },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Single-qudit symplectic label `(z, x)` of `W(z, x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WeylIndex {
    pub z: FieldElement,
    pub x: FieldElement,
}

impl WeylIndex {
    pub fn new(z: FieldElement, x: FieldElement) -> Self {
        WeylIndex { z, x }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementSpec {
    pub vertex: Vertex,
    pub basis: WeylIndex,
    pub outcome: FieldElement,
    /// Neighbour used by X-type rules; defaults to the smallest-label neighbour.
    pub neighbor: Option<Vertex>,
}

impl MeasurementSpec {
    pub fn new(vertex: Vertex, basis: WeylIndex, outcome: FieldElement) -> Self {
        MeasurementSpec {
            vertex,
            basis,
            outcome,
            neighbor: None,
        }
    }

    pub fn with_neighbor(mut self, w0: Vertex) -> Self {
        self.neighbor = Some(w0);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RuleTag {
    Z,
    YType,
    X,
    XM,
    WNM,
    Isolated,
}

/// Case split on the basis alone. `Isolated` is never returned here; it
/// depends on the graph and is reported by [`measure`].
pub fn classify(basis: WeylIndex) -> Result<RuleTag, MeasureError> {
    let WeylIndex { z, x } = basis;
    Ok(match (z.index(), x.index()) {
        (0, 0) => return Err(MeasureError::TrivialBasis),
        (1, 0) => RuleTag::Z,
        (1, _) => RuleTag::YType,
        (0, 1) => RuleTag::X,
        (0, _) => RuleTag::XM,
        _ => RuleTag::WNM,
    })
}

/// One gate of a correction, with field-element parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    /// `Z(z)` on several qudits.
    Z {
        exponents: Vec<(Vertex, FieldElement)>,
    },
    /// `S(lambda_u)` on each listed qudit, or its adjoint.
    S {
        entries: Vec<(Vertex, FieldElement)>,
        adjoint: bool,
    },
    /// `R(lambda) = H S(lambda) H^dagger` on one qudit, or its adjoint.
    R {
        vertex: Vertex,
        lambda: FieldElement,
        adjoint: bool,
    },
    /// The multiplication gate `M(lambda)|x> = |lambda x>`.
    M {
        vertex: Vertex,
        lambda: FieldElement,
    },
}

impl Gate {
    pub fn vertices(&self) -> Vec<Vertex> {
        match self {
            Gate::Z { exponents: e } | Gate::S { entries: e, .. } => {
                e.iter().map(|&(v, _)| v).collect()
            }
            Gate::R { vertex, .. } | Gate::M { vertex, .. } => vec![*vertex],
        }
    }
}

/// The correction `U` of one measurement, as gates in application order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorrectionRecord {
    pub measured: Vertex,
    pub rule: Option<RuleTag>,
    pub gates: Vec<Gate>,
}

/// A step of the reduction `C`, expressed as the graph operation it induces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionStep {
    Complement {
        vertex: Vertex,
        factor: FieldElement,
    },
    Multiply {
        vertex: Vertex,
        factor: FieldElement,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Measured {
    pub graph: WeightedGraph,
    pub correction: CorrectionRecord,
    pub rule: RuleTag,
    /// The neighbour actually used by an X-type rule.
    pub neighbor: Option<Vertex>,
}

/// The X-type neighbour: the requested one after validation, else the
/// smallest-label neighbour. `None` for isolated vertices.
pub fn resolve_neighbor(
    g: &WeightedGraph,
    spec: &MeasurementSpec,
) -> Result<Option<Vertex>, MeasureError> {
    let v = spec.vertex;
    let nbrs = g.neighbors(v)?;
    match spec.neighbor {
        Some(w0) if nbrs.iter().any(|&(u, _)| u == w0) => Ok(Some(w0)),
        Some(w0) => Err(MeasureError::InvalidNeighbor { v, w0 }),
        None => Ok(nbrs.first().map(|&(u, _)| u)),
    }
}

/// The reduction steps for `spec`, together with the rule tag and the
/// X-type neighbour. Steps refer to the graph as it evolves.
pub fn reduction(
    g: &WeightedGraph,
    spec: &MeasurementSpec,
) -> Result<(RuleTag, Vec<ReductionStep>, Option<Vertex>), MeasureError> {
    let f = g.field();
    let v = spec.vertex;
    let tag = classify(spec.basis)?;
    if !g.contains(v) {
        return Err(GraphError::UnknownVertex(v).into());
    }
    let WeylIndex { z, x } = spec.basis;
    if !z.is_zero() {
        let steps = vec![
            ReductionStep::Complement {
                vertex: v,
                factor: f.div(x, z)?,
            },
            ReductionStep::Multiply {
                vertex: v,
                factor: f.inv(z)?,
            },
        ];
        return Ok((tag, steps, None));
    }
    let Some(w0) = resolve_neighbor(g, spec)? else {
        return Ok((RuleTag::Isolated, Vec::new(), None));
    };
    let a = f.mul(x, g.weight(w0, v));
    let r = f.neg(f.inv(f.mul(a, a))?);
    let steps = vec![
        ReductionStep::Multiply {
            vertex: v,
            factor: x,
        },
        ReductionStep::Complement {
            vertex: w0,
            factor: r,
        },
        ReductionStep::Complement {
            vertex: v,
            factor: FieldElement::ONE,
        },
    ];
    Ok((tag, steps, Some(w0)))
}

/// Measures `W_v(z, x)` with outcome `b` in place; returns the correction.
pub fn measure_in_place(
    g: &mut WeightedGraph,
    spec: &MeasurementSpec,
) -> Result<(CorrectionRecord, RuleTag, Option<Vertex>), MeasureError> {
    let (tag, steps, w0) = reduction(g, spec)?;
    let f = g.field().clone();
    let v = spec.vertex;

    // Inverse of each step restricted to the surviving qudits.
    let mut inverses: Vec<Vec<Gate>> = Vec::with_capacity(steps.len());
    for step in &steps {
        match *step {
            ReductionStep::Complement { vertex: u, factor } => {
                // tau_u(m) is induced by R_u(m) (x) S_j(m A_uj^2)^dagger.
                let mut group = Vec::new();
                let entries: Vec<(Vertex, FieldElement)> = g
                    .row(u)?
                    .filter(|&(j, _)| j != v)
                    .map(|(j, w)| (j, f.mul(factor, f.mul(w, w))))
                    .filter(|(_, l)| !l.is_zero())
                    .collect();
                if !entries.is_empty() {
                    group.push(Gate::S {
                        entries,
                        adjoint: false,
                    });
                }
                if u != v && !factor.is_zero() {
                    group.push(Gate::R {
                        vertex: u,
                        lambda: factor,
                        adjoint: true,
                    });
                }
                inverses.push(group);
                g.local_complement_in_place(u, factor)?;
            }
            ReductionStep::Multiply { vertex: u, factor } => {
                // o_m u is induced by M_u(1/m); its inverse is M_u(m).
                let group = if u != v {
                    vec![Gate::M {
                        vertex: u,
                        lambda: factor,
                    }]
                } else {
                    Vec::new()
                };
                inverses.push(group);
                g.local_multiply_in_place(u, factor)?;
            }
        }
    }

    // For qubits, S_v conjugation in tau_{w0} maps Y to -X rather than X,
    // so the intermediate W(1,1) outcome is b + 1.
    let b = match tag {
        RuleTag::X | RuleTag::XM if f.p() == 2 => f.add(spec.outcome, FieldElement::ONE),
        _ => spec.outcome,
    };
    let mut gates = Vec::new();
    if tag != RuleTag::Isolated {
        let exponents: Vec<(Vertex, FieldElement)> = g
            .row(v)?
            .map(|(j, w)| (j, f.mul(b, w)))
            .filter(|(_, e)| !e.is_zero())
            .collect();
        if !exponents.is_empty() {
            gates.push(Gate::Z { exponents });
        }
    }
    for group in inverses.into_iter().rev() {
        gates.extend(group);
    }
    g.delete_vertex_in_place(v)?;
    Ok((
        CorrectionRecord {
            measured: v,
            rule: Some(tag),
            gates,
        },
        tag,
        w0,
    ))
}

pub fn measure(g: &WeightedGraph, spec: &MeasurementSpec) -> Result<Measured, MeasureError> {
    let mut graph = g.clone();
    let (correction, rule, neighbor) = measure_in_place(&mut graph, spec)?;
    Ok(Measured {
        graph,
        correction,
        rule,
        neighbor,
    })
}
