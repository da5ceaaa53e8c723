//! JSON formats for fields, graphs, channels, operation scripts and results.
//!
//! Field elements are arrays of `m` integer coefficients, low degree first.
//! Probabilities may be JSON numbers or strings such as `"1/3"`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::gf::{FieldCtx, FieldElement, FieldHeader, GfError};
use crate::graph::{GraphError, Vertex, WeightedGraph};
use crate::measure::{CorrectionRecord, Gate, MeasurementSpec, WeylIndex};
use crate::noise::{
    dephasing_channel, depolarizing_channel, pauli_channel, NoiseChannel, NoiseError, Operation,
    ZNoiseVector,
};
use crate::prob::Probability;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: entry {entry}: {message}")]
    Invalid {
        path: String,
        entry: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    File { path: String, message: String },
}

impl IoError {
    fn invalid(path: &str, entry: usize, message: impl ToString) -> Self {
        IoError::Invalid {
            path: path.to_string(),
            entry,
            message: message.to_string(),
        }
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &str, text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Parse {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Parses a coefficient array of length exactly `m`.
pub fn element_from_json(f: &FieldCtx, coeffs: &[i64]) -> Result<FieldElement, GfError> {
    f.from_coeffs(coeffs)
}

pub fn element_to_json(f: &FieldCtx, x: FieldElement) -> Vec<u32> {
    f.coeffs(x)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub u: Vertex,
    pub v: Vertex,
    pub w: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub field: FieldHeader,
    pub vertices: Vec<Vertex>,
    #[serde(default)]
    pub edges: Vec<EdgeJson>,
}

impl GraphJson {
    pub fn from_graph(g: &WeightedGraph) -> Self {
        let f = g.field();
        GraphJson {
            field: f.header(),
            vertices: g.vertices().collect(),
            edges: g
                .edges()
                .map(|(u, v, w)| EdgeJson {
                    u,
                    v,
                    w: f.coeffs(w).into_iter().map(i64::from).collect(),
                })
                .collect(),
        }
    }

    pub fn to_graph(&self, path: &str) -> Result<WeightedGraph, IoError> {
        let f = FieldCtx::from_header(&self.field)
            .map_err(|e| IoError::invalid(path, 0, format!("field: {e}")))?;
        let mut g = WeightedGraph::new(f.clone(), self.vertices.iter().copied())
            .map_err(|e| IoError::invalid(path, 0, e))?;
        for (i, e) in self.edges.iter().enumerate() {
            let w = element_from_json(&f, &e.w).map_err(|err| {
                IoError::invalid(path, i, format!("edge ({}, {}): {err}", e.u, e.v))
            })?;
            g.set_weight(e.u, e.v, w)
                .map_err(|err| IoError::invalid(path, i, err))?;
        }
        Ok(g)
    }
}

pub fn parse_graph(path: &str, text: &str) -> Result<WeightedGraph, IoError> {
    parse_json::<GraphJson>(path, text)?.to_graph(path)
}

pub fn graph_to_json(g: &WeightedGraph) -> Value {
    serde_json::to_value(GraphJson::from_graph(g)).expect("graph serializes")
}

fn probability<P: Probability>(v: &Value) -> Result<P, String> {
    match v {
        Value::Number(n) => P::parse(&n.to_string()).map_err(|e| e.to_string()),
        Value::String(s) => P::parse(s).map_err(|e| e.to_string()),
        other => Err(format!("expected a probability, got {other}")),
    }
}

fn probability_to_json<P: Probability>(p: &P) -> Value {
    if P::EXACT {
        Value::String(p.to_string())
    } else {
        json!(p.to_f64())
    }
}

fn field_of<T: for<'de> Deserialize<'de>>(obj: &Value, key: &str) -> Result<T, String> {
    let v = obj
        .get(key)
        .ok_or_else(|| format!("missing field {key:?}"))?;
    T::deserialize(v).map_err(|e| format!("field {key:?}: {e}"))
}

fn word(f: &FieldCtx, vertices: &[Vertex], rows: &[Vec<i64>]) -> Result<ZNoiseVector, String> {
    if rows.len() != vertices.len() {
        return Err(format!(
            "expected {} per-vertex entries, got {}",
            vertices.len(),
            rows.len()
        ));
    }
    let mut values = Vec::with_capacity(rows.len());
    for r in rows {
        values.push(element_from_json(f, r).map_err(|e| e.to_string())?);
    }
    Ok(ZNoiseVector::from_entries(
        f,
        vertices.iter().copied().zip(values),
    ))
}

/// Parses one channel. Pauli terms list one coefficient array per vertex,
/// in the order of the optional `"vertices"` field, else of the graph.
pub fn channel_from_json<P: Probability>(
    g: &WeightedGraph,
    obj: &Value,
) -> Result<NoiseChannel<P>, String> {
    let kind: String = field_of(obj, "type")?;
    match kind.as_str() {
        "depolarizing" | "dephasing" => {
            let v: Vertex = field_of(obj, "v")?;
            let lambda = probability::<P>(obj.get("lambda").ok_or("missing field \"lambda\"")?)?;
            let ch = if kind == "depolarizing" {
                depolarizing_channel(g, v, lambda)
            } else {
                dephasing_channel(g, v, lambda)
            };
            ch.map_err(|e| e.to_string())
        }
        "pauli" => {
            let vertices: Vec<Vertex> = match obj.get("vertices") {
                Some(_) => field_of(obj, "vertices")?,
                None => g.vertices().collect(),
            };
            let terms: Vec<Value> = field_of(obj, "terms")?;
            let f = g.field();
            let mut parsed = Vec::with_capacity(terms.len());
            for (k, t) in terms.iter().enumerate() {
                let p = probability::<P>(
                    t.get("p")
                        .ok_or_else(|| format!("term {k}: missing field \"p\""))?,
                )
                .map_err(|e| format!("term {k}: {e}"))?;
                let z: Vec<Vec<i64>> = field_of(t, "z").map_err(|e| format!("term {k}: {e}"))?;
                let x: Vec<Vec<i64>> = field_of(t, "x").map_err(|e| format!("term {k}: {e}"))?;
                parsed.push((p, word(f, &vertices, &z)?, word(f, &vertices, &x)?));
            }
            pauli_channel(g, parsed).map_err(|e| e.to_string())
        }
        other => Err(NoiseError::NonPauliDiagonal(other.to_string()).to_string()),
    }
}

pub fn parse_channels<P: Probability>(
    path: &str,
    text: &str,
    g: &WeightedGraph,
) -> Result<Vec<NoiseChannel<P>>, IoError> {
    let entries: Vec<Value> = parse_json(path, text)?;
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| channel_from_json(g, e).map_err(|m| IoError::invalid(path, i, m)))
        .collect()
}

pub fn channel_to_json<P: Probability>(f: &FieldCtx, ch: &NoiseChannel<P>) -> Value {
    let terms: Vec<Value> = ch
        .terms()
        .iter()
        .map(|t| {
            let z: BTreeMap<String, Vec<u32>> =
                t.op.entries()
                    .iter()
                    .map(|&(v, x)| (v.to_string(), f.coeffs(x)))
                    .collect();
            json!({ "p": probability_to_json(&t.probability), "z": z })
        })
        .collect();
    json!({ "terms": terms })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
enum OpJson {
    Measure {
        v: Vertex,
        z: Vec<i64>,
        x: Vec<i64>,
        b: Vec<i64>,
        #[serde(default)]
        w0: Option<Vertex>,
    },
    LocalComplement {
        v: Vertex,
        m: Vec<i64>,
    },
    LocalMultiply {
        v: Vertex,
        m: Vec<i64>,
    },
    Cz {
        u: Vertex,
        v: Vertex,
        #[serde(default)]
        c: Option<Vec<i64>>,
    },
}

fn op_from_json(f: &FieldCtx, op: &OpJson) -> Result<Operation, GfError> {
    Ok(match op {
        OpJson::Measure { v, z, x, b, w0 } => {
            let spec = MeasurementSpec::new(
                *v,
                WeylIndex::new(element_from_json(f, z)?, element_from_json(f, x)?),
                element_from_json(f, b)?,
            );
            Operation::Measure(match w0 {
                Some(w) => spec.with_neighbor(*w),
                None => spec,
            })
        }
        OpJson::LocalComplement { v, m } => Operation::LocalComplement {
            vertex: *v,
            factor: element_from_json(f, m)?,
        },
        OpJson::LocalMultiply { v, m } => Operation::LocalMultiply {
            vertex: *v,
            factor: element_from_json(f, m)?,
        },
        OpJson::Cz { u, v, c } => Operation::Cz {
            a: *u,
            b: *v,
            count: match c {
                Some(c) => element_from_json(f, c)?,
                None => FieldElement::ONE,
            },
        },
    })
}

/// Parses an operation script: `measure`, `local_complement`, `local_multiply` or `cz` entries.
pub fn parse_ops(path: &str, text: &str, f: &FieldCtx) -> Result<Vec<Operation>, IoError> {
    let entries: Vec<Value> = parse_json(path, text)?;
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let op = OpJson::deserialize(e).map_err(|err| IoError::invalid(path, i, err))?;
            op_from_json(f, &op).map_err(|err| IoError::invalid(path, i, err))
        })
        .collect()
}

pub fn op_to_json(f: &FieldCtx, op: &Operation) -> Value {
    match op {
        Operation::Measure(s) => {
            let mut v = json!({
                "op": "measure",
                "v": s.vertex,
                "z": f.coeffs(s.basis.z),
                "x": f.coeffs(s.basis.x),
                "b": f.coeffs(s.outcome),
            });
            if let Some(w0) = s.neighbor {
                v["w0"] = json!(w0);
            }
            v
        }
        Operation::LocalComplement { vertex, factor } => {
            json!({ "op": "local_complement", "v": vertex, "m": f.coeffs(*factor) })
        }
        Operation::LocalMultiply { vertex, factor } => {
            json!({ "op": "local_multiply", "v": vertex, "m": f.coeffs(*factor) })
        }
        Operation::Cz { a, b, count } => {
            json!({ "op": "cz", "u": a, "v": b, "c": f.coeffs(*count) })
        }
    }
}

fn pairs(f: &FieldCtx, entries: &[(Vertex, FieldElement)]) -> Value {
    Value::Array(
        entries
            .iter()
            .map(|&(v, x)| json!({ "v": v, "value": f.coeffs(x) }))
            .collect(),
    )
}

pub fn gate_to_json(f: &FieldCtx, g: &Gate) -> Value {
    match g {
        Gate::Z { exponents } => json!({ "gate": "Z", "on": pairs(f, exponents) }),
        Gate::S { entries, adjoint } => {
            json!({ "gate": "S", "adjoint": adjoint, "on": pairs(f, entries) })
        }
        Gate::R {
            vertex,
            lambda,
            adjoint,
        } => {
            json!({ "gate": "R", "adjoint": adjoint, "on": pairs(f, &[(*vertex, *lambda)]) })
        }
        Gate::M { vertex, lambda } => json!({ "gate": "M", "on": pairs(f, &[(*vertex, *lambda)]) }),
    }
}

pub fn correction_to_json(f: &FieldCtx, c: &CorrectionRecord) -> Value {
    json!({
        "measured": c.measured,
        "rule": c.rule,
        "gates": c.gates.iter().map(|g| gate_to_json(f, g)).collect::<Vec<_>>(),
    })
}

/// Everything `simulate` reads.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub graph: PathBuf,
    pub channels: Option<PathBuf>,
    pub ops: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Use `f64` probabilities instead of exact rationals.
    pub float: bool,
}

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("step {step}: {source}")]
    Engine { step: usize, source: NoiseError },
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Fidelity(#[from] crate::fidelity::FidelityError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Runs a script and returns the result document.
pub fn simulate<P: Probability>(
    graph: WeightedGraph,
    channels: Vec<NoiseChannel<P>>,
    ops: &[Operation],
) -> Result<Value, SimulateError> {
    let mut state = crate::noise::TrackedState::new(graph, channels)?;
    for (step, op) in ops.iter().enumerate() {
        state
            .apply(op)
            .map_err(|source| SimulateError::Engine { step, source })?;
    }
    let f = state.graph().field().clone();
    let fidelity = crate::fidelity::fidelity_of(state.channels(), state.graph())?;
    Ok(json!({
        "graph": graph_to_json(state.graph()),
        "channels": state.channels().iter().map(|c| channel_to_json(&f, c)).collect::<Vec<_>>(),
        "corrections": state.corrections().iter().map(|c| correction_to_json(&f, c)).collect::<Vec<_>>(),
        "fidelity_to_final_graph": probability_to_json(&fidelity),
    }))
}

/// Reads the files named in `cfg` and simulates.
pub fn simulate_files<P: Probability>(cfg: &RunConfig) -> Result<Value, SimulateError> {
    let gpath = cfg.graph.display().to_string();
    let g = parse_graph(&gpath, &read_file(&cfg.graph)?)?;
    let channels = match &cfg.channels {
        Some(p) => parse_channels::<P>(&p.display().to_string(), &read_file(p)?, &g)?,
        None => Vec::new(),
    };
    let ops = match &cfg.ops {
        Some(p) => parse_ops(&p.display().to_string(), &read_file(p)?, g.field())?,
        None => Vec::new(),
    };
    simulate(g, channels, &ops)
}
