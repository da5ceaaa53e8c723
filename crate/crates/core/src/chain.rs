//! Linear cluster to generalized Bell pair.
//!
//! An `N`-qudit chain with depolarizing noise on every qudit has its middle
//! qudits measured in the `W(1,1)` basis. Afterwards the channel that started
//! on a middle qudit is a line map `M(alpha, beta)`: with probability
//! `lambda` nothing happens, otherwise `Z_1(alpha u) Z_N(beta u)` for uniform
//! `u`. The channels of the two end qudits become uniform over `F_d^2`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fidelity::{self, FidelityError};
use crate::gf::{Field, FieldCtx, FieldElement, GfError};
use crate::graph::{Vertex, WeightedGraph};
use crate::measure::{MeasurementSpec, WeylIndex};
use crate::noise::{
    depolarizing_channel, NoiseChannel, NoiseError, NoiseTerm, Operation, TrackedState,
    ZNoiseVector,
};
use crate::prob::Probability;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("a chain needs at least 3 qudits, got {0}")]
    TooShort(usize),
    #[error("invalid measurement order: {0}")]
    InvalidOrder(String),
    #[error("channel from vertex {vertex} is not of the expected form: {channel}")]
    Classification { vertex: Vertex, channel: String },
    #[error("{0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Fidelity(#[from] FidelityError),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// `M(alpha, beta)` with the first nonzero coordinate scaled to 1.
/// `M(0, 0)` is the identity map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MiddleMap {
    pub alpha: u32,
    pub beta: u32,
}

impl MiddleMap {
    pub fn new(alpha: u32, beta: u32) -> Self {
        MiddleMap { alpha, beta }
    }

    /// The canonical representative of the line through `(alpha, beta)` over `GF(p)`.
    pub fn normalized(alpha: u32, beta: u32, p: u32) -> Self {
        let (a, b) = (alpha % p, beta % p);
        if a != 0 {
            let inv = mod_inv(a, p);
            MiddleMap {
                alpha: 1,
                beta: b * inv % p,
            }
        } else if b != 0 {
            MiddleMap { alpha: 0, beta: 1 }
        } else {
            MiddleMap { alpha: 0, beta: 0 }
        }
    }

    pub fn is_identity(&self) -> bool {
        self.alpha == 0 && self.beta == 0
    }
}

impl fmt::Display for MiddleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M({}, {})", self.alpha, self.beta)
    }
}

fn mod_inv(a: u32, p: u32) -> u32 {
    let mut acc = 1u64;
    let (mut base, mut e) = (a as u64, p as u64 - 2);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

/// Counts `w_alpha^beta` of middle maps, indexed `alpha * p + beta`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightVector {
    p: u32,
    counts: Vec<u64>,
}

impl WeightVector {
    pub fn zeros(p: u32) -> Self {
        WeightVector {
            p,
            counts: vec![0; (p * p) as usize],
        }
    }

    pub fn from_counts(p: u32, counts: Vec<u64>) -> Result<Self, ChainError> {
        if counts.len() != (p * p) as usize {
            return Err(ChainError::InvalidParameter(format!(
                "weight vector for p = {p} needs {} entries",
                p * p
            )));
        }
        Ok(WeightVector { p, counts })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn get(&self, alpha: u32, beta: u32) -> u64 {
        self.counts[(alpha * self.p + beta) as usize]
    }

    pub fn add(&mut self, alpha: u32, beta: u32, k: u64) {
        self.counts[(alpha * self.p + beta) as usize] += k;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Nonzero `(map, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (MiddleMap, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0)
            .map(move |(i, &w)| (MiddleMap::new(i as u32 / self.p, i as u32 % self.p), w))
    }
}

/// A permutation `sigma` of the middle labels `2..=N-1`; measurements run
/// from `sigma_n` down to `sigma_1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyOrder {
    sigma: Vec<Vertex>,
}

impl StrategyOrder {
    pub fn new(n: usize, sigma: Vec<Vertex>) -> Result<Self, ChainError> {
        if n < 3 {
            return Err(ChainError::TooShort(n));
        }
        let mut sorted = sigma.clone();
        sorted.sort_unstable();
        if sorted != (2..n as Vertex).collect::<Vec<_>>() {
            return Err(ChainError::InvalidOrder(format!(
                "{sigma:?} is not a permutation of 2..={}",
                n - 1
            )));
        }
        Ok(StrategyOrder { sigma })
    }

    /// Right to left: `N-1` first, `2` last.
    pub fn side_to_side(n: usize) -> Result<Self, ChainError> {
        Self::new(n, (2..n as Vertex).collect())
    }

    /// Left to right: `2` first.
    pub fn reversed(n: usize) -> Result<Self, ChainError> {
        Self::new(n, (2..n as Vertex).rev().collect())
    }

    pub fn random(n: usize, seed: u64) -> Result<Self, ChainError> {
        let mut sigma: Vec<Vertex> = (2..n as Vertex).collect();
        sigma.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self::new(n, sigma)
    }

    /// Parses `side-to-side`, `reversed`, `random:<seed>` or a comma list
    /// giving the measurement sequence.
    pub fn parse(n: usize, s: &str) -> Result<Self, ChainError> {
        match s.trim() {
            "side-to-side" => Self::side_to_side(n),
            "reversed" => Self::reversed(n),
            t if t.starts_with("random:") => {
                let seed = t["random:".len()..]
                    .parse()
                    .map_err(|_| ChainError::InvalidOrder(format!("bad seed in {t:?}")))?;
                Self::random(n, seed)
            }
            t => {
                let seq: Result<Vec<Vertex>, _> =
                    t.split(',').map(|x| x.trim().parse::<Vertex>()).collect();
                let seq =
                    seq.map_err(|_| ChainError::InvalidOrder(format!("cannot parse {t:?}")))?;
                Self::new(n, seq.into_iter().rev().collect())
            }
        }
    }

    pub fn sigma(&self) -> &[Vertex] {
        &self.sigma
    }

    /// Vertices in the order they are measured.
    pub fn measurement_sequence(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.sigma.iter().rev().copied()
    }
}

#[derive(Clone, Debug)]
pub struct ChainRun<P> {
    pub state: TrackedState<P>,
    /// Middle vertex and the map its channel became.
    pub middle: Vec<(Vertex, MiddleMap)>,
    pub weights: WeightVector,
    pub edges: [NoiseChannel<P>; 2],
}

/// The script of `W(1,1)` measurements for `order`, outcome 0.
pub fn chain_script(order: &StrategyOrder) -> Vec<Operation> {
    order
        .measurement_sequence()
        .map(|v| {
            Operation::Measure(MeasurementSpec::new(
                v,
                WeylIndex::new(FieldElement::ONE, FieldElement::ONE),
                FieldElement::ZERO,
            ))
        })
        .collect()
}

/// Builds the noisy chain, measures the middle and classifies every channel.
pub fn run_chain<P: Probability>(
    n: usize,
    field: &Field,
    lambda: P,
    order: &StrategyOrder,
) -> Result<ChainRun<P>, ChainError> {
    if n < 3 {
        return Err(ChainError::TooShort(n));
    }
    if order.sigma.len() != n - 2 {
        return Err(ChainError::InvalidOrder(format!(
            "order has {} entries for N = {n}",
            order.sigma.len()
        )));
    }
    let g = WeightedGraph::linear_cluster(field.clone(), n).map_err(NoiseError::from)?;
    let channels = (1..=n as Vertex)
        .map(|v| depolarizing_channel(&g, v, lambda.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let mut state = TrackedState::new(g, channels)?;
    for op in chain_script(order) {
        state.apply(&op)?;
    }
    let last = n as Vertex;
    let mut weights = WeightVector::zeros(field.p());
    let mut middle = Vec::with_capacity(n - 2);
    for (i, ch) in state.channels().iter().enumerate() {
        let v = i as Vertex + 1;
        if v == 1 || v == last {
            if !is_edge_form(field, ch, &lambda, last) {
                return Err(ChainError::Classification {
                    vertex: v,
                    channel: describe(field, ch),
                });
            }
            continue;
        }
        let m = classify_middle(field, ch, &lambda, last).ok_or_else(|| {
            ChainError::Classification {
                vertex: v,
                channel: describe(field, ch),
            }
        })?;
        if !m.is_identity() {
            weights.add(m.alpha, m.beta, 1);
        }
        middle.push((v, m));
    }
    let edges = [state.channels()[0].clone(), state.channels()[n - 1].clone()];
    Ok(ChainRun {
        state,
        middle,
        weights,
        edges,
    })
}

fn describe<P: Probability>(f: &FieldCtx, ch: &NoiseChannel<P>) -> String {
    let terms: Vec<String> = ch
        .terms()
        .iter()
        .map(|t| {
            let ops: Vec<String> =
                t.op.entries()
                    .iter()
                    .map(|&(v, x)| format!("Z{v}({})", f.format(x)))
                    .collect();
            format!(
                "{}: {}",
                t.probability,
                if ops.is_empty() {
                    "I".to_string()
                } else {
                    ops.join(" ")
                }
            )
        })
        .collect();
    format!("{{{}}}", terms.join(", "))
}

/// `lambda I + (1 - lambda)/d^2` over all `Z_1(a) Z_N(b)`.
fn is_edge_form<P: Probability>(
    f: &FieldCtx,
    ch: &NoiseChannel<P>,
    lambda: &P,
    last: Vertex,
) -> bool {
    let d = f.order() as i64;
    let each = (P::one() - lambda.clone()) * P::from_ratio(1, d * d);
    if each.is_zero() {
        return ch.len() == 1 && ch.terms()[0].op.is_identity();
    }
    if ch.len() as i64 != d * d || ch.support().iter().any(|&v| v != 1 && v != last) {
        return false;
    }
    ch.terms().iter().all(|t| {
        let expected = if t.op.is_identity() {
            lambda.clone() + each.clone()
        } else {
            each.clone()
        };
        t.probability.approx_eq(&expected, 1e-12)
    })
}

/// Recognises `M(alpha, beta)` with `alpha, beta` in the prime field.
pub fn classify_middle<P: Probability>(
    f: &FieldCtx,
    ch: &NoiseChannel<P>,
    lambda: &P,
    last: Vertex,
) -> Option<MiddleMap> {
    let d = f.order() as i64;
    let each = (P::one() - lambda.clone()) * P::from_ratio(1, d);
    if ch.len() == 1 && ch.terms()[0].op.is_identity() {
        return Some(MiddleMap::new(0, 0));
    }
    if ch.len() as i64 != d || ch.support().iter().any(|&v| v != 1 && v != last) {
        return None;
    }
    let (a, b) = ch
        .terms()
        .iter()
        .map(|t| (t.op.get(1), t.op.get(last)))
        .find(|&(a, b)| !(a.is_zero() && b.is_zero()))?;
    let (alpha, beta) = if !a.is_zero() {
        (FieldElement::ONE, f.div(b, a).ok()?)
    } else {
        (FieldElement::ZERO, FieldElement::ONE)
    };
    if !f.is_in_prime_subfield(beta) {
        return None;
    }
    for u in f.elements() {
        let op = ZNoiseVector::from_entries(f, [(1, f.mul(alpha, u)), (last, f.mul(beta, u))]);
        let expected = if u.is_zero() {
            lambda.clone() + each.clone()
        } else {
            each.clone()
        };
        if !ch.probability_of(&op).approx_eq(&expected, 1e-12) {
            return None;
        }
    }
    Some(MiddleMap::new(alpha.index(), beta.index()))
}

/// `w_1^beta = m + [1 <= beta <= s]` where `N - 2 = m p + s`.
pub fn side_to_side_weights(n: usize, p: u32) -> Result<WeightVector, ChainError> {
    if n < 3 {
        return Err(ChainError::TooShort(n));
    }
    let inner = (n - 2) as u64;
    let (m, s) = (inner / p as u64, inner % p as u64);
    let mut w = WeightVector::zeros(p);
    for beta in 0..p {
        w.add(1, beta, m + u64::from(beta >= 1 && beta as u64 <= s));
    }
    Ok(w)
}

/// The maps behind a weight vector as tracked channels on `{1, last}`.
pub fn composed_channels<P: Probability>(
    f: &FieldCtx,
    w: &WeightVector,
    lambda: &P,
    last: Vertex,
) -> Result<Vec<NoiseChannel<P>>, ChainError> {
    let d = f.order() as i64;
    let mut out = Vec::new();
    for (map, k) in w.iter() {
        let lk = lambda.ipow(k);
        let each = (P::one() - lk.clone()) * P::from_ratio(1, d);
        let (a, b) = (f.from_int(map.alpha as i64), f.from_int(map.beta as i64));
        let mut terms = vec![NoiseTerm {
            probability: lk,
            op: ZNoiseVector::identity(),
        }];
        for u in f.elements() {
            terms.push(NoiseTerm {
                probability: each.clone(),
                op: ZNoiseVector::from_entries(f, [(1, f.mul(a, u)), (last, f.mul(b, u))]),
            });
        }
        out.push(NoiseChannel::new(terms)?);
    }
    let each = (P::one() - lambda.clone()) * P::from_ratio(1, d * d);
    for _ in 0..2 {
        let mut terms = vec![NoiseTerm {
            probability: lambda.clone(),
            op: ZNoiseVector::identity(),
        }];
        for a in f.elements() {
            for b in f.elements() {
                terms.push(NoiseTerm {
                    probability: each.clone(),
                    op: ZNoiseVector::from_entries(f, [(1, a), (last, b)]),
                });
            }
        }
        out.push(NoiseChannel::new(terms)?);
    }
    Ok(out)
}

/// Fidelity by convolving the maps of `w` and the two edge maps.
pub fn convolution_fidelity<P: Probability>(
    w: &WeightVector,
    lambda: &P,
    f: &Field,
) -> Result<P, ChainError> {
    let target = WeightedGraph::linear_cluster(f.clone(), 2).map_err(NoiseError::from)?;
    Ok(fidelity::fidelity_of(
        &composed_channels(f, w, lambda, 2)?,
        &target,
    )?)
}

/// Closed-form fidelity of the Bell pair for weight vector `w`.
///
/// Each map is a combination of the identity, the averaging `Pi_L` over a
/// line `L` of `F_d^2`, and the averaging `Pi_U` over all of `F_d^2`. Since
/// `Pi_L Pi_L = Pi_L`, `Pi_L Pi_L' = Pi_U` for distinct lines and `Pi_U`
/// absorbs everything, composing maps only moves mass between these
/// components. `<G'|Pi_L(rho')|G'> = 1/d` and `<G'|Pi_U(rho')|G'> = 1/d^2`.
pub fn analytic_fidelity<P: Probability>(w: &WeightVector, lambda: &P, d: u64) -> P {
    let p = w.p();
    let mut lines: BTreeMap<MiddleMap, u64> = BTreeMap::new();
    for (map, k) in w.iter() {
        let line = MiddleMap::normalized(map.alpha, map.beta, p);
        if !line.is_identity() {
            *lines.entry(line).or_default() += k;
        }
    }
    let mut identity = P::one();
    let mut on_line: BTreeMap<MiddleMap, P> = BTreeMap::new();
    let mut uniform = P::zero();
    for (line, k) in &lines {
        let lk = lambda.ipow(*k);
        let spread = P::one() - lk.clone();
        let mut next_uniform = uniform.clone();
        for (other, mass) in on_line.iter_mut() {
            debug_assert_ne!(other, line);
            next_uniform = next_uniform + mass.clone() * spread.clone();
            *mass = mass.clone() * lk.clone();
        }
        on_line.insert(*line, identity.clone() * spread);
        identity = identity * lk;
        uniform = next_uniform;
    }
    let l2 = lambda.clone() * lambda.clone();
    let edge_spread = P::one() - l2.clone();
    let line_total = on_line.values().fold(P::zero(), |a, b| a + b.clone());
    uniform = uniform + (identity.clone() + line_total.clone()) * edge_spread;
    identity = identity * l2.clone();
    let line_total = line_total * l2;
    let dd = P::from_ratio(d as i64, 1);
    identity + line_total / dd.clone() + uniform / (dd.clone() * dd)
}

/// How `q_d` is obtained from the qubit parameter `q2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    /// Same Choi fidelity as `m` independent qubit channels.
    Choi,
    /// `q2^(d/2)`.
    Linear,
    /// `q2^(d(d-1)/2)`.
    Quadratic,
}

impl Scaling {
    pub fn q_d(self, q2: f64, m: u32, d: u64) -> f64 {
        match self {
            Scaling::Choi => fidelity::q_d_choi(q2, m),
            Scaling::Linear => fidelity::q_d_linear(q2, d),
            Scaling::Quadratic => fidelity::q_d_quadratic(q2, d),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scaling::Choi => "choi",
            Scaling::Linear => "linear",
            Scaling::Quadratic => "quadratic",
        }
    }
}

impl std::str::FromStr for Scaling {
    type Err = ChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "choi" => Ok(Scaling::Choi),
            "linear" => Ok(Scaling::Linear),
            "quadratic" => Ok(Scaling::Quadratic),
            other => Err(ChainError::InvalidParameter(format!(
                "unknown scaling {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub p: u32,
    pub m_range: std::ops::RangeInclusive<u32>,
    pub q2: f64,
    pub r: Vec<f64>,
    pub scaling: Scaling,
    /// `None` is side to side.
    pub order: Option<StrategyOrder>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: u32,
    pub m: u32,
    pub d: u64,
    #[serde(rename = "N")]
    pub n: usize,
    pub r: f64,
    pub q2: f64,
    pub q_d: f64,
    pub scaling: Scaling,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "F_adapted")]
    pub f_adapted: f64,
}

/// Weights of `order` on a chain over `GF(p)`. The classified maps have
/// coefficients in the prime field, so these also hold for every `GF(p^m)`.
pub fn order_weights(n: usize, p: u32, order: &StrategyOrder) -> Result<WeightVector, ChainError> {
    let f = FieldCtx::new(p, 1)?;
    let half = BigRational::new(1.into(), 2.into());
    Ok(run_chain(n, &f, half, order)?.weights)
}

/// Bell-pair fidelity over the `(m, r)` grid, rows ordered by `m` then `r`.
pub fn bell_chain_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>, ChainError> {
    if cfg.n < 3 {
        return Err(ChainError::TooShort(cfg.n));
    }
    if !crate::gf::is_prime(cfg.p) {
        return Err(ChainError::InvalidParameter(format!(
            "p = {} is not prime",
            cfg.p
        )));
    }
    if cfg.m_range.is_empty() || *cfg.m_range.start() == 0 {
        return Err(ChainError::InvalidParameter(format!(
            "invalid m range {:?}",
            cfg.m_range
        )));
    }
    fidelity::check_unit_interval("q2", cfg.q2)?;
    for &r in &cfg.r {
        fidelity::check_unit_interval("r", r)?;
    }
    let w = match &cfg.order {
        Some(order) => order_weights(cfg.n, cfg.p, order)?,
        None => side_to_side_weights(cfg.n, cfg.p)?,
    };
    let points: Vec<(u32, f64)> = cfg
        .m_range
        .clone()
        .flat_map(|m| cfg.r.iter().map(move |&r| (m, r)))
        .collect();
    points
        .par_iter()
        .map(|&(m, r)| {
            let d = (cfg.p as u64)
                .checked_pow(m)
                .ok_or_else(|| ChainError::InvalidParameter(format!("{}^{m} overflows", cfg.p)))?;
            let q_d = cfg.scaling.q_d(cfg.q2, m, d);
            let lambda = r * q_d;
            let f = analytic_fidelity(&w, &lambda, d);
            Ok(SweepRow {
                p: cfg.p,
                m,
                d,
                n: cfg.n,
                r,
                q2: cfg.q2,
                q_d,
                scaling: cfg.scaling,
                f,
                f_adapted: fidelity::adapted_fidelity(f, m),
            })
        })
        .collect()
}

/// Writes sweep rows as CSV with a header.
pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
