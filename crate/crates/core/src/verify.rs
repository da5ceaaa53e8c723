//! Randomized property suites, shared by `nsf verify` and the acceptance tests.
//!
//! Every suite takes an explicit seed and reports counts only, so identical
//! seeds give identical reports.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::chain::{self, MiddleMap, Scaling, StrategyOrder, SweepConfig, WeightVector};
use crate::fidelity;
use crate::gf::{is_prime, Field, FieldCtx, FieldElement, GfError};
use crate::graph::{Vertex, WeightedGraph};
use crate::measure::{self, MeasurementSpec, RuleTag, WeylIndex};
use crate::noise::{nsf_apply, pauli_channel, Operation, TrackedState, ZNoiseVector};
use crate::oracle::{
    self, compare_with_tracked, eigenvector, m_op, operator_matrix, projector, replay,
    replay_depolarized, tracked_density, DenseState, LocalOp, OracleError, PhysicalNoise,
};

/// Entrywise tolerance for state comparisons.
pub const STATE_TOL: f64 = 1e-9;
/// Tolerance for operator identities and fidelity cross-checks.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("{0} is not a prime power")]
    NotPrimePower(u32),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// The field of order `d`, with its default modulus.
pub fn field_for_order(d: u32) -> Result<Field, VerifyError> {
    if d < 2 {
        return Err(VerifyError::NotPrimePower(d));
    }
    let p = (2..=d).find(|k| d.is_multiple_of(*k)).expect("d >= 2");
    let (mut rest, mut m) = (d, 0);
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    if rest != 1 || !is_prime(p) {
        return Err(VerifyError::NotPrimePower(d));
    }
    Ok(FieldCtx::new(p, m)?)
}

/// Outcome of one property over one parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct PropertyResult {
    pub name: String,
    pub d: Option<u32>,
    pub checked: usize,
    pub failed: usize,
    /// Set when the property was skipped or needs a remark.
    pub note: Option<String>,
    pub first_failure: Option<String>,
}

impl PropertyResult {
    pub fn new(name: impl Into<String>, d: Option<u32>) -> Self {
        PropertyResult {
            name: name.into(),
            d,
            checked: 0,
            failed: 0,
            note: None,
            first_failure: None,
        }
    }

    pub fn skipped(name: impl Into<String>, d: Option<u32>, why: impl Into<String>) -> Self {
        PropertyResult {
            note: Some(why.into()),
            ..Self::new(name, d)
        }
    }

    pub fn is_skipped(&self) -> bool {
        self.checked == 0 && self.note.is_some()
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    /// Counts one case; `Err` records a failure.
    pub fn record(&mut self, outcome: Result<(), String>) {
        self.checked += 1;
        if let Err(msg) = outcome {
            self.failed += 1;
            self.first_failure.get_or_insert(msg);
        }
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.is_skipped() {
            "SKIP"
        } else if self.passed() {
            "PASS"
        } else {
            "FAIL"
        };
        write!(f, "{status} {}", self.name)?;
        if let Some(d) = self.d {
            write!(f, " d={d}")?;
        }
        write!(f, ": {} checked, {} failed", self.checked, self.failed)?;
        if let Some(n) = &self.note {
            write!(f, " ({n})")?;
        }
        if let Some(msg) = &self.first_failure {
            write!(f, "\n    first failure: {msg}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub d_list: Vec<u32>,
    pub max_n: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub seed: u64,
    pub results: Vec<PropertyResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.results.iter().all(PropertyResult::passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {}", self.seed)?;
        for r in &self.results {
            writeln!(f, "{r}")?;
        }
        let failed = self.results.iter().filter(|r| !r.passed()).count();
        write!(f, "{} properties, {failed} failed", self.results.len())
    }
}

fn rng_for(seed: u64, tag: &str, d: u32) -> ChaCha8Rng {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for b in tag.bytes().chain(d.to_le_bytes()) {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Runs every suite for every `d` in the list.
pub fn run(cfg: &VerifyConfig) -> Result<Report, VerifyError> {
    let mut results = Vec::new();
    let max_n = cfg.max_n.max(2);
    for &d in &cfg.d_list {
        let f = field_for_order(d)?;
        let oracle_ok = oracle::check_capacity(&f, max_n + 1);
        if let Err(e) = &oracle_ok {
            let why = e.to_string();
            results.push(PropertyResult::skipped(
                "oracle-equivalence",
                Some(d),
                why.clone(),
            ));
            results.push(PropertyResult::skipped(
                "measurement-rules",
                Some(d),
                why.clone(),
            ));
            results.push(PropertyResult::skipped(
                "projector-identities",
                Some(d),
                why.clone(),
            ));
            results.push(PropertyResult::skipped("chain-vs-oracle", Some(d), why));
        } else {
            results.push(oracle_equivalence(&f, cfg.trials, max_n, cfg.seed));
            results.extend(measurement_rules(&f, cfg.trials, max_n, cfg.seed));
            results.push(projector_identities(&f, cfg.trials, cfg.seed));
            let n_chain = (max_n + 1).min(chain_oracle_limit(&f));
            results.push(chain_vs_oracle(
                &f,
                3..=n_chain,
                cfg.trials.min(20),
                cfg.seed,
            ));
        }
        results.push(chain_structure(
            &f,
            (max_n + 2).min(6),
            (max_n + 4).min(8),
            cfg.trials,
            cfg.seed,
        ));
        results.push(analytic_vs_convolution(&[d], cfg.trials, cfg.seed)?);
    }
    let primes: BTreeSet<u32> = cfg
        .d_list
        .iter()
        .map(|&d| field_for_order(d).map(|f| f.p()))
        .collect::<Result<_, _>>()?;
    for p in primes {
        results.push(side_to_side(p, 3..=(3 * max_n).max(12)));
    }
    results.push(critical_parameter(10));
    Ok(Report {
        seed: cfg.seed,
        results,
    })
}

// ---------------------------------------------------------------------------
// Random instances

pub fn random_element(rng: &mut impl Rng, f: &FieldCtx) -> FieldElement {
    FieldElement::from_index_unchecked(rng.random_range(0..f.order()))
}

pub fn random_nonzero(rng: &mut impl Rng, f: &FieldCtx) -> FieldElement {
    FieldElement::from_index_unchecked(rng.random_range(1..f.order()))
}

/// A graph on `1..=n` where each edge is present with probability `density`.
pub fn random_graph(rng: &mut impl Rng, f: &Field, n: usize, density: f64) -> WeightedGraph {
    let mut g = WeightedGraph::new(f.clone(), 1..=n as Vertex).expect("distinct labels");
    for u in 1..=n as Vertex {
        for v in u + 1..=n as Vertex {
            if rng.random_bool(density) {
                g.set_weight(u, v, random_nonzero(rng, f))
                    .expect("vertices exist");
            }
        }
    }
    g
}

/// A word with each coordinate nonzero with probability one half.
pub fn random_word(rng: &mut impl Rng, f: &FieldCtx, vertices: &[Vertex]) -> ZNoiseVector {
    let mut entries = Vec::new();
    for &v in vertices {
        if rng.random_bool(0.5) {
            entries.push((v, random_element(rng, f)));
        }
    }
    ZNoiseVector::from_entries(f, entries)
}

/// A normalised Pauli mixture of `1..=max_terms` terms.
pub fn random_physical_noise(
    rng: &mut impl Rng,
    f: &FieldCtx,
    vertices: &[Vertex],
    max_terms: usize,
) -> PhysicalNoise {
    let k = rng.random_range(1..=max_terms);
    let mut terms: PhysicalNoise = (0..k)
        .map(|_| {
            (
                rng.random_range(0.05..1.0),
                random_word(rng, f, vertices),
                random_word(rng, f, vertices),
            )
        })
        .collect();
    let total: f64 = terms.iter().map(|t| t.0).sum();
    for t in terms.iter_mut() {
        t.0 /= total;
    }
    terms
}

/// The five single-qudit measurement rules.
pub const RULES: [RuleTag; 5] = [
    RuleTag::Z,
    RuleTag::YType,
    RuleTag::X,
    RuleTag::XM,
    RuleTag::WNM,
];

pub fn rule_name(rule: RuleTag) -> &'static str {
    match rule {
        RuleTag::Z => "Z",
        RuleTag::YType => "Y-type",
        RuleTag::X => "X",
        RuleTag::XM => "X(m)",
        RuleTag::WNM => "W(n,m)",
        RuleTag::Isolated => "isolated",
    }
}

/// A basis handled by `rule`, or `None` if the field has no such basis
/// (`X(m)` and `W(n,m)` need an element other than 0 and 1).
pub fn random_basis(rng: &mut impl Rng, f: &FieldCtx, rule: RuleTag) -> Option<WeylIndex> {
    let big = |rng: &mut dyn rand::RngCore| {
        FieldElement::from_index_unchecked(rng.random_range(2..f.order()))
    };
    let (z, x) = match rule {
        RuleTag::Z => (f.one(), f.zero()),
        RuleTag::YType => (f.one(), random_nonzero(rng, f)),
        RuleTag::X => (f.zero(), f.one()),
        RuleTag::XM if f.order() > 2 => (f.zero(), big(rng)),
        RuleTag::WNM if f.order() > 2 => (big(rng), random_element(rng, f)),
        _ => return None,
    };
    debug_assert_eq!(measure::classify(WeylIndex::new(z, x)), Ok(rule));
    Some(WeylIndex::new(z, x))
}

/// A random script of up to `max_ops` operations over every operation kind,
/// valid for `g` and its successors.
pub fn random_script(rng: &mut impl Rng, g: &WeightedGraph, max_ops: usize) -> Vec<Operation> {
    let f = g.field().clone();
    let mut cur = g.clone();
    let mut script = Vec::new();
    for _ in 0..rng.random_range(1..=max_ops) {
        let alive: Vec<Vertex> = cur.vertices().collect();
        let v = *alive.choose(rng).expect("graph is nonempty");
        let kind = rng.random_range(0..8);
        let op = match kind {
            0 => Operation::LocalComplement {
                vertex: v,
                factor: random_element(rng, &f),
            },
            1 => Operation::LocalMultiply {
                vertex: v,
                factor: random_nonzero(rng, &f),
            },
            2 if alive.len() >= 2 => {
                let w = *alive
                    .iter()
                    .filter(|&&u| u != v)
                    .collect::<Vec<_>>()
                    .choose(rng)
                    .expect("two vertices");
                Operation::Cz {
                    a: v,
                    b: *w,
                    count: random_element(rng, &f),
                }
            }
            k if k >= 3 && alive.len() >= 2 => {
                let rule = RULES[k - 3];
                let basis = random_basis(rng, &f, rule).unwrap_or(WeylIndex::new(f.one(), f.one()));
                Operation::Measure(MeasurementSpec::new(v, basis, random_element(rng, &f)))
            }
            _ => Operation::LocalComplement {
                vertex: v,
                factor: f.one(),
            },
        };
        let mut probe =
            TrackedState::<f64>::new(cur.clone(), Vec::new()).expect("empty channel list");
        probe.apply(&op).expect("generated operations are valid");
        cur = probe.graph().clone();
        script.push(op);
    }
    script
}

// ---------------------------------------------------------------------------
// Tracking against the dense oracle

/// One random instance: graph, physical noise, script; the tracked state is
/// compared with the dense branch state.
pub fn oracle_instance(rng: &mut impl Rng, f: &Field, max_n: usize) -> Result<(), String> {
    let n = rng.random_range(2..=max_n.max(2));
    let g = random_graph(rng, f, n, 0.6);
    let vs: Vec<Vertex> = g.vertices().collect();
    let physical: Vec<PhysicalNoise> = (0..rng.random_range(0..=n))
        .map(|_| random_physical_noise(rng, f, &vs, 4))
        .collect();
    let script = random_script(rng, &g, 5);
    let channels = physical
        .iter()
        .map(|t| pauli_channel(&g, t.iter().cloned()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let tracked = nsf_apply(
        TrackedState::new(g.clone(), channels).map_err(|e| e.to_string())?,
        &script,
    )
    .map_err(|e| e.to_string())?;
    let (final_graph, ens) = replay(&g, &physical, &script).map_err(|e| e.to_string())?;
    if &final_graph != tracked.graph() {
        return Err(format!("graphs differ after {script:?}"));
    }
    let cmp = compare_with_tracked(&ens, tracked.graph(), tracked.channels())
        .map_err(|e| e.to_string())?;
    if cmp.within(STATE_TOL) {
        Ok(())
    } else {
        Err(format!("{cmp:?} for script {script:?} on {g:?}"))
    }
}

/// Criterion-style oracle equivalence over `trials` random instances.
pub fn oracle_equivalence(f: &Field, trials: usize, max_n: usize, seed: u64) -> PropertyResult {
    let d = f.order();
    let mut res = PropertyResult::new("oracle-equivalence", Some(d));
    if let Err(e) = oracle::check_supported(f) {
        return PropertyResult::skipped(res.name, Some(d), e.to_string());
    }
    let mut rng = rng_for(seed, "oracle-equivalence", d);
    for _ in 0..trials {
        res.record(oracle_instance(&mut rng, f, max_n));
    }
    res
}

/// Checks `P|G> = |e_b> (x) U|G'>` for one measurement of a connected vertex.
pub fn measurement_case(g: &WeightedGraph, spec: &MeasurementSpec) -> Result<(), String> {
    let f = g.field();
    let d = f.order() as f64;
    let out = measure::measure(g, spec).map_err(|e| e.to_string())?;
    let fail = |what: &str| format!("{what}: rule {:?}, spec {spec:?}, graph {g:?}", out.rule);
    let gs = DenseState::graph_state(g).map_err(|e| e.to_string())?;
    let e = eigenvector(f, spec.basis, spec.outcome).map_err(|e| e.to_string())?;
    let bra: Vec<Complex64> = e.iter().map(|x| x.conj()).collect();
    let mut post = gs.contract(spec.vertex, &bra).map_err(|e| e.to_string())?;
    if (post.norm_sqr() - 1.0 / d).abs() > EXACT_TOL {
        return Err(fail("outcome probability is not 1/d"));
    }
    post.normalize();
    let mut expected = DenseState::graph_state(&out.graph).map_err(|e| e.to_string())?;
    expected
        .apply_correction(&out.correction.gates)
        .map_err(|e| e.to_string())?;
    if !post.equal_up_to_phase(&expected, STATE_TOL) {
        return Err(fail("post-measurement state is not U|G'>"));
    }
    let mut projected = gs;
    let p = projector(f, spec.basis, spec.outcome).map_err(|e| e.to_string())?;
    projected
        .apply_local(spec.vertex, &p)
        .map_err(|e| e.to_string())?;
    projected.normalize();
    let product = expected.tensor_front(spec.vertex, &e).sorted();
    if !projected.sorted().equal_up_to_phase(&product, STATE_TOL) {
        return Err(fail("projected state does not factorise"));
    }
    Ok(())
}

/// `trials` random (graph, vertex, outcome) cases for each rule the field admits.
pub fn measurement_rules(f: &Field, trials: usize, max_n: usize, seed: u64) -> Vec<PropertyResult> {
    let d = f.order();
    let mut out = Vec::new();
    for rule in RULES {
        let name = format!("measurement-rule-{}", rule_name(rule));
        if let Err(e) = oracle::check_supported(f) {
            out.push(PropertyResult::skipped(name, Some(d), e.to_string()));
            continue;
        }
        let mut rng = rng_for(seed, &name, d);
        if random_basis(&mut rng, f, rule).is_none() {
            out.push(PropertyResult::skipped(
                name,
                Some(d),
                "no such basis for this d",
            ));
            continue;
        }
        let mut res = PropertyResult::new(name, Some(d));
        for _ in 0..trials {
            let (g, v) = loop {
                let n = rng.random_range(2..=max_n.max(2));
                let g = random_graph(&mut rng, f, n, 0.6);
                let v = rng.random_range(1..=n as Vertex);
                if g.degree(v).unwrap_or(0) > 0 {
                    break (g, v);
                }
            };
            let basis = random_basis(&mut rng, f, rule).expect("checked above");
            let spec = MeasurementSpec::new(v, basis, random_element(&mut rng, f));
            res.record(measurement_case(&g, &spec));
        }
        out.push(res);
    }
    out
}

fn matrix_close(name: &str, a: &[Complex64], b: &[Complex64]) -> Result<(), String> {
    let diff = oracle::max_abs_diff(a, b);
    if diff <= EXACT_TOL {
        Ok(())
    } else {
        Err(format!("{name}: operators differ by {diff:e}"))
    }
}

/// The five projector identities relating every Weyl basis to `Z` or `X`,
/// as operator equations on random three-qudit graphs.
pub fn projector_identities(f: &Field, trials: usize, seed: u64) -> PropertyResult {
    let d = f.order();
    let name = "projector-identities";
    if let Err(e) = oracle::check_supported(f) {
        return PropertyResult::skipped(name, Some(d), e.to_string());
    }
    if f.p() == 2 {
        return PropertyResult::skipped(name, Some(d), "stated for odd characteristic");
    }
    let mut rng = rng_for(seed, name, d);
    let mut res = PropertyResult::new(name, Some(d));
    for _ in 0..trials.div_ceil(5).max(1) {
        let g = loop {
            let g = random_graph(&mut rng, f, 3, 0.7);
            if g.degree(1).unwrap_or(0) > 0 {
                break g;
            }
        };
        for outcome in projector_identity_case(&mut rng, &g) {
            res.record(outcome);
        }
    }
    res
}

fn projector_identity_case(rng: &mut impl Rng, g: &WeightedGraph) -> Vec<Result<(), String>> {
    let f = g.field().clone();
    let vs: Vec<Vertex> = g.vertices().collect();
    let v = 1;
    let b = random_element(rng, &f);
    let m = random_nonzero(rng, &f);
    let n = random_nonzero(rng, &f);
    let proj = |z: FieldElement, x: FieldElement| {
        let op = projector(&f, WeylIndex::new(z, x), b).expect("valid basis");
        operator_matrix(&f, &vs, move |s| s.apply_local(v, &op)).expect("small")
    };
    type Step<'a> = Box<dyn Fn(&mut DenseState) -> Result<(), OracleError> + 'a>;
    let sandwich = |pre: Step, mid: LocalOp, post: Step| {
        operator_matrix(&f, &vs, |s| {
            pre(s)?;
            s.apply_local(v, &mid)?;
            post(s)
        })
        .expect("small")
    };
    let lc = |w: Vertex, k: FieldElement| -> Step {
        Box::new(move |s: &mut DenseState| s.apply_local_complement(g, w, k))
    };
    let mul = |k: FieldElement| -> Step {
        let op = m_op(&f, k).expect("nonzero");
        Box::new(move |s: &mut DenseState| s.apply_local(v, &op))
    };
    let pz =
        |zz: FieldElement| projector(&f, WeylIndex::new(zz, f.zero()), b).expect("valid basis");
    let (ni, mi, mn) = (
        f.inv(n).expect("nonzero"),
        f.inv(m).expect("nonzero"),
        f.div(m, n).expect("nonzero"),
    );
    let (w0, a) = g.neighbors(v).expect("vertex exists")[0];
    let r = f.neg(f.inv(f.mul(a, a)).expect("nonzero"));
    let px = projector(&f, WeylIndex::new(f.zero(), f.one()), b).expect("valid basis");
    let pw = projector(&f, WeylIndex::new(f.one(), f.one()), b).expect("valid basis");
    vec![
        matrix_close(
            "P(W(1,m)) = L(-m) P(Z) L(m)",
            &proj(f.one(), m),
            &sandwich(lc(v, m), pz(f.one()), lc(v, f.neg(m))),
        ),
        matrix_close(
            "P(Z(n)) = M(1/n) P(Z) M(n)",
            &proj(n, f.zero()),
            &sandwich(mul(n), pz(f.one()), mul(ni)),
        ),
        matrix_close(
            "P(W(n,m)) = L(-m/n) P(Z(n)) L(m/n)",
            &proj(n, m),
            &sandwich(lc(v, mn), pz(n), lc(v, f.neg(mn))),
        ),
        matrix_close(
            "P(X(m)) = M(m) P(X) M(1/m)",
            &proj(f.zero(), m),
            &sandwich(mul(mi), px, mul(m)),
        ),
        matrix_close(
            "P(X) = L_w0(-r) P(W(1,1)) L_w0(r)",
            &proj(f.zero(), f.one()),
            &sandwich(lc(w0, r), pw, lc(w0, f.neg(r))),
        ),
    ]
}

// ---------------------------------------------------------------------------
// Linear chains

/// Runs `order` on an exact-rational chain and reports classification errors.
pub fn chain_case(f: &Field, n: usize, order: &StrategyOrder) -> Result<WeightVector, String> {
    let lambda = BigRational::new(2.into(), 7.into());
    chain::run_chain(n, f, lambda, order)
        .map(|r| r.weights)
        .map_err(|e| format!("N = {n}, order {:?}: {e}", order.sigma()))
}

/// Every order for `N <= exhaustive_max`, plus random orders up to `random_max`.
pub fn chain_structure(
    f: &Field,
    exhaustive_max: usize,
    random_max: usize,
    trials: usize,
    seed: u64,
) -> PropertyResult {
    let d = f.order();
    let mut res = PropertyResult::new("chain-structure", Some(d));
    for n in 3..=exhaustive_max {
        for perm in (2..n as Vertex).permutations(n - 2) {
            let order = StrategyOrder::new(n, perm).expect("permutation");
            res.record(chain_case(f, n, &order).map(|_| ()));
        }
    }
    let mut rng = rng_for(seed, "chain-structure", d);
    for _ in 0..trials {
        let n = rng.random_range(3..=random_max.max(3));
        let order = StrategyOrder::random(n, rng.random()).expect("n >= 3");
        res.record(chain_case(f, n, &order).map(|_| ()));
    }
    res
}

/// Engine weights for side to side against the closed form.
pub fn side_to_side(p: u32, ns: std::ops::RangeInclusive<usize>) -> PropertyResult {
    let mut res = PropertyResult::new(format!("side-to-side-weights p={p}"), None);
    let f = FieldCtx::new(p, 1).expect("prime");
    for n in ns {
        let order = StrategyOrder::side_to_side(n).expect("n >= 3");
        let outcome = chain_case(&f, n, &order).and_then(|engine| {
            let closed = chain::side_to_side_weights(n, p).map_err(|e| e.to_string())?;
            if engine == closed {
                Ok(())
            } else {
                Err(format!(
                    "N = {n}: engine {:?}, closed form {:?}",
                    engine.counts(),
                    closed.counts()
                ))
            }
        });
        res.record(outcome);
    }
    res
}

/// Closed form against convolution for random weight vectors.
pub fn analytic_vs_convolution(
    d_list: &[u32],
    trials: usize,
    seed: u64,
) -> Result<PropertyResult, VerifyError> {
    let d_note = if d_list.len() == 1 {
        Some(d_list[0])
    } else {
        None
    };
    let mut res = PropertyResult::new("analytic-vs-convolution", d_note);
    let mut rng = rng_for(seed, "analytic-vs-convolution", d_list.iter().sum());
    let fields = d_list
        .iter()
        .map(|&d| field_for_order(d))
        .collect::<Result<Vec<_>, _>>()?;
    for _ in 0..trials {
        let f = fields.choose(&mut rng).expect("nonempty d list");
        let p = f.p();
        let counts: Vec<u64> = (0..p * p)
            .map(|_| {
                if rng.random_bool(0.5) {
                    rng.random_range(0..=6)
                } else {
                    0
                }
            })
            .collect();
        let w = WeightVector::from_counts(p, counts).expect("p^2 entries");
        let lambda = rng.random_range(1..=9) as f64 / 10.0;
        let analytic = chain::analytic_fidelity(&w, &lambda, f.order() as u64);
        let outcome = chain::convolution_fidelity(&w, &lambda, f)
            .map_err(|e| e.to_string())
            .and_then(|conv| {
                if (analytic - conv).abs() <= EXACT_TOL {
                    Ok(())
                } else {
                    Err(format!(
                        "d = {}, lambda = {lambda}, w = {:?}: {analytic} vs {conv}",
                        f.order(),
                        w.counts()
                    ))
                }
            });
        res.record(outcome);
    }
    Ok(res)
}

/// `q_d_choi(1/3, m) = 1/(2^m + 1)` exactly.
pub fn critical_parameter(m_max: u32) -> PropertyResult {
    let mut res = PropertyResult::new("critical-parameter", None);
    for m in 1..=m_max {
        let got = fidelity::q_d_choi(BigRational::new(1.into(), 3.into()), m);
        let want = BigRational::new(1.into(), ((1i64 << m) + 1).into());
        res.record(if got == want {
            Ok(())
        } else {
            Err(format!("m = {m}: {got} != {want}"))
        });
    }
    res
}

/// Largest chain whose density matrix the oracle builds.
pub fn chain_oracle_limit(f: &FieldCtx) -> usize {
    let d = f.order() as usize;
    let mut n = 0;
    let mut dim = 1;
    while dim * d <= oracle::MAX_DENSITY_DIM {
        dim *= d;
        n += 1;
    }
    n
}

/// Depolarized chain measured in `order`: tracked state against a density
/// matrix evolved physically.
pub fn chain_oracle_case(
    f: &Field,
    n: usize,
    lambda: f64,
    order: &StrategyOrder,
) -> Result<(), String> {
    let run = chain::run_chain(n, f, lambda, order).map_err(|e| e.to_string())?;
    let g0 = WeightedGraph::linear_cluster(f.clone(), n).map_err(|e| e.to_string())?;
    let noise: Vec<(Vertex, f64)> = (1..=n as Vertex).map(|v| (v, lambda)).collect();
    let specs: Vec<MeasurementSpec> = chain::chain_script(order)
        .into_iter()
        .map(|op| match op {
            Operation::Measure(s) => s,
            _ => unreachable!("chain scripts only measure"),
        })
        .collect();
    let (g, rho) = replay_depolarized(&g0, &noise, &specs).map_err(|e| e.to_string())?;
    if &g != run.state.graph() {
        return Err(format!("final graphs differ for order {:?}", order.sigma()));
    }
    let predicted = tracked_density(&g, run.state.channels()).map_err(|e| e.to_string())?;
    let diff = rho.max_abs_diff(&predicted).map_err(|e| e.to_string())?;
    let target = DenseState::graph_state(&g).map_err(|e| e.to_string())?;
    let f_oracle = rho.fidelity(&target).map_err(|e| e.to_string())?;
    let f_tracked = fidelity::fidelity_of(run.state.channels(), &g).map_err(|e| e.to_string())?;
    let f_closed = chain::analytic_fidelity(&run.weights, &lambda, f.order() as u64);
    if diff > STATE_TOL
        || (f_oracle - f_tracked).abs() > STATE_TOL
        || (f_closed - f_tracked).abs() > STATE_TOL
    {
        return Err(format!(
            "N = {n}, order {:?}: entry diff {diff:e}, fidelities oracle {f_oracle} tracked {f_tracked} closed form {f_closed}",
            order.sigma()
        ));
    }
    Ok(())
}

/// Full chain pipeline against the oracle: side to side plus random orders.
pub fn chain_vs_oracle(
    f: &Field,
    ns: std::ops::RangeInclusive<usize>,
    random_orders: usize,
    seed: u64,
) -> PropertyResult {
    let d = f.order();
    let name = "chain-vs-oracle";
    if let Err(e) = oracle::check_supported(f) {
        return PropertyResult::skipped(name, Some(d), e.to_string());
    }
    let mut res = PropertyResult::new(name, Some(d));
    let mut rng = rng_for(seed, name, d);
    for n in ns {
        let lambda = rng.random_range(1..=9) as f64 / 10.0;
        res.record(chain_oracle_case(
            f,
            n,
            lambda,
            &StrategyOrder::side_to_side(n).expect("n >= 3"),
        ));
        for _ in 0..random_orders.min(n - 2) {
            let order = StrategyOrder::random(n, rng.random()).expect("n >= 3");
            res.record(chain_oracle_case(f, n, lambda, &order));
        }
    }
    res
}

/// Two orders on a five-qubit chain with different weight vectors, both
/// checked against the oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderWitness {
    pub first: (Vec<Vertex>, WeightVector),
    pub second: (Vec<Vertex>, WeightVector),
}

pub fn order_sensitivity() -> Result<OrderWitness, String> {
    let f = FieldCtx::new(2, 1).expect("GF(2)");
    let n = 5;
    let mut seen: Vec<(Vec<Vertex>, WeightVector)> = Vec::new();
    for perm in (2..n as Vertex).permutations(n - 2) {
        let order = StrategyOrder::new(n, perm).expect("permutation");
        let w = chain_case(&f, n, &order)?;
        if chain_case(&f, n, &order)? != w {
            return Err(format!("order {:?} is not deterministic", order.sigma()));
        }
        let sequence: Vec<Vertex> = order.measurement_sequence().collect();
        if let Some(prev) = seen.iter().find(|(_, pw)| *pw != w) {
            let first_order =
                StrategyOrder::parse(n, &prev.0.iter().join(",")).map_err(|e| e.to_string())?;
            chain_oracle_case(&f, n, 0.7, &first_order)?;
            chain_oracle_case(&f, n, 0.7, &order)?;
            return Ok(OrderWitness {
                first: prev.clone(),
                second: (sequence, w),
            });
        }
        seen.push((sequence, w));
    }
    Err("every order gives the same weights".into())
}

/// Adapted fidelity `F^{1/m}` for `m = 1..=m_max` at one `r`.
pub fn adapted_curve(n: usize, q2: f64, scaling: Scaling, r: f64, m_max: u32) -> Vec<f64> {
    let cfg = SweepConfig {
        n,
        p: 2,
        m_range: 1..=m_max,
        q2,
        r: vec![r],
        scaling,
        order: None,
    };
    chain::bell_chain_sweep(&cfg)
        .expect("valid sweep")
        .into_iter()
        .map(|row| row.f_adapted)
        .collect()
}

/// Shape of a sequence of values over `m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    NonDecreasing,
    NonIncreasing,
    /// Strictly down then strictly up, with an interior minimum.
    Valley,
    /// Strictly up then strictly down, with an interior maximum.
    Peak,
    Other,
}

pub fn trend(values: &[f64]) -> Trend {
    let steps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    if steps.iter().all(|&s| s >= 0.0) {
        return Trend::NonDecreasing;
    }
    if steps.iter().all(|&s| s <= 0.0) {
        return Trend::NonIncreasing;
    }
    let turn = |first: fn(f64) -> bool| {
        let k = steps.iter().take_while(|&&s| first(s)).count();
        k > 0 && k < steps.len() && steps[k..].iter().all(|&s| !first(s) && s != 0.0)
    };
    if turn(|s| s < 0.0) {
        Trend::Valley
    } else if turn(|s| s > 0.0) {
        Trend::Peak
    } else {
        Trend::Other
    }
}

/// Index of the maximum, if it is neither the first nor the last entry.
pub fn interior_maximum(values: &[f64]) -> Option<usize> {
    let (k, _) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    (k > 0 && k + 1 < values.len()).then_some(k)
}

/// Classified middle maps of a run, for display.
pub fn describe_weights(w: &WeightVector) -> String {
    w.iter()
        .map(|(m, k): (MiddleMap, u64)| format!("{m}^{k}"))
        .join(" ")
}
