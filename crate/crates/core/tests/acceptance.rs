//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::time::{Duration, Instant};

use qudit_nsf::chain::{self, Scaling, StrategyOrder};
use qudit_nsf::gf::FieldCtx;
use qudit_nsf::graph::{Vertex, WeightedGraph};
use qudit_nsf::noise::{depolarizing_channel, TrackedState};
use qudit_nsf::verify::{self, PropertyResult, Trend};

const SEED: u64 = 2024;

struct Line {
    id: u32,
    title: &'static str,
    ok: bool,
    detail: String,
    elapsed: Duration,
    budget: Option<Duration>,
}

fn summarize(results: &[PropertyResult]) -> (bool, String) {
    let ok = results.iter().all(|r| r.passed() && !r.is_skipped());
    let checked: usize = results.iter().map(|r| r.checked).sum();
    let failed: usize = results.iter().map(|r| r.failed).sum();
    let mut detail = format!("{checked} cases, {failed} failures");
    for r in results.iter().filter(|r| !r.passed() || r.is_skipped()) {
        detail.push_str(&format!("\n      {r}"));
    }
    (ok, detail)
}

fn timed(
    id: u32,
    title: &'static str,
    budget: Option<u64>,
    body: impl FnOnce() -> (bool, String),
) -> Line {
    let start = Instant::now();
    let (ok, detail) = body();
    let elapsed = start.elapsed();
    let budget = budget.map(Duration::from_secs);
    let ok = ok && budget.is_none_or(|b| elapsed <= b);
    Line {
        id,
        title,
        ok,
        detail,
        elapsed,
        budget,
    }
}

fn fields(orders: &[u32]) -> Vec<qudit_nsf::gf::Field> {
    orders
        .iter()
        .map(|&d| verify::field_for_order(d).expect("prime power"))
        .collect()
}

fn oracle_equivalence() -> (bool, String) {
    let results: Vec<PropertyResult> = fields(&[2, 3, 5, 9])
        .iter()
        .map(|f| verify::oracle_equivalence(f, 200, 4, SEED))
        .collect();
    summarize(&results)
}

fn measurement_rules() -> (bool, String) {
    let mut results = Vec::new();
    for f in fields(&[3, 5, 9]) {
        results.extend(verify::measurement_rules(&f, 100, 4, SEED));
        results.push(verify::projector_identities(&f, 100, SEED));
    }
    summarize(&results)
}

fn structure_theorem() -> (bool, String) {
    let results: Vec<PropertyResult> = fields(&[2, 3, 5, 9])
        .iter()
        .map(|f| verify::chain_structure(f, 6, 8, 200, SEED))
        .collect();
    summarize(&results)
}

fn side_to_side() -> (bool, String) {
    let results: Vec<PropertyResult> = [2, 3, 5]
        .iter()
        .map(|&p| verify::side_to_side(p, 3..=100))
        .collect();
    summarize(&results)
}

fn analytic_vs_convolution() -> (bool, String) {
    let r = verify::analytic_vs_convolution(&[2, 3, 4, 5, 8, 9], 500, SEED).expect("prime powers");
    summarize(&[r])
}

fn critical_parameter() -> (bool, String) {
    summarize(&[verify::critical_parameter(10)])
}

fn curve_text(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.5}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn adapted_trends() -> (bool, String) {
    let cases = [
        (0.95, Trend::NonDecreasing),
        (0.99, Trend::Valley),
        (1.0, Trend::NonIncreasing),
    ];
    let mut ok = true;
    let mut detail = String::from("N=100, q2=0.992, choi, m=1..5");
    for (r, want) in cases {
        let curve = verify::adapted_curve(100, 0.992, Scaling::Choi, r, 5);
        let got = verify::trend(&curve);
        ok &= got == want;
        detail.push_str(&format!(
            "\n      r={r}: {got:?} (want {want:?}): {}",
            curve_text(&curve)
        ));
    }
    (ok, detail)
}

fn interior_optimum() -> (bool, String) {
    let mut ok = true;
    let mut detail = String::new();
    for (q2, scaling) in [(0.996, Scaling::Linear), (0.9997, Scaling::Quadratic)] {
        let grid: Vec<f64> = (0..=20).map(|k| 0.9 + 0.005 * k as f64).collect();
        let hits: Vec<(f64, usize, Vec<f64>)> = grid
            .iter()
            .filter_map(|&r| {
                let curve = verify::adapted_curve(10, q2, scaling, r, 5);
                verify::interior_maximum(&curve).map(|k| (r, k + 1, curve))
            })
            .collect();
        ok &= !hits.is_empty();
        detail.push_str(&format!(
            "\n      N=10, {} q2={q2}: interior maximum for {} of {} r values in [0.9, 1]",
            scaling.name(),
            hits.len(),
            grid.len()
        ));
        if let Some((r, m, curve)) = hits.first() {
            detail.push_str(&format!(
                ", e.g. r={r:.3} peaks at m={m}: {}",
                curve_text(curve)
            ));
        }
    }
    (ok, detail)
}

fn efficiency() -> (bool, String) {
    let n = 10_000usize;
    let f = FieldCtx::new(2, 1).expect("GF(2)");
    let d = f.order() as usize;
    let g = WeightedGraph::linear_cluster(f.clone(), n).expect("chain");
    let channels = (1..=n as Vertex)
        .map(|v| depolarizing_channel(&g, v, 0.99f64))
        .collect::<Result<Vec<_>, _>>()
        .expect("valid lambda");
    let start = Instant::now();
    let mut state = TrackedState::new(g, channels).expect("channels on graph");
    let mut worst = 0.0f64;
    let mut violations = 0;
    let order = StrategyOrder::side_to_side(n).expect("n >= 3");
    for op in chain::chain_script(&order) {
        let alive = state.graph().len();
        let stats = state.apply(&op).expect("valid measurement");
        worst = worst.max(stats.rule_evaluations as f64 / (d * alive) as f64);
        if stats.rule_evaluations > d * alive {
            violations += 1;
        }
    }
    let elapsed = start.elapsed();
    let fid =
        qudit_nsf::fidelity::fidelity_of(state.channels(), state.graph()).expect("two qudits left");
    (
        violations == 0 && elapsed < Duration::from_secs(60),
        format!(
            "N={n}: {} measurements in {:.2}s, max rule evaluations/(d n) = {worst:.4}, {violations} over budget, F={fid:.6}",
            n - 2,
            elapsed.as_secs_f64()
        ),
    )
}

fn order_sensitivity() -> (bool, String) {
    match verify::order_sensitivity() {
        Ok(w) => (
            true,
            format!(
                "N=5, d=2: order {:?} gives [{}], order {:?} gives [{}]; both match the oracle",
                w.first.0,
                verify::describe_weights(&w.first.1),
                w.second.0,
                verify::describe_weights(&w.second.1)
            ),
        ),
        Err(e) => (false, e),
    }
}

fn main() {
    let lines = vec![
        timed(1, "oracle equivalence", Some(300), oracle_equivalence),
        timed(2, "measurement graph rules", Some(120), measurement_rules),
        timed(3, "chain structure theorem", None, structure_theorem),
        timed(4, "side-to-side closed form", Some(30), side_to_side),
        timed(
            5,
            "analytic vs convolution fidelity",
            None,
            analytic_vs_convolution,
        ),
        timed(
            6,
            "critical depolarizing parameter",
            None,
            critical_parameter,
        ),
        timed(
            7,
            "adapted fidelity trends over m",
            Some(60),
            adapted_trends,
        ),
        timed(8, "interior optimal dimension", Some(60), interior_optimum),
        timed(9, "linear-in-N tracking", None, efficiency),
        timed(10, "measurement order sensitivity", None, order_sensitivity),
    ];
    let mut all = true;
    for l in &lines {
        all &= l.ok;
        let budget = l
            .budget
            .map(|b| format!(" / {}s", b.as_secs()))
            .unwrap_or_default();
        println!(
            "criterion {:>2} {}: {} [{:.2}s{budget}] {}",
            l.id,
            if l.ok { "PASS" } else { "FAIL" },
            l.title,
            l.elapsed.as_secs_f64(),
            l.detail
        );
    }
    if !all {
        std::process::exit(1);
    }
}
