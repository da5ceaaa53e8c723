//! Weyl-basis measurements on a qutrit graph: the rule chosen for each basis,
//! the graph after the measurement, and the correction that restores a graph
//! state. Each case is checked against a dense projection.

use qudit_nsf::gf::FieldCtx;
use qudit_nsf::graph::WeightedGraph;
use qudit_nsf::measure::{measure, MeasurementSpec, WeylIndex};
use qudit_nsf::verify::measurement_case;

fn main() {
    let f = FieldCtx::new(3, 1).expect("GF(3)");
    let mut g = WeightedGraph::linear_cluster(f.clone(), 4).expect("path");
    g.set_weight(1, 3, f.from_int(2)).expect("edge");
    let bases = [(1, 0), (0, 1), (1, 1), (2, 1), (0, 2)];
    for (z, x) in bases {
        let basis = WeylIndex::new(f.from_int(z), f.from_int(x));
        for b in f.elements() {
            let spec = MeasurementSpec::new(2, basis, b);
            let m = measure(&g, &spec).expect("valid measurement");
            let edges: Vec<String> = m
                .graph
                .edges()
                .map(|(u, v, w)| format!("{u}-{v}:{}", f.format(w)))
                .collect();
            let check = measurement_case(&g, &spec)
                .map(|_| "ok".to_string())
                .unwrap_or_else(|e| e);
            println!(
                "W({z},{x}) outcome {}: rule {:?}, graph [{}], {} correction gates, oracle {check}",
                f.format(b),
                m.rule,
                edges.join(" "),
                m.correction.gates.len()
            );
        }
    }
}
