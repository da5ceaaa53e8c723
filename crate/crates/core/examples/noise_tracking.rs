//! Tracks depolarizing noise through a short script on a GF(5) graph, in exact
//! rational arithmetic, and prints the channels and the final fidelity.

use num_rational::BigRational;
use qudit_nsf::fidelity::fidelity_of;
use qudit_nsf::gf::FieldCtx;
use qudit_nsf::graph::WeightedGraph;
use qudit_nsf::measure::{MeasurementSpec, WeylIndex};
use qudit_nsf::noise::{depolarizing_channel, Operation, TrackedState};
use qudit_nsf::prob::Probability;

fn main() {
    let f = FieldCtx::new(5, 1).expect("GF(5)");
    let g = WeightedGraph::linear_cluster(f.clone(), 5).expect("path");
    let lambda = BigRational::from_ratio(9, 10);
    let channels = g
        .vertices()
        .map(|v| depolarizing_channel(&g, v, lambda.clone()))
        .collect::<Result<Vec<_>, _>>()
        .expect("valid lambda");
    let mut state = TrackedState::new(g, channels).expect("channels on graph");
    let script = [
        Operation::LocalComplement {
            vertex: 3,
            factor: f.from_int(2),
        },
        Operation::Cz {
            a: 1,
            b: 5,
            count: f.from_int(1),
        },
        Operation::Measure(MeasurementSpec::new(
            2,
            WeylIndex::new(f.from_int(1), f.from_int(1)),
            f.from_int(0),
        )),
        Operation::Measure(MeasurementSpec::new(
            4,
            WeylIndex::new(f.from_int(1), f.from_int(0)),
            f.from_int(3),
        )),
    ];
    for op in &script {
        let stats = state.apply(op).expect("valid operation");
        println!("{op:?}\n    -> {stats:?}");
    }
    let edges: Vec<String> = state
        .graph()
        .edges()
        .map(|(u, v, w)| format!("{u}-{v}:{}", f.format(w)))
        .collect();
    println!("final graph: [{}]", edges.join(" "));
    for (i, ch) in state.channels().iter().enumerate() {
        println!(
            "channel {} ({} terms), identity weight {}",
            i + 1,
            ch.len(),
            ch.identity_probability()
        );
    }
    let fid = fidelity_of(state.channels(), state.graph()).expect("fidelity");
    println!(
        "fidelity to the final graph state: {fid} = {:.6}",
        fid.to_f64()
    );
}
