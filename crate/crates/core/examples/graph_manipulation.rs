//! Weighted graph operations: local complementation, local multiplication,
//! CZ powers and vertex deletion on a GF(5) star.

use qudit_nsf::gf::FieldCtx;
use qudit_nsf::graph::WeightedGraph;

fn show(label: &str, g: &WeightedGraph) {
    let f = g.field();
    let edges: Vec<String> = g
        .edges()
        .map(|(u, v, w)| format!("{u}-{v}:{}", f.format(w)))
        .collect();
    println!("{label:<28} {}", edges.join(" "));
}

fn main() {
    let f = FieldCtx::new(5, 1).expect("GF(5)");
    let mut g = WeightedGraph::new(f.clone(), 1..=4).expect("vertices");
    for (v, w) in [(2, 1), (3, 2), (4, 4)] {
        g.set_weight(1, v, f.from_int(w)).expect("edge");
    }
    show("star around 1", &g);
    let lc = g.local_complement(1, f.from_int(1)).expect("lc");
    show("local complement at 1", &lc);
    show(
        "local multiply 1 by 3",
        &g.local_multiply(1, f.from_int(3)).expect("lm"),
    );
    show(
        "CZ^2 between 2 and 3",
        &g.apply_cz(2, 3, f.from_int(2)).expect("cz"),
    );
    show("delete 1", &g.delete_vertex(1).expect("delete"));
    let back = lc.local_complement(1, f.from_int(-1)).expect("lc");
    println!("complementing with -1 undoes it: {}", back == g);
}
