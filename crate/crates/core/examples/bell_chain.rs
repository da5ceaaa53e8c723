//! Measures out the middle of a noisy linear chain to leave a Bell pair.
//! Prints the middle maps, the weight vector and two independent fidelity
//! computations.

use num_rational::BigRational;
use qudit_nsf::chain::{
    analytic_fidelity, convolution_fidelity, run_chain, side_to_side_weights, StrategyOrder,
};
use qudit_nsf::gf::FieldCtx;
use qudit_nsf::prob::Probability;

fn main() {
    let (n, p) = (8usize, 3u32);
    let f = FieldCtx::new(p, 1).expect("GF(3)");
    let lambda = BigRational::from_ratio(19, 20);
    for order in [
        StrategyOrder::side_to_side(n).expect("order"),
        StrategyOrder::random(n, 11).expect("order"),
    ] {
        let run = run_chain(n, &f, lambda.clone(), &order).expect("chain");
        println!(
            "order (measured first to last): {:?}",
            order.measurement_sequence().collect::<Vec<_>>()
        );
        for (v, m) in &run.middle {
            println!("  channel of qudit {v}: {m}");
        }
        let counts: Vec<String> = run
            .weights
            .iter()
            .filter(|(_, c)| *c > 0)
            .map(|(m, c)| format!("w_{}^{}={c}", m.alpha, m.beta))
            .collect();
        println!("  weights: {}", counts.join(" "));
        let analytic = analytic_fidelity(&run.weights, &lambda, p as u64);
        let brute = convolution_fidelity(&run.weights, &lambda, &f).expect("convolution");
        println!("  F analytic = {analytic}, F convolution = {brute}\n");
    }
    println!(
        "closed-form side-to-side weights: {:?}",
        side_to_side_weights(n, p).expect("weights").counts()
    );
}
