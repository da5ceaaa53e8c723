//! Compares the tracked channels with a dense simulation that applies the
//! noise physically, on random scripts over GF(2), GF(3) and GF(9).

use qudit_nsf::verify::{field_for_order, oracle_equivalence};

fn main() {
    for d in [2, 3, 9] {
        let f = field_for_order(d).expect("prime power");
        println!("{}", oracle_equivalence(&f, 20, 4, 7));
    }
}
