//! Arithmetic in GF(p^m): the prime field GF(7) and the extension GF(9).

use qudit_nsf::gf::FieldCtx;

fn main() {
    let f7 = FieldCtx::new(7, 1).expect("GF(7)");
    let (a, b) = (f7.from_int(3), f7.from_int(5));
    println!("GF(7): 3 + 5 = {}", f7.format(f7.add(a, b)));
    println!("GF(7): 3 * 5 = {}", f7.format(f7.mul(a, b)));
    println!("GF(7): 3^-1  = {}", f7.format(f7.inv(a).expect("nonzero")));

    let f9 = FieldCtx::new(3, 2).expect("GF(9)");
    println!("\nGF(9) modulus (low degree first): {:?}", f9.modulus());
    for x in f9.elements() {
        let inv = f9
            .inv(x)
            .map(|y| f9.format(y))
            .unwrap_or_else(|_| "-".into());
        println!(
            "  x = {:>8}  coeffs {:?}  trace {}  inverse {:>8}  chi(x) = {:.3}",
            f9.format(x),
            f9.coeffs(x),
            f9.trace(x),
            inv,
            f9.chi(x).to_complex()
        );
    }
    let sum: num_complex::Complex64 = f9.elements().map(|x| f9.chi(x).to_complex()).sum();
    println!("sum of chi over GF(9) = {sum:.3}");
}
