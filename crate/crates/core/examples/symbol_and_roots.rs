// Symbols of spatial operators, characteristic roots and partial fractions.
//
// $ cargo run --example symbol_and_roots

use num_complex::Complex64 as C;
use opcauchy::symbol_poly::{
    lagrange_weights, partial_fraction_first, roots_from_coeffs, CharacteristicSpec, Kind, SymbolPolynomial,
    ROOT_GAP_TOL,
};

fn main() {
    // P = ∂x² + 0.5 ∂y² + 0.3i ∂x on a 2π × 3 box.
    let op = SymbolPolynomial::new(
        2,
        vec![
            (vec![2, 0], C::new(1.0, 0.0)),
            (vec![0, 2], C::new(0.5, 0.0)),
            (vec![1, 0], C::new(0.0, 0.3)),
        ],
    )
    .unwrap();
    let lengths = [std::f64::consts::TAU, 3.0];
    for k in [[0, 0], [1, 0], [0, 1], [2, -1]] {
        println!("p({k:?}) = {:.6}", op.symbol_eval(&k, &lengths));
    }

    // s³ + 6s² + 11s + 6 = (s+1)(s+2)(s+3), coefficients low to high.
    let b = [6.0, 11.0, 6.0, 1.0].map(|v| C::new(v, 0.0));
    let roots = roots_from_coeffs(&b, ROOT_GAP_TOL).unwrap();
    println!("roots {roots:.12?}");
    let pf = partial_fraction_first(&roots).unwrap();
    println!("c_j {pf:.6?}, sum {:.3e}", pf.iter().sum::<C>());
    for q in 0..3 {
        let s: C = lagrange_weights(&roots, q).iter().sum();
        println!("sum a_j^{q} / prod(a_j - a_i) = {s:.2e}");
    }

    // Non-monic input is normalized by its leading coefficient.
    let spec = CharacteristicSpec::from_coeffs(Kind::FirstOrderProduct, &b.map(|v| v * 2.0)).unwrap();
    println!("lead {} monic {:?}", spec.lead, spec.b);
    println!("mode coefficients at p = -1: {:?}", spec.mode_coefficients(C::new(-1.0, 0.0)));
}
