// Fourth-order wave operator (∂t² − Δ)(∂t² − 4Δ) u = 0 from u(0) = cos x at rest.
// The mode k = 1 beats between speeds 1 and 2: û(t) = 4/3 cos t − 1/3 cos 2t.
//
// $ cargo run --example wave_product

use num_complex::Complex64 as C;
use opcauchy::kernel::solve_mode;
use opcauchy::quadrature::QuadConfig;
use opcauchy::symbol_poly::{CharacteristicSpec, Kind};

fn main() {
    let spec = CharacteristicSpec::from_roots(Kind::EvenOrderProduct, &[C::new(1.0, 0.0), C::new(2.0, 0.0)]).unwrap();
    let phi = [C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)];
    let p = C::new(-1.0, 0.0);

    for nodes in [8, 16, 64] {
        let mut worst: f64 = 0.0;
        for i in 0..=40 {
            let t = 0.1 * i as f64;
            let exact = 4.0 / 3.0 * t.cos() - (2.0 * t).cos() / 3.0;
            let got = solve_mode(&spec, p, &phi, None, t, QuadConfig { nodes }, None).unwrap().value;
            worst = worst.max((got.re - exact).abs());
        }
        println!("{nodes:>3} nodes: max error on [0, 4] = {worst:.2e}");
    }
}
