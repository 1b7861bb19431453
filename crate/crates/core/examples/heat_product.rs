// (∂t − Δ)(∂t − 2Δ) u = 0 with u(0) = sin x, ∂t u(0) = 0.
// Exact: u(t, x) = (2e^{−t} − e^{−2t}) sin x.
//
// $ cargo run --example heat_product

use num_complex::Complex64 as C;
use opcauchy::field::{Field, Grid};
use opcauchy::kernel::{solve, CauchyProblem, SolveOptions};
use opcauchy::symbol_poly::{CharacteristicSpec, Kind, SymbolPolynomial};

fn main() {
    let grid = Grid::cube(1, 32);
    let spec = CharacteristicSpec::from_roots(Kind::FirstOrderProduct, &[C::new(1.0, 0.0), C::new(2.0, 0.0)]).unwrap();
    let problem = CauchyProblem {
        spec,
        operator: SymbolPolynomial::laplacian(1),
        grid: grid.clone(),
        phi: vec![Field::from_fn(&grid, |x| C::new(x[0].sin(), 0.0)), Field::zeros(&grid)],
        forcing: None,
        times: vec![0.25, 0.5, 1.0, 2.0],
    };
    let sol = solve(&problem, SolveOptions::default()).unwrap();

    println!("{:>6} {:>22} {:>10}", "t", "amplitude", "error");
    let probe = grid.len() / 4; // x = π/2
    for (t, u) in &sol.snapshots {
        let exact = 2.0 * (-t).exp() - (-2.0 * t).exp();
        let got = u.data[probe].re;
        println!("{t:>6.2} {got:>22.16} {:>10.2e}", (got - exact).abs());
    }
}
