// Abstract operators as Fourier multipliers: the heat semigroup e^{tΔ} and the
// wave propagators cosh(t√Δ), sinh(t√Δ)/√Δ.
//
// $ cargo run --example multiplier_operators

use num_complex::Complex64 as C;
use opcauchy::field::{Field, Grid};
use opcauchy::multiplier::{apply_multiplier, cosh_sqrt, exp_prop, sinhc_sqrt};
use opcauchy::symbol_poly::SymbolPolynomial;

fn main() {
    let grid = Grid::cube(1, 64);
    let lap = SymbolPolynomial::laplacian(1);
    let u = Field::from_fn(&grid, |x| C::new((-4.0 * (x[0] - 3.0).powi(2)).exp(), 0.0));

    let t = 0.5;
    let heat = apply_multiplier(&u, &lap, |p| exp_prop(t, C::new(1.0, 0.0), p)).unwrap().field;
    let total = |f: &Field| f.data.iter().sum::<C>().re * grid.spacing(0);
    println!("heat: mass {:.12} -> {:.12}, peak {:.4} -> {:.4}", total(&u), total(&heat), u.max_abs(), heat.max_abs());

    // d'Alembert: cosh(t√Δ) u = (u(x+t) + u(x−t)) / 2.
    let t = 1.0;
    let wave = apply_multiplier(&u, &lap, |p| cosh_sqrt(p * (t * t))).unwrap().field;
    let shifted = Field::from_fn(&grid, |x| {
        let g = |y: f64| (-4.0 * (y - 3.0).powi(2)).exp();
        C::new(0.5 * (g(x[0] + t) + g(x[0] - t)), 0.0)
    });
    println!("cosh(t√Δ) vs d'Alembert: {:.2e}", wave.relative_l2(&shifted));

    let velocity = apply_multiplier(&u, &lap, |p| sinhc_sqrt(p * (t * t)) * t).unwrap();
    println!("sinh(t√Δ)/√Δ: peak {:.4}, overflowed {}", velocity.field.max_abs(), velocity.overflowed.len());
}
