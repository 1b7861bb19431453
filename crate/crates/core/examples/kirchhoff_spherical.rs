// sinh(t a √Δ)/(a √Δ) u in three dimensions two ways: as a Fourier multiplier
// and as t times the mean of u over spheres of radius a t.
//
// $ cargo run --example kirchhoff_spherical

use num_complex::Complex64 as C;
use opcauchy::field::{Field, Grid, SpectralField};
use opcauchy::multiplier::{apply_multiplier, sinhc_sqrt};
use opcauchy::spherical::{sinhc_spherical, sphere_mean, SphereQuadrature};
use opcauchy::symbol_poly::SymbolPolynomial;

fn main() {
    // Mean-value property: the sphere mean of cos x1 is sin r / r.
    let grid = Grid::cube(3, 16);
    let u = Field::from_fn(&grid, |x| C::new(x[0].cos(), 0.0));
    let q = SphereQuadrature::new(29);
    println!("{} nodes", q.len());
    for r in [0.5f64, 1.0, 2.0] {
        let m = sphere_mean(&u, &[0.0; 3], r, &q).unwrap();
        println!("r = {r}: mean {:.15}, sin r / r {:.15}", m.re, r.sin() / r);
    }

    let u = SpectralField::random_band_limited(&grid, 4, 1).inverse();
    let lap = SymbolPolynomial::laplacian(3);
    for order in [5, 11, 17, 29] {
        let q = SphereQuadrature::new(order);
        let (a, t) = (1.0, 1.0);
        let spherical = sinhc_spherical(&u, a, t, &q).unwrap();
        let spectral = apply_multiplier(&u, &lap, |p| sinhc_sqrt(p * (a * a * t * t)) * t)
            .unwrap()
            .field;
        println!("order {order:>2}: relative L2 gap {:.2e}", spherical.relative_l2(&spectral));
    }
}
