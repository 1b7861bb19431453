// Closed-form kernels against the companion-matrix ODE oracle on random modes.
//
// $ cargo run --example oracle_comparison

use num_complex::Complex64 as C;
use opcauchy::kernel::solve_mode;
use opcauchy::oracle::{mode_ode_solve, CompanionSystem};
use opcauchy::quadrature::QuadConfig;
use opcauchy::symbol_poly::{CharacteristicSpec, Kind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut c = || C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let roots = [c() * 2.0, c() * 2.0, c() * 2.0];
    let p = c() * 3.0;
    let phi = [c(), c(), c()];
    let spec = CharacteristicSpec::from_roots(Kind::FirstOrderProduct, &roots).unwrap();

    let mut sys = CompanionSystem::new(&spec, p);
    println!("eigenvalues    {:.4?}", sys.eigenvalues());
    let ap: Vec<C> = roots.iter().map(|a| a * p).collect();
    println!("a_j p          {ap:.4?}");

    let f = |s: f64| C::new((3.0 * s).cos(), s);
    for t in [0.25, 0.5, 1.0] {
        let oracle = mode_ode_solve(&spec, p, &phi, Some(&f), t);
        let kernel = solve_mode(&spec, p, &phi, Some(&f), t, QuadConfig::default(), None).unwrap();
        println!("t = {t}: oracle {oracle:.12}, kernel {:.12}, diff {:.1e}", kernel.value, (oracle - kernel.value).norm());
    }
}
