#![allow(dead_code)]

use num_complex::Complex64 as C;
use opcauchy::symbol_poly::{CharacteristicSpec, Kind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn disc(rng: &mut ChaCha8Rng, radius: f64) -> C {
    C::from_polar(
        radius * rng.random_range(0.0f64..1.0).sqrt(),
        rng.random_range(0.0..std::f64::consts::TAU),
    )
}

/// A random mode problem: distinct roots in the disc of radius 2 with gap
/// >= 0.1, a symbol |p| <= 4 with Re(a_j p) <= 0 for every root.
pub struct ModeCase {
    pub spec: CharacteristicSpec,
    pub p: C,
    pub phi: Vec<C>,
    pub t: f64,
}

pub fn random_mode_case(rng: &mut ChaCha8Rng, kind: Kind, m: usize) -> ModeCase {
    let p = disc(rng, 4.0);
    let roots = loop {
        let roots: Vec<C> = (0..m)
            .map(|_| {
                let a = disc(rng, 2.0);
                if (a * p).re > 0.0 {
                    -a
                } else {
                    a
                }
            })
            .collect();
        let mut ok = true;
        for i in 0..m {
            if kind == Kind::EvenOrderProduct && roots[i].norm() < 0.1 {
                ok = false;
            }
            for j in i + 1..m {
                if (roots[i] - roots[j]).norm() < 0.1 {
                    ok = false;
                }
                if kind == Kind::EvenOrderProduct && (roots[i] + roots[j]).norm() < 0.1 {
                    ok = false;
                }
            }
        }
        if ok {
            break roots;
        }
    };
    let spec = CharacteristicSpec::from_roots(kind, &roots).unwrap();
    let phi = (0..spec.initial_count()).map(|_| disc(rng, 1.0)).collect();
    let t = [0.25, 0.5, 1.0][rng.random_range(0..3)];
    ModeCase { spec, p, phi, t }
}
