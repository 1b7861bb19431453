//! Scalar operator functions `exp`, `sinh(√z)/√z`, `cosh(√z)` and their use as
//! Fourier multipliers.
//!
//! Both square-root functions are even in `√z`, so they are entire in `z` and
//! evaluated without any branch choice: a Taylor series near the origin and
//! the closed form elsewhere.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::symbol_poly::SymbolPolynomial;

type C = Complex64;

/// Exponent magnitude past which results saturate and are flagged.
pub const OVERFLOW_EXPONENT: f64 = 700.0;

/// Radius below which the Taylor series is used.
pub const SERIES_RADIUS: f64 = 0.25;

const SERIES_TERMS: usize = 12;

/// A scalar result together with its overflow flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged {
    pub value: C,
    pub overflow: bool,
}

impl From<C> for Flagged {
    fn from(value: C) -> Self {
        Flagged {
            value,
            overflow: false,
        }
    }
}

fn clamp_real(w: C) -> (C, bool) {
    if w.re.abs() > OVERFLOW_EXPONENT {
        (C::new(OVERFLOW_EXPONENT.copysign(w.re), w.im), true)
    } else {
        (w, false)
    }
}

/// `sinh(√z)/√z` with overflow flag.
pub fn sinhc_sqrt_flagged(z: C) -> Flagged {
    if z.norm() < SERIES_RADIUS {
        // Σ z^k / (2k+1)!
        let mut term = C::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..SERIES_TERMS {
            term = term * z / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
        }
        return sum.into();
    }
    let w = z.sqrt();
    let (wc, overflow) = clamp_real(w);
    Flagged {
        value: wc.sinh() / w,
        overflow,
    }
}

/// `cosh(√z)` with overflow flag.
pub fn cosh_sqrt_flagged(z: C) -> Flagged {
    if z.norm() < SERIES_RADIUS {
        // Σ z^k / (2k)!
        let mut term = C::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..SERIES_TERMS {
            term = term * z / ((2 * k - 1) as f64 * (2 * k) as f64);
            sum += term;
        }
        return sum.into();
    }
    let (w, overflow) = clamp_real(z.sqrt());
    Flagged {
        value: w.cosh(),
        overflow,
    }
}

/// `e^{t a p}` with overflow flag.
pub fn exp_prop_flagged(t: f64, a: C, p: C) -> Flagged {
    let w = a * p * t;
    if w.re > OVERFLOW_EXPONENT {
        return Flagged {
            value: C::new(OVERFLOW_EXPONENT, w.im).exp(),
            overflow: true,
        };
    }
    w.exp().into()
}

pub fn sinhc_sqrt(z: C) -> C {
    sinhc_sqrt_flagged(z).value
}

pub fn cosh_sqrt(z: C) -> C {
    cosh_sqrt_flagged(z).value
}

pub fn exp_prop(t: f64, a: C, p: C) -> C {
    exp_prop_flagged(t, a, p).value
}

/// Result of [`apply_multiplier`]: the filtered field and any wavevectors whose
/// multiplier saturated.
#[derive(Debug, Clone)]
pub struct Multiplied {
    pub field: Field,
    pub overflowed: Vec<Vec<i64>>,
}

/// Applies `g(P)` to `u`: transform, scale the coefficient at wavevector `k` by
/// `g(p(k))`, transform back. `u` should be resolved on its grid.
pub fn apply_multiplier<G, T>(u: &Field, op: &SymbolPolynomial, g: G) -> Result<Multiplied>
where
    G: Fn(C) -> T + Sync,
    T: Into<Flagged>,
{
    if op.dim != u.grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.grid.dim(),
            got: op.dim,
        });
    }
    let mut spec = u.forward();
    let grid = u.grid.clone();
    let flags: Vec<bool> = spec
        .data
        .par_iter_mut()
        .enumerate()
        .map(|(i, v)| {
            let p = op.symbol_eval(&grid.wavevector(i), &grid.lengths);
            let r: Flagged = g(p).into();
            *v *= r.value;
            r.overflow
        })
        .collect();
    let overflowed = flags
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(i, _)| grid.wavevector(i))
        .collect();
    Ok(Multiplied {
        field: spec.inverse(),
        overflowed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    /// Independent high-order Taylor oracle: Σ_{k<40} z^k / (2k+1)!.
    fn sinhc_series_oracle(z: C) -> C {
        let mut term = C::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..40 {
            term = term * z / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
        }
        sum
    }

    fn cosh_series_oracle(z: C) -> C {
        let mut term = C::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..40 {
            term = term * z / ((2 * k - 1) as f64 * (2 * k) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn sinhc_examples() {
        assert_eq!(sinhc_sqrt(C::new(0.0, 0.0)), C::new(1.0, 0.0));
        assert!(sinhc_sqrt(C::new(-PI * PI, 0.0)).norm() < 1e-15);
        let one = sinhc_sqrt(C::new(1.0, 0.0));
        assert!((one.re - 1.1752011936438014).abs() < 1e-15);
        assert!(close(one, sinhc_series_oracle(C::new(1.0, 0.0)), 1e-15));
    }

    #[test]
    fn cosh_examples() {
        assert_eq!(cosh_sqrt(C::new(0.0, 0.0)), C::new(1.0, 0.0));
        assert!(close(cosh_sqrt(C::new(-PI * PI, 0.0)), C::new(-1.0, 0.0), 1e-15));
        let four = cosh_sqrt(C::new(4.0, 0.0));
        assert!((four.re - 3.7621956910836314).abs() < 1e-14);
        assert!(close(four, cosh_series_oracle(C::new(4.0, 0.0)), 1e-15));
    }

    #[test]
    fn exp_examples() {
        assert_eq!(exp_prop(0.0, C::new(3.0, 1.0), C::new(2.0, -1.0)), C::new(1.0, 0.0));
        let v = exp_prop(1.0, C::new(1.0, 0.0), C::new(-1.0, 0.0));
        assert!((v.re - 0.36787944117144233).abs() < 1e-16);
        let w = exp_prop(2.0, C::new(1.0, 1.0), C::new(0.0, 1.0));
        assert!((w.norm() - (-2.0f64).exp()).abs() < 1e-16);
        assert!(close(w, C::new(-2.0, 2.0).exp(), 1e-15));
    }

    #[test]
    fn overflow_saturates_and_flags() {
        let r = exp_prop_flagged(1.0, C::new(1.0, 0.0), C::new(800.0, 0.0));
        assert!(r.overflow && r.value.is_finite());
        let s = sinhc_sqrt_flagged(C::new(800.0 * 800.0, 0.0));
        assert!(s.overflow && s.value.is_finite());
        let c = cosh_sqrt_flagged(C::new(-800.0 * 800.0, 0.0));
        assert!(!c.overflow);
    }

    #[test]
    fn identity_multiplier() {
        let grid = Grid::cube(2, 8);
        let u = Field::from_fn(&grid, |x| C::new(x[0].sin() * (2.0 * x[1]).cos(), x[1].cos()));
        let out = apply_multiplier(&u, &SymbolPolynomial::laplacian(2), |_| C::new(1.0, 0.0)).unwrap();
        assert!(out.field.relative_l2(&u) < 1e-12);
    }

    #[test]
    fn heat_decay_of_single_mode() {
        let grid = Grid::cube(1, 16);
        let u = Field::from_fn(&grid, |x| C::from_polar(1.0, x[0]));
        let t = 0.7;
        let out = apply_multiplier(&u, &SymbolPolynomial::laplacian(1), |p| {
            exp_prop(t, C::new(1.0, 0.0), p)
        })
        .unwrap();
        let expect = u.scaled(C::new((-t).exp(), 0.0));
        assert!(out.field.relative_l2(&expect) < 1e-13);
    }

    #[test]
    fn dalembert_single_mode() {
        let grid = Grid::cube(1, 16);
        let u = Field::from_fn(&grid, |x| C::new((2.0 * x[0]).sin(), 0.0));
        let t: f64 = 0.9;
        let out = apply_multiplier(&u, &SymbolPolynomial::laplacian(1), |p| sinhc_sqrt(p * t * t))
            .unwrap();
        // t·sinhc(−4t²) = sin(2t)/2, so sinhc alone is sin(2t)/(2t).
        let expect = u.scaled(C::new((2.0 * t).sin() / (2.0 * t), 0.0));
        assert!(out.field.relative_l2(&expect) < 1e-13);
    }

    #[test]
    fn continuity_across_series_switch() {
        for k in 0..32 {
            let theta = 2.0 * PI * k as f64 / 32.0;
            let z = C::from_polar(SERIES_RADIUS, theta);
            let w = z.sqrt();
            assert!(close(sinhc_series_oracle(z), w.sinh() / w, 1e-13));
            assert!(close(cosh_series_oracle(z), w.cosh(), 1e-13));
            let inside = C::from_polar(SERIES_RADIUS * (1.0 - 1e-15), theta);
            let outside = C::from_polar(SERIES_RADIUS * (1.0 + 1e-15), theta);
            assert!(close(sinhc_sqrt(inside), sinhc_sqrt(outside), 1e-13));
            assert!(close(cosh_sqrt(inside), cosh_sqrt(outside), 1e-13));
        }
    }

    proptest! {
        #[test]
        fn derivative_of_t_sinhc_is_cosh(re in -4.0f64..4.0, im in -4.0f64..4.0, t in 0.1f64..1.5) {
            let p = C::new(re, im);
            let h = 1e-5;
            let f = |s: f64| sinhc_sqrt(p * s * s) * s;
            let fd = (f(t + h) - f(t - h)) / (2.0 * h);
            let exact = cosh_sqrt(p * t * t);
            prop_assert!((fd - exact).norm() <= 1e-7 * (1.0 + exact.norm()));
        }

        #[test]
        fn branch_independent(re in -50.0f64..50.0, im in -50.0f64..50.0) {
            let z = C::new(re, im);
            let w = z.sqrt();
            let plus = w.sinh() / w;
            let minus = (-w).sinh() / (-w);
            prop_assert_eq!(plus, minus);
            prop_assert!(close(sinhc_sqrt(z), plus, 1e-14));
        }

        #[test]
        fn exp_semigroup(t1 in 0.0f64..0.5, t2 in 0.0f64..0.5, seed in 0u64..1000) {
            let grid = Grid::cube(1, 16);
            let u = Field::from_fn(&grid, |x| {
                let s = seed as f64;
                C::new((x[0] + s).sin() + 0.3 * (3.0 * x[0]).cos(), (2.0 * x[0] - s).cos())
            });
            let op = SymbolPolynomial::laplacian(1);
            let a = C::new(1.0, 0.5);
            let step = |v: &Field, t: f64| apply_multiplier(v, &op, |p| exp_prop(t, a, p)).unwrap().field;
            let two = step(&step(&u, t1), t2);
            let one = step(&u, t1 + t2);
            prop_assert!(two.relative_l2(&one) < 1e-10);
        }
    }
}
