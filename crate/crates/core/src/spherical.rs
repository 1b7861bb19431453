//! Spherical-mean realization of `sinh(t a √Δ₃)/(a √Δ₃)` in three dimensions:
//! the operator maps `u` to `t · M(u; x, a t)`, where `M` is the average of
//! `u` over the sphere of radius `a t` centred at `x`.
//!
//! Off-grid samples come from the trigonometric interpolant of `u`, so for
//! band-limited data the only error left is the sphere quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Field, SpectralField};
use crate::quadrature::GaussLegendre;

type C = Complex64;

/// Product Gauss rule on the unit sphere: Gauss–Legendre in `cos θ` times the
/// trapezoid rule in `φ`. Integrates every spherical harmonic of degree
/// `<= order` exactly; all weights are positive and sum to `4π`.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    pub order: usize,
    pub directions: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn new(order: usize) -> Self {
        let polar = order / 2 + 1;
        let azimuthal = order + 1;
        let gl = GaussLegendre::new(polar);
        let mut directions = Vec::with_capacity(polar * azimuthal);
        let mut weights = Vec::with_capacity(polar * azimuthal);
        for (&mu, &w) in gl.reference_nodes().iter().zip(gl.reference_weights()) {
            let s = (1.0 - mu * mu).sqrt();
            for j in 0..azimuthal {
                let phi = 2.0 * PI * j as f64 / azimuthal as f64;
                directions.push([s * phi.cos(), s * phi.sin(), mu]);
                weights.push(w * 2.0 * PI / azimuthal as f64);
            }
        }
        SphereQuadrature {
            order,
            directions,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weights normalized to sum to one (for averages).
    pub fn mean_weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().map(|w| w / (4.0 * PI))
    }
}

/// Surface measure `2 (2π)^{ν+1} r^{n−1}` used to normalize the sphere
/// integral in odd dimension `n = 2ν + 3`. For `n = 3` it is the sphere area.
pub fn surface_normalization(n: usize, radius: f64) -> f64 {
    assert!(n >= 3 && n % 2 == 1, "odd dimension >= 3 required");
    let nu = (n - 3) / 2;
    2.0 * (2.0 * PI).powi(nu as i32 + 1) * radius.powi(n as i32 - 1)
}

fn require_3d(u: &Field) -> Result<()> {
    if u.grid.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: u.grid.dim(),
        });
    }
    Ok(())
}

/// Mean of `u` over the sphere of `radius` about `center`; points off the grid
/// (or outside the box) are read from the periodic trigonometric interpolant.
pub fn sphere_mean(u: &Field, center: &[f64], radius: f64, q: &SphereQuadrature) -> Result<C> {
    require_3d(u)?;
    let spectral = u.forward();
    if radius == 0.0 {
        return Ok(spectral.interpolate(center));
    }
    Ok(q.directions
        .iter()
        .zip(q.mean_weights())
        .map(|(n, w)| {
            let x = [
                center[0] + radius * n[0],
                center[1] + radius * n[1],
                center[2] + radius * n[2],
            ];
            spectral.interpolate(&x) * w
        })
        .sum())
}

/// Sphere means of radius `radius` at every grid point at once.
///
/// Shifting the interpolant by `s` multiplies the coefficient at `k` by
/// `e^{i k·s}` (by `cos(k s)` along a Nyquist axis, matching
/// [`SpectralField::interpolate`] on grid points), so the average over the
/// quadrature directions is a per-coefficient weighted sum of phases.
pub fn sphere_mean_field(u: &Field, radius: f64, q: &SphereQuadrature) -> Result<Field> {
    require_3d(u)?;
    let spectral = u.forward();
    let grid = &u.grid;
    let weights: Vec<f64> = q.mean_weights().collect();
    let mut out = SpectralField::zeros(grid);
    out.data
        .par_iter_mut()
        .enumerate()
        .for_each(|(flat, slot)| {
            let coeff = spectral.data[flat];
            if coeff.norm_sqr() == 0.0 {
                return;
            }
            let idx = grid.unravel(flat);
            let k = grid.angular_wavevector(flat);
            let nyquist: Vec<bool> = (0..3)
                .map(|d| grid.shape[d].is_multiple_of(2) && 2 * idx[d] == grid.shape[d])
                .collect();
            let mut avg = C::new(0.0, 0.0);
            for (n, w) in q.directions.iter().zip(&weights) {
                let mut phase = C::new(1.0, 0.0);
                for d in 0..3 {
                    let arg = k[d] * radius * n[d];
                    phase *= if nyquist[d] {
                        C::new(arg.cos(), 0.0)
                    } else {
                        C::from_polar(1.0, arg)
                    };
                }
                avg += phase * *w;
            }
            *slot = coeff * avg;
        });
    Ok(out.inverse())
}

/// `sinh(t a √Δ₃)/(a √Δ₃) u = t · M(u; x, a t)` evaluated on the whole grid.
pub fn sinhc_spherical(u: &Field, a: f64, t: f64, q: &SphereQuadrature) -> Result<Field> {
    require_3d(u)?;
    if !(a > 0.0) || t < 0.0 {
        return Err(Error::InvalidProblem(format!(
            "spherical realization needs a > 0 and t >= 0 (a = {a}, t = {t})"
        )));
    }
    if t == 0.0 {
        return Ok(Field::zeros(&u.grid));
    }
    Ok(sphere_mean_field(u, a * t, q)?.scaled(C::new(t, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use crate::multiplier::{apply_multiplier, sinhc_sqrt};
    use crate::symbol_poly::SymbolPolynomial;
    use rand::{Rng, SeedableRng};

    /// `∫ x^a y^b z^c dS` over the unit sphere (zero unless all exponents are even).
    fn monomial_integral(a: u32, b: u32, c: u32) -> f64 {
        if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
            return 0.0;
        }
        // Γ(n + 1/2) / √π = (2n)! / (4^n n!)
        let half_gamma = |n: u32| -> f64 {
            let mut v = 1.0;
            for k in 0..n {
                v *= k as f64 + 0.5;
            }
            v
        };
        let (na, nb, nc) = (a / 2, b / 2, c / 2);
        let total = na + nb + nc + 1;
        // 2 Γ(α)Γ(β)Γ(γ)/Γ(α+β+γ) with α = (a+1)/2 etc; α+β+γ = total + 1/2.
        let num = half_gamma(na) * half_gamma(nb) * half_gamma(nc) * PI.powf(1.5);
        let den = half_gamma(total) * PI.sqrt();
        2.0 * num / den
    }

    #[test]
    fn weights_positive_and_sum_to_full_solid_angle() {
        let q = SphereQuadrature::new(29);
        assert!(q.weights.iter().all(|&w| w > 0.0));
        let s: f64 = q.weights.iter().sum();
        assert!((s - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn exact_for_monomials_up_to_order() {
        let order = 11;
        let q = SphereQuadrature::new(order);
        for a in 0..=order as u32 {
            for b in 0..=(order as u32 - a) {
                for c in 0..=(order as u32 - a - b) {
                    let got: f64 = q
                        .directions
                        .iter()
                        .zip(&q.weights)
                        .map(|(n, w)| w * n[0].powi(a as i32) * n[1].powi(b as i32) * n[2].powi(c as i32))
                        .sum();
                    let exact = monomial_integral(a, b, c);
                    assert!((got - exact).abs() < 1e-13, "x^{a} y^{b} z^{c}: {got} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn three_dimensional_normalization_is_sphere_area() {
        for r in [0.3, 1.0, 2.5] {
            assert!((surface_normalization(3, r) - 4.0 * PI * r * r).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_field_mean() {
        let grid = Grid::cube(3, 8);
        let u = Field::from_fn(&grid, |_| C::new(1.0, 0.0));
        let q = SphereQuadrature::new(9);
        for r in [0.0, 0.4, 3.0] {
            let m = sphere_mean(&u, &[0.1, 0.2, 0.3], r, &q).unwrap();
            assert!((m - C::new(1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn mean_value_identity_for_cosine() {
        let grid = Grid::cube(3, 8);
        let u = Field::from_fn(&grid, |x| C::new(x[0].cos(), 0.0));
        let q = SphereQuadrature::new(29);
        for r in [0.2f64, 1.0, 2.0] {
            let m = sphere_mean(&u, &[0.0; 3], r, &q).unwrap();
            assert!((m - C::new(r.sin() / r, 0.0)).norm() < 1e-12, "r={r}: {m}");
        }
    }

    #[test]
    fn zero_radius_is_point_value() {
        let grid = Grid::cube(3, 8);
        let f = |x: &[f64]| C::new((x[0] + 2.0 * x[1]).sin(), x[2].cos());
        let u = Field::from_fn(&grid, f);
        let q = SphereQuadrature::new(5);
        let c = [0.3, 1.7, 4.1];
        assert!((sphere_mean(&u, &c, 0.0, &q).unwrap() - f(&c)).norm() < 1e-12);
    }

    #[test]
    fn pointwise_and_grid_means_agree() {
        let grid = Grid::cube(3, 8);
        let u = Field::from_fn(&grid, |x| C::new((x[0] - x[2]).cos() + (2.0 * x[1]).sin(), (x[0] + x[1]).sin()));
        let q = SphereQuadrature::new(13);
        let r = 0.9;
        let all = sphere_mean_field(&u, r, &q).unwrap();
        for flat in [0, 77, 300, 511] {
            let p = grid.point(flat);
            let m = sphere_mean(&u, &p, r, &q).unwrap();
            assert!((m - all.data[flat]).norm() < 1e-12);
        }
    }

    #[test]
    fn kirchhoff_cosine_mode() {
        let grid = Grid::cube(3, 8);
        let u = Field::from_fn(&grid, |x| C::new(x[0].cos(), 0.0));
        let q = SphereQuadrature::new(29);
        assert_eq!(sinhc_spherical(&u, 1.0, 0.0, &q).unwrap(), Field::zeros(&grid));
        let t: f64 = 1.3;
        let s = sinhc_spherical(&u, 1.0, t, &q).unwrap();
        let expect = u.scaled(C::new(t.sin(), 0.0));
        assert!(s.relative_l2(&expect) < 1e-12);
        assert!((sinhc_sqrt(C::new(-t * t, 0.0)) * t - C::new(t.sin(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn matches_spectral_multiplier_on_band_limited_data() {
        let grid = Grid::cube(3, 16);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut spec = SpectralField::zeros(&grid);
        for (flat, v) in spec.data.iter_mut().enumerate() {
            if grid.wavevector(flat).iter().all(|k| k.abs() <= 3) {
                *v = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        let u = spec.inverse();
        let (a, t) = (1.0, 0.8);
        let q = SphereQuadrature::new(29);
        let spherical = sinhc_spherical(&u, a, t, &q).unwrap();
        let spectral = apply_multiplier(&u, &SymbolPolynomial::laplacian(3), |p| {
            sinhc_sqrt(p * (a * a * t * t)) * t
        })
        .unwrap()
        .field;
        assert!(spherical.relative_l2(&spectral) < 1e-3);
    }

    #[test]
    fn linear_and_translation_equivariant() {
        let grid = Grid::cube(3, 8);
        let f = |x: &[f64]| C::new((x[0] + x[1]).cos(), (2.0 * x[2]).sin());
        let g = |x: &[f64]| C::new((x[1] - x[2]).sin(), 0.5);
        let (u, v) = (Field::from_fn(&grid, f), Field::from_fn(&grid, g));
        let q = SphereQuadrature::new(15);
        let s = |w: &Field| sinhc_spherical(w, 1.5, 0.6, &q).unwrap();
        let alpha = C::new(0.3, -1.2);
        let lhs = s(&u.scaled(alpha).add(&v));
        let rhs = s(&u).scaled(alpha).add(&s(&v));
        assert!(lhs.relative_l2(&rhs) < 1e-12);
        // Shift by two grid cells along the second axis.
        let h = grid.spacing(1) * 2.0;
        let shifted = Field::from_fn(&grid, |x| f(&[x[0], x[1] + h, x[2]]));
        let su = s(&u);
        let expect = Field::from_fn(&grid, |x| {
            let idx = grid.unravel((0..grid.len()).find(|&i| grid.point(i) == x).unwrap());
            let j = (idx[1] + 2) % grid.shape[1];
            su.data[(idx[0] * grid.shape[1] + j) * grid.shape[2] + idx[2]]
        });
        assert!(s(&shifted).relative_l2(&expect) < 1e-12);
    }
}
