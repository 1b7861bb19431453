//! Per-mode evaluation of the closed-form solutions: for a fixed symbol value
//! `p` every abstract operator becomes a scalar function of time.

use num_complex::Complex64;

use super::terms::{derivative_reduce, IntegralTerm, TermList, TimeKernel};
use crate::error::{Error, Result};
use crate::multiplier::{cosh_sqrt_flagged, sinhc_sqrt_flagged, Flagged, OVERFLOW_EXPONENT};
use crate::quadrature::{GaussLegendre, QuadConfig};
use crate::symbol_poly::{binomial, CharacteristicSpec, Kind};

type C = Complex64;

/// Measure of the inner integral in the repeated-root forcing kernel:
/// `dτ′` or `τ′ dτ′`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelMeasure {
    PlainMeasure,
    TauPrimeMeasure,
}

impl KernelMeasure {
    pub fn name(self) -> &'static str {
        match self {
            KernelMeasure::PlainMeasure => "PlainMeasure",
            KernelMeasure::TauPrimeMeasure => "TauPrimeMeasure",
        }
    }
}

impl std::str::FromStr for KernelMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "PlainMeasure" | "plain" => Ok(KernelMeasure::PlainMeasure),
            "TauPrimeMeasure" | "tau-prime" => Ok(KernelMeasure::TauPrimeMeasure),
            other => Err(Error::Config(format!("unknown kernel measure `{other}`"))),
        }
    }
}

/// The scalar kernel `K(τ)` whose weighted integral forms `G_m`.
#[derive(Debug, Clone)]
pub enum ModeKernel {
    /// `Σ_j w_j e^{τ r_j}`
    Exponential { weights: Vec<C>, rates: Vec<C> },
    /// `Σ_j w_j sinh(τ √s_j)/√s_j = Σ_j w_j τ·sinhc(τ² s_j)`
    Sinh { weights: Vec<C>, squares: Vec<C> },
}

impl ModeKernel {
    pub fn for_spec(spec: &CharacteristicSpec, p: C) -> Self {
        match spec.kind {
            Kind::FirstOrderProduct => ModeKernel::Exponential {
                weights: spec.pf.clone(),
                rates: spec.roots.iter().map(|a| a * p).collect(),
            },
            Kind::EvenOrderProduct => ModeKernel::Sinh {
                weights: spec.pf.clone(),
                squares: spec.roots.iter().map(|a| a * a * p).collect(),
            },
            Kind::RepeatedRoot => ModeKernel::Sinh {
                weights: vec![C::new(1.0, 0.0)],
                squares: vec![p],
            },
        }
    }
}

impl TimeKernel for ModeKernel {
    fn eval(&self, deriv: u32, tau: f64) -> Flagged {
        let mut overflow = false;
        let mut value = C::new(0.0, 0.0);
        match self {
            ModeKernel::Exponential { weights, rates } => {
                for (w, r) in weights.iter().zip(rates) {
                    let mut e = r * tau;
                    if e.re > OVERFLOW_EXPONENT {
                        e.re = OVERFLOW_EXPONENT;
                        overflow = true;
                    }
                    value += w * r.powu(deriv) * e.exp();
                }
            }
            ModeKernel::Sinh { weights, squares } => {
                // K^{(2e)} = s^e τ sinhc(τ² s), K^{(2e+1)} = s^e cosh(τ √s)
                let e = deriv / 2;
                for (w, s) in weights.iter().zip(squares) {
                    let z = s * (tau * tau);
                    let r = if deriv.is_multiple_of(2) {
                        let f = sinhc_sqrt_flagged(z);
                        Flagged {
                            value: f.value * tau,
                            overflow: f.overflow,
                        }
                    } else {
                        cosh_sqrt_flagged(z)
                    };
                    overflow |= r.overflow;
                    value += w * s.powu(e) * r.value;
                }
            }
        }
        Flagged { value, overflow }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `n!!` with `0!! = (−1)!! = 1`.
pub fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// Normalization `(2m−2)!! (2m−4)!!` of the repeated-root kernels.
pub fn repeated_norm(m: usize) -> f64 {
    let m = m as i64;
    double_factorial(2 * m - 2) * double_factorial(2 * m - 4)
}

fn require_closed_form(spec: &CharacteristicSpec) -> Result<()> {
    if spec.m < 2 {
        return Err(Error::OrderTooLow(spec.m));
    }
    Ok(())
}

fn check_kind(spec: &CharacteristicSpec, kind: Kind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::InvalidProblem(format!(
            "expected a {} spec, got {}",
            kind.name(),
            spec.kind.name()
        )));
    }
    Ok(())
}

/// `G_m(p, t) = ∫₀^t (t−τ)^{m−2}/(m−2)! Σ_j c_j e^{τ a_j p} dτ`.
pub fn gm_first(spec: &CharacteristicSpec, p: C, t: f64, quad: QuadConfig) -> Result<Flagged> {
    check_kind(spec, Kind::FirstOrderProduct)?;
    require_closed_form(spec)?;
    let rule = GaussLegendre::new(quad.nodes);
    Ok(green_direct(spec, p, t, &rule))
}

/// Even-order `G_m(p, t) = ∫₀^t (t−τ)^{2m−3}/(2m−3)! Σ_j d_j sinh(τ a_j √p)/(a_j √p) dτ`.
pub fn gm_even(spec: &CharacteristicSpec, p: C, t: f64, quad: QuadConfig) -> Result<Flagged> {
    check_kind(spec, Kind::EvenOrderProduct)?;
    require_closed_form(spec)?;
    let rule = GaussLegendre::new(quad.nodes);
    Ok(green_direct(spec, p, t, &rule))
}

/// Repeated-root `G_m(p, t) = ∫₀^t (t²−τ²)^{m−2} τ / ((2m−2)!!(2m−4)!!) · sinh(τ√p)/√p dτ`.
pub fn gm_repeated(spec: &CharacteristicSpec, p: C, t: f64, quad: QuadConfig) -> Result<Flagged> {
    check_kind(spec, Kind::RepeatedRoot)?;
    require_closed_form(spec)?;
    let rule = GaussLegendre::new(quad.nodes);
    Ok(green_direct(spec, p, t, &rule))
}

/// Weight `w(t, τ)` multiplying `K(τ)` inside `G_m(t) = ∫₀^t w(t, τ) K(τ) dτ`.
fn green_weight(spec: &CharacteristicSpec, t: f64, tau: f64) -> f64 {
    let m = spec.m as i32;
    match spec.kind {
        Kind::FirstOrderProduct => (t - tau).powi(m - 2) / factorial(spec.m - 2),
        Kind::EvenOrderProduct => (t - tau).powi(2 * m - 3) / factorial(2 * spec.m - 3),
        Kind::RepeatedRoot => (t * t - tau * tau).powi(m - 2) * tau / repeated_norm(spec.m),
    }
}

fn green_direct(spec: &CharacteristicSpec, p: C, t: f64, rule: &GaussLegendre) -> Flagged {
    if t <= 0.0 {
        return C::new(0.0, 0.0).into();
    }
    let kernel = ModeKernel::for_spec(spec, p);
    let mut overflow = false;
    let value = rule
        .mapped(0.0, t)
        .map(|(tau, w)| {
            let k = kernel.eval(0, tau);
            overflow |= k.overflow;
            k.value * (w * green_weight(spec, t, tau))
        })
        .sum();
    Flagged { value, overflow }
}

/// `G_m` written as a [`TermList`] by binomial expansion of its weight.
pub fn green_terms(spec: &CharacteristicSpec) -> TermList {
    let mut terms = TermList::default();
    let m = spec.m;
    let mut push = |coeff: f64, t_pow: usize, tau_pow: usize| {
        terms.push_integral(IntegralTerm {
            coeff: C::new(coeff, 0.0),
            t_pow: t_pow as u32,
            tau_pow: tau_pow as u32,
            kernel: 0,
        })
    };
    match spec.kind {
        Kind::FirstOrderProduct | Kind::EvenOrderProduct => {
            let q = if spec.kind == Kind::FirstOrderProduct {
                m - 2
            } else {
                2 * m - 3
            };
            let norm = factorial(q);
            for alpha in 0..=q {
                let sign = if (q - alpha) % 2 == 0 { 1.0 } else { -1.0 };
                push(sign * binomial(q, alpha) / norm, alpha, q - alpha);
            }
        }
        Kind::RepeatedRoot => {
            let q = m - 2;
            let norm = repeated_norm(m);
            for alpha in 0..=q {
                let sign = if (q - alpha).is_multiple_of(2) { 1.0 } else { -1.0 };
                push(sign * binomial(q, alpha) / norm, 2 * alpha, 2 * (q - alpha) + 1);
            }
        }
    }
    terms
}

/// Precomputed `∂^d G_m / ∂t^d` term lists for `d = 0..q−1`.
#[derive(Debug, Clone)]
pub struct HomogeneousPlan {
    pub derivatives: Vec<TermList>,
}

impl HomogeneousPlan {
    pub fn new(spec: &CharacteristicSpec) -> Self {
        let base = green_terms(spec);
        let derivatives = (0..spec.time_order())
            .map(|d| derivative_reduce(&base, d))
            .collect();
        HomogeneousPlan { derivatives }
    }

    pub fn evaluate(
        &self,
        spec: &CharacteristicSpec,
        p: C,
        phi_hat: &[C],
        t: f64,
        rule: &GaussLegendre,
    ) -> Flagged {
        let q = spec.time_order();
        let e = spec.mode_coefficients(p);
        let kernel = ModeKernel::for_spec(spec, p);
        let mut value = C::new(0.0, 0.0);
        let mut overflow = false;
        for (d, terms) in self.derivatives.iter().enumerate() {
            // Σ_{i=d+1}^{q} e_i φ_{i−1−d}
            let h: C = (0..q - d).map(|r| e[r + 1 + d] * phi_hat[r]).sum();
            if h == C::new(0.0, 0.0) {
                continue;
            }
            let g = terms.evaluate(t, &[&kernel], rule);
            overflow |= g.overflow;
            value += h * g.value;
        }
        Flagged { value, overflow }
    }
}

fn check_phi(spec: &CharacteristicSpec, phi_hat: &[C]) -> Result<()> {
    if phi_hat.len() != spec.initial_count() {
        return Err(Error::InvalidProblem(format!(
            "{} initial values given, {} required",
            phi_hat.len(),
            spec.initial_count()
        )));
    }
    Ok(())
}

/// Homogeneous part `Σ_i e_i Σ_r ∂_t^{i−1−r} G_m · φ̂_r` for one mode.
pub fn homogeneous_mode(
    spec: &CharacteristicSpec,
    p: C,
    phi_hat: &[C],
    t: f64,
    quad: QuadConfig,
) -> Result<Flagged> {
    require_closed_form(spec)?;
    check_phi(spec, phi_hat)?;
    let rule = GaussLegendre::new(quad.nodes);
    Ok(HomogeneousPlan::new(spec).evaluate(spec, p, phi_hat, t, &rule))
}

/// Forcing part for one mode given forcing samples at the mapped outer nodes.
pub(crate) fn inhomogeneous_from_samples(
    spec: &CharacteristicSpec,
    p: C,
    samples: &[C],
    t: f64,
    rule: &GaussLegendre,
    measure: Option<KernelMeasure>,
) -> Result<Flagged> {
    let tau_prime_weight = match spec.kind {
        Kind::RepeatedRoot => match measure.ok_or(Error::UnresolvedKernel)? {
            KernelMeasure::PlainMeasure => false,
            KernelMeasure::TauPrimeMeasure => true,
        },
        _ => false,
    };
    if t <= 0.0 {
        return Ok(C::new(0.0, 0.0).into());
    }
    let kernel = ModeKernel::for_spec(spec, p);
    let m = spec.m as i32;
    let norm = match spec.kind {
        Kind::FirstOrderProduct => factorial(spec.m - 2),
        Kind::EvenOrderProduct => factorial(2 * spec.m - 3),
        Kind::RepeatedRoot => repeated_norm(spec.m),
    };
    let mut overflow = false;
    let mut total = C::new(0.0, 0.0);
    for ((tau, w), f) in rule.mapped(0.0, t).zip(samples) {
        if *f == C::new(0.0, 0.0) {
            continue;
        }
        let span = t - tau;
        let mut inner = C::new(0.0, 0.0);
        for (tp, wp) in rule.mapped(0.0, span) {
            let weight = match spec.kind {
                Kind::FirstOrderProduct => (span - tp).powi(m - 2),
                Kind::EvenOrderProduct => (span - tp).powi(2 * m - 3),
                Kind::RepeatedRoot => {
                    let base = (span * span - tp * tp).powi(m - 2);
                    if tau_prime_weight {
                        base * tp
                    } else {
                        base
                    }
                }
            };
            let k = kernel.eval(0, tp);
            overflow |= k.overflow;
            inner += k.value * (wp * weight);
        }
        total += inner * f * w;
    }
    Ok(Flagged {
        value: total / (norm * spec.lead),
        overflow,
    })
}

/// Forcing part `∫₀^t ∫₀^{t−τ} kernel(t, τ, τ′) K(τ′) f̂(τ) dτ′ dτ` for one mode.
///
/// For [`Kind::RepeatedRoot`] the inner measure must be supplied; see
/// [`crate::oracle::kernel_discrepancy_probe`].
pub fn inhomogeneous_mode(
    spec: &CharacteristicSpec,
    p: C,
    f_hat: impl Fn(f64) -> C,
    t: f64,
    quad: QuadConfig,
    measure: Option<KernelMeasure>,
) -> Result<Flagged> {
    require_closed_form(spec)?;
    let rule = GaussLegendre::new(quad.nodes);
    let samples: Vec<C> = if t > 0.0 {
        rule.mapped(0.0, t).map(|(tau, _)| f_hat(tau)).collect()
    } else {
        Vec::new()
    };
    inhomogeneous_from_samples(spec, p, &samples, t, &rule, measure)
}

/// Plain Duhamel solution for a single first-order factor:
/// `e^{t a p} φ̂₀ + ∫₀^t e^{(t−τ) a p} f̂(τ) dτ`.
pub(crate) fn single_factor_from_samples(
    spec: &CharacteristicSpec,
    p: C,
    phi0: C,
    samples: Option<&[C]>,
    t: f64,
    rule: &GaussLegendre,
) -> Flagged {
    let rate = spec.roots[0] * p;
    let kernel = ModeKernel::Exponential {
        weights: vec![C::new(1.0, 0.0)],
        rates: vec![rate],
    };
    let h = kernel.eval(0, t);
    let mut overflow = h.overflow;
    let mut value = h.value * phi0;
    if let Some(samples) = samples {
        if t > 0.0 {
            for ((tau, w), f) in rule.mapped(0.0, t).zip(samples) {
                let k = kernel.eval(0, t - tau);
                overflow |= k.overflow;
                value += k.value * f * w / spec.lead;
            }
        }
    }
    Flagged { value, overflow }
}

/// Full per-mode solution: homogeneous plus forcing part, with the `m = 1`
/// first-order case handled by plain Duhamel.
pub fn solve_mode(
    spec: &CharacteristicSpec,
    p: C,
    phi_hat: &[C],
    f_hat: Option<&dyn Fn(f64) -> C>,
    t: f64,
    quad: QuadConfig,
    measure: Option<KernelMeasure>,
) -> Result<Flagged> {
    check_phi(spec, phi_hat)?;
    let rule = GaussLegendre::new(quad.nodes);
    let samples: Option<Vec<C>> = f_hat.map(|f| {
        if t > 0.0 {
            rule.mapped(0.0, t).map(|(tau, _)| f(tau)).collect()
        } else {
            Vec::new()
        }
    });
    if spec.m == 1 {
        return Ok(single_factor_from_samples(
            spec,
            p,
            phi_hat[0],
            samples.as_deref(),
            t,
            &rule,
        ));
    }
    let plan = HomogeneousPlan::new(spec);
    let hom = plan.evaluate(spec, p, phi_hat, t, &rule);
    match samples {
        Some(samples) => {
            let inh = inhomogeneous_from_samples(spec, p, &samples, t, &rule, measure)?;
            Ok(Flagged {
                value: hom.value + inh.value,
                overflow: hom.overflow || inh.overflow,
            })
        }
        None => Ok(hom),
    }
}
