//! Symbolic calculus for time kernels of the form
//! `Σ c · t^α ∫₀^t τ^β K(τ) dτ + Σ c · t^γ K^{(d)}(t)`.
//!
//! Time derivatives are applied exactly on this representation, so the
//! homogeneous solution never needs numerical differentiation.

use num_complex::Complex64;

use crate::multiplier::Flagged;
use crate::quadrature::GaussLegendre;

type C = Complex64;

/// `coeff · t^t_pow · ∫₀^t τ^tau_pow K_kernel(τ) dτ`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralTerm {
    pub coeff: C,
    pub t_pow: u32,
    pub tau_pow: u32,
    pub kernel: usize,
}

/// `coeff · t^t_pow · K_kernel^{(deriv)}(t)`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTerm {
    pub coeff: C,
    pub t_pow: u32,
    pub kernel: usize,
    pub deriv: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TermList {
    pub integrals: Vec<IntegralTerm>,
    pub boundary: Vec<BoundaryTerm>,
}

/// A scalar time kernel and its derivatives, `K^{(d)}(τ)`.
pub trait TimeKernel {
    fn eval(&self, deriv: u32, tau: f64) -> Flagged;
}

impl TermList {
    pub fn integral(coeff: C, t_pow: u32, tau_pow: u32, kernel: usize) -> Self {
        TermList {
            integrals: vec![IntegralTerm {
                coeff,
                t_pow,
                tau_pow,
                kernel,
            }],
            boundary: Vec::new(),
        }
    }

    pub fn push_integral(&mut self, term: IntegralTerm) {
        if let Some(existing) = self.integrals.iter_mut().find(|e| {
            e.t_pow == term.t_pow && e.tau_pow == term.tau_pow && e.kernel == term.kernel
        }) {
            existing.coeff += term.coeff;
        } else {
            self.integrals.push(term);
        }
    }

    pub fn push_boundary(&mut self, term: BoundaryTerm) {
        if let Some(existing) = self.boundary.iter_mut().find(|e| {
            e.t_pow == term.t_pow && e.kernel == term.kernel && e.deriv == term.deriv
        }) {
            existing.coeff += term.coeff;
        } else {
            self.boundary.push(term);
        }
    }

    /// Drops terms whose coefficients cancelled to exactly zero.
    fn prune(mut self) -> Self {
        let zero = C::new(0.0, 0.0);
        self.integrals.retain(|t| t.coeff != zero);
        self.boundary.retain(|t| t.coeff != zero);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.integrals.is_empty() && self.boundary.is_empty()
    }

    fn differentiate_once(&self) -> TermList {
        let mut out = TermList::default();
        for term in &self.integrals {
            if term.t_pow > 0 {
                out.push_integral(IntegralTerm {
                    coeff: term.coeff * term.t_pow as f64,
                    t_pow: term.t_pow - 1,
                    ..*term
                });
            }
            out.push_boundary(BoundaryTerm {
                coeff: term.coeff,
                t_pow: term.t_pow + term.tau_pow,
                kernel: term.kernel,
                deriv: 0,
            });
        }
        for term in &self.boundary {
            if term.t_pow > 0 {
                out.push_boundary(BoundaryTerm {
                    coeff: term.coeff * term.t_pow as f64,
                    t_pow: term.t_pow - 1,
                    ..*term
                });
            }
            out.push_boundary(BoundaryTerm {
                deriv: term.deriv + 1,
                ..*term
            });
        }
        out.prune()
    }

    /// Evaluates the list at time `t`, integrating with `quad` mapped to `[0, t]`.
    pub fn evaluate(&self, t: f64, kernels: &[&dyn TimeKernel], quad: &GaussLegendre) -> Flagged {
        let mut overflow = false;
        let mut total = C::new(0.0, 0.0);
        if !self.integrals.is_empty() && t > 0.0 {
            let nodes: Vec<(f64, f64)> = quad.mapped(0.0, t).collect();
            let mut samples: Vec<Option<Vec<C>>> = vec![None; kernels.len()];
            for term in &self.integrals {
                let values = samples[term.kernel].get_or_insert_with(|| {
                    nodes
                        .iter()
                        .map(|&(tau, _)| {
                            let r = kernels[term.kernel].eval(0, tau);
                            overflow |= r.overflow;
                            r.value
                        })
                        .collect()
                });
                let integral: C = nodes
                    .iter()
                    .zip(values.iter())
                    .map(|(&(tau, w), v)| v * (w * tau.powi(term.tau_pow as i32)))
                    .sum();
                total += term.coeff * t.powi(term.t_pow as i32) * integral;
            }
        }
        for term in &self.boundary {
            let r = kernels[term.kernel].eval(term.deriv, t);
            overflow |= r.overflow;
            total += term.coeff * t.powi(term.t_pow as i32) * r.value;
        }
        Flagged {
            value: total,
            overflow,
        }
    }
}

/// Applies `d/dt` `order` times:
/// `d/dt[t^α ∫₀^t τ^β K] = α t^{α−1} ∫₀^t τ^β K + t^{α+β} K(t)` and the product
/// rule on boundary terms. Like terms are merged, so exact cancellations vanish.
pub fn derivative_reduce(terms: &TermList, order: usize) -> TermList {
    let mut out = terms.clone();
    for _ in 0..order {
        out = out.differentiate_once();
    }
    out
}
