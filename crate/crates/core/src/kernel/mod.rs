//! Assembly of the closed-form solutions over a periodic grid.
//!
//! Each abstract operator is a function of `P(∂x)` alone, so on a periodic
//! grid it acts mode by mode through the symbol `p(k)`. [`solve`] transforms
//! the data, evaluates [`mode::solve_mode`]-style formulas per wavevector and
//! transforms back.

pub mod mode;
pub mod terms;

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Field, Grid, SpectralField};
use crate::quadrature::{GaussLegendre, QuadConfig};
use crate::symbol_poly::{CharacteristicSpec, Kind, SymbolPolynomial};
use mode::{inhomogeneous_from_samples, single_factor_from_samples, HomogeneousPlan};

pub use mode::{
    gm_even, gm_first, gm_repeated, homogeneous_mode, inhomogeneous_mode, solve_mode,
    KernelMeasure, ModeKernel,
};
pub use terms::{derivative_reduce, BoundaryTerm, IntegralTerm, TermList, TimeKernel};

type C = Complex64;

/// Space-time forcing `f(x, t)`.
pub type Forcing = Arc<dyn Fn(&[f64], f64) -> C + Send + Sync>;

/// A Cauchy problem `P(∂x, ∂t) u = f` with `∂t^r u(0) = φ_r` on a periodic box.
#[derive(Clone)]
pub struct CauchyProblem {
    pub spec: CharacteristicSpec,
    pub operator: SymbolPolynomial,
    pub grid: Grid,
    pub phi: Vec<Field>,
    pub forcing: Option<Forcing>,
    pub times: Vec<f64>,
}

impl std::fmt::Debug for CauchyProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CauchyProblem")
            .field("spec", &self.spec)
            .field("operator", &self.operator)
            .field("grid", &self.grid)
            .field("phi", &self.phi.len())
            .field("forcing", &self.forcing.is_some())
            .field("times", &self.times)
            .finish()
    }
}

impl CauchyProblem {
    pub fn validate(&self) -> Result<()> {
        if self.operator.dim != self.grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.dim(),
                got: self.operator.dim,
            });
        }
        let need = self.spec.initial_count();
        if self.phi.len() != need {
            return Err(Error::InvalidProblem(format!(
                "{} requires {need} initial fields phi0..phi{}, got {}",
                self.spec.kind.name(),
                need - 1,
                self.phi.len()
            )));
        }
        if let Some(bad) = self.phi.iter().position(|f| f.grid != self.grid) {
            return Err(Error::InvalidProblem(format!(
                "phi{bad} is sampled on a different grid"
            )));
        }
        if self.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidProblem("output times must be finite and >= 0".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidProblem("output times must be increasing".into()));
        }
        Ok(())
    }

    /// Forcing sampled at time `t` and transformed, if there is any.
    pub fn forcing_spectrum(&self, t: f64) -> Option<SpectralField> {
        self.forcing.as_ref().map(|f| {
            Field::from_fn(&self.grid, |x| f(x, t)).forward()
        })
    }
}

/// Options for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[derive(Default)]
pub struct SolveOptions {
    pub quad: QuadConfig,
    /// Inner measure of the repeated-root forcing kernel; required when a
    /// repeated-root problem has forcing.
    pub repeated_measure: Option<KernelMeasure>,
}


/// Growth and overflow diagnostics gathered during a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// `max_k Re(a_j p(k))` per root.
    pub max_growth: Vec<f64>,
    /// Wavevectors whose evaluation saturated.
    pub overflowed: Vec<Vec<i64>>,
    /// `max_j |c_j|`.
    pub condition: f64,
}

impl StabilityReport {
    pub fn has_overflow(&self) -> bool {
        !self.overflowed.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (j, g) in self.max_growth.iter().enumerate() {
            let _ = writeln!(s, "max_growth root{j} = {g:.6e}");
        }
        let _ = writeln!(s, "condition = {:.6e}", self.condition);
        let _ = writeln!(s, "overflowed_modes = {}", self.overflowed.len());
        for k in &self.overflowed {
            let _ = writeln!(s, "overflow k = {k:?}");
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub snapshots: Vec<(f64, Field)>,
    pub report: StabilityReport,
}

/// Evaluates the closed-form solution at every requested time.
pub fn solve(problem: &CauchyProblem, opts: SolveOptions) -> Result<Solution> {
    problem.validate()?;
    let spec = &problem.spec;
    let grid = &problem.grid;
    if spec.kind == Kind::RepeatedRoot && problem.forcing.is_some() && opts.repeated_measure.is_none() {
        return Err(Error::UnresolvedKernel);
    }
    let rule = GaussLegendre::new(opts.quad.nodes);
    let phi_hat: Vec<SpectralField> = problem.phi.iter().map(Field::forward).collect();
    let symbols: Vec<C> = (0..grid.len())
        .map(|i| problem.operator.symbol_eval(&grid.wavevector(i), &grid.lengths))
        .collect();
    let plan = (spec.m >= 2).then(|| HomogeneousPlan::new(spec));
    let mut overflow_mask = vec![false; grid.len()];
    let mut snapshots = Vec::with_capacity(problem.times.len());

    for &t in &problem.times {
        // Forcing spectra at the outer quadrature nodes of [0, t].
        let forcing: Option<Vec<SpectralField>> = problem.forcing.as_ref().map(|f| {
            if t > 0.0 {
                rule.mapped(0.0, t)
                    .map(|(tau, _)| Field::from_fn(grid, |x| f(x, tau)).forward())
                    .collect()
            } else {
                Vec::new()
            }
        });
        let results: Vec<Result<(C, bool)>> = (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let p = symbols[k];
                let phi: Vec<C> = phi_hat.iter().map(|s| s.data[k]).collect();
                let samples: Option<Vec<C>> =
                    forcing.as_ref().map(|fs| fs.iter().map(|s| s.data[k]).collect());
                let r = match &plan {
                    None => single_factor_from_samples(spec, p, phi[0], samples.as_deref(), t, &rule),
                    Some(plan) => {
                        let hom = plan.evaluate(spec, p, &phi, t, &rule);
                        match &samples {
                            Some(s) => {
                                let inh = inhomogeneous_from_samples(
                                    spec,
                                    p,
                                    s,
                                    t,
                                    &rule,
                                    opts.repeated_measure,
                                )?;
                                crate::multiplier::Flagged {
                                    value: hom.value + inh.value,
                                    overflow: hom.overflow || inh.overflow,
                                }
                            }
                            None => hom,
                        }
                    }
                };
                Ok((r.value, r.overflow))
            })
            .collect();
        let mut out = SpectralField::zeros(grid);
        for (k, r) in results.into_iter().enumerate() {
            let (v, o) = r?;
            out.data[k] = v;
            overflow_mask[k] |= o;
        }
        snapshots.push((t, out.inverse()));
    }

    let max_growth = spec
        .growth_roots()
        .iter()
        .map(|a| symbols.iter().map(|p| (a * p).re).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let overflowed = overflow_mask
        .iter()
        .enumerate()
        .filter(|(_, &o)| o)
        .map(|(k, _)| grid.wavevector(k))
        .collect();
    Ok(Solution {
        snapshots,
        report: StabilityReport {
            max_growth,
            overflowed,
            condition: spec.condition_estimate(),
        },
    })
}
