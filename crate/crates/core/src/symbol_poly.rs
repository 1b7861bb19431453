//! Characteristic polynomials, their roots and partial-fraction weights, and
//! the Fourier symbol of a constant-coefficient spatial operator.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

type C = Complex64;

/// Iteration cap for the QR algorithm on companion matrices.
pub const SCHUR_MAX_ITER: usize = 500;

/// Relative separation below which roots count as coincident.
pub const ROOT_GAP_TOL: f64 = 1e-8;

/// Which family of time operators the problem belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    /// `∏ (∂t − a_j P)`, or equivalently `Σ b_k P^{m−k} ∂t^k`.
    FirstOrderProduct,
    /// `∏ (∂t² − a_j² P)`, or equivalently `Σ b_{2k} P^{m−k} ∂t^{2k}`.
    EvenOrderProduct,
    /// `(∂t² − P)^m`.
    RepeatedRoot,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::FirstOrderProduct => "first-order-product",
            Kind::EvenOrderProduct => "even-order-product",
            Kind::RepeatedRoot => "repeated-root",
        }
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "first-order-product" | "firstorderproduct" | "first" => Ok(Kind::FirstOrderProduct),
            "even-order-product" | "evenorderproduct" | "even" => Ok(Kind::EvenOrderProduct),
            "repeated-root" | "repeatedroot" | "repeated" => Ok(Kind::RepeatedRoot),
            other => Err(Error::Config(format!("unknown equation kind `{other}`"))),
        }
    }
}

/// Characteristic data of the time operator.
///
/// `b` is stored normalized to a monic polynomial; `lead` keeps the original
/// leading coefficient so that forcing can be rescaled accordingly. For
/// [`Kind::EvenOrderProduct`] the entries of `b` are the coefficients of
/// `∏ (y − a_j²)` in `y = x²`, i.e. `b[k]` is `b_{2k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicSpec {
    pub kind: Kind,
    pub m: usize,
    pub b: Vec<C>,
    pub lead: C,
    pub roots: Vec<C>,
    pub pf: Vec<C>,
}

impl CharacteristicSpec {
    /// Builds a product-kind spec from its roots `a_1..a_m` (monic, `lead = 1`).
    pub fn from_roots(kind: Kind, roots: &[C]) -> Result<Self> {
        let m = roots.len();
        match kind {
            Kind::FirstOrderProduct => {
                if m == 0 {
                    return Err(Error::OrderTooLow(0));
                }
                let pf = if m == 1 {
                    vec![C::new(1.0, 0.0)]
                } else {
                    partial_fraction_first(roots)?
                };
                Ok(CharacteristicSpec {
                    kind,
                    m,
                    b: poly_from_roots(roots),
                    lead: C::new(1.0, 0.0),
                    roots: roots.to_vec(),
                    pf,
                })
            }
            Kind::EvenOrderProduct => {
                if m < 2 {
                    return Err(Error::OrderTooLow(m));
                }
                let pf = partial_fraction_even(roots)?;
                let squares: Vec<C> = roots.iter().map(|a| a * a).collect();
                Ok(CharacteristicSpec {
                    kind,
                    m,
                    b: poly_from_roots(&squares),
                    lead: C::new(1.0, 0.0),
                    roots: roots.to_vec(),
                    pf,
                })
            }
            Kind::RepeatedRoot => Err(Error::InvalidProblem(
                "repeated-root specs carry no root list; use CharacteristicSpec::repeated".into(),
            )),
        }
    }

    /// Builds a product-kind spec from characteristic coefficients.
    ///
    /// For the even kind, `b` lists `b_0, b_2, .., b_{2m}` (the odd coefficients are zero).
    pub fn from_coeffs(kind: Kind, b: &[C]) -> Result<Self> {
        let lead = *b.last().ok_or(Error::NonmonicZero)?;
        if lead == C::new(0.0, 0.0) {
            return Err(Error::NonmonicZero);
        }
        let monic: Vec<C> = b.iter().map(|c| c / lead).collect();
        let mut spec = match kind {
            Kind::FirstOrderProduct => {
                let roots = if monic.len() == 2 {
                    vec![-monic[0]]
                } else {
                    roots_from_coeffs(&monic, ROOT_GAP_TOL)?
                };
                Self::from_roots(kind, &roots)?
            }
            Kind::EvenOrderProduct => {
                let squares = if monic.len() == 2 {
                    vec![-monic[0]]
                } else {
                    roots_from_coeffs(&monic, ROOT_GAP_TOL)?
                };
                let roots: Vec<C> = squares.iter().map(|y| y.sqrt()).collect();
                Self::from_roots(kind, &roots)?
            }
            Kind::RepeatedRoot => return Self::repeated(b.len().saturating_sub(1)),
        };
        spec.b = monic;
        spec.lead = lead;
        Ok(spec)
    }

    /// `(∂t² − P)^m`.
    pub fn repeated(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::OrderTooLow(m));
        }
        Ok(CharacteristicSpec {
            kind: Kind::RepeatedRoot,
            m,
            b: Vec::new(),
            lead: C::new(1.0, 0.0),
            roots: Vec::new(),
            pf: Vec::new(),
        })
    }

    /// Order of the mode ODE in time: `m` or `2m`.
    pub fn time_order(&self) -> usize {
        match self.kind {
            Kind::FirstOrderProduct => self.m,
            Kind::EvenOrderProduct | Kind::RepeatedRoot => 2 * self.m,
        }
    }

    /// Number of initial-data fields the Cauchy problem needs.
    pub fn initial_count(&self) -> usize {
        self.time_order()
    }

    /// Monic coefficients `e_0..e_q` of the mode polynomial in `s` for symbol value `p`.
    ///
    /// The time operator applied to `e^{st}` at symbol `p` equals
    /// `lead · Σ_i e_i s^i`.
    pub fn mode_coefficients(&self, p: C) -> Vec<C> {
        let q = self.time_order();
        let mut e = vec![C::new(0.0, 0.0); q + 1];
        match self.kind {
            Kind::FirstOrderProduct => {
                for k in 0..=self.m {
                    e[k] = self.b[k] * p.powu((self.m - k) as u32);
                }
            }
            Kind::EvenOrderProduct => {
                for k in 0..=self.m {
                    e[2 * k] = self.b[k] * p.powu((self.m - k) as u32);
                }
            }
            Kind::RepeatedRoot => {
                for k in 0..=self.m {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    e[2 * (self.m - k)] = sign * binomial(self.m, k) * p.powu(k as u32);
                }
            }
        }
        e
    }

    /// Largest partial-fraction weight in modulus (a cheap conditioning estimate).
    pub fn condition_estimate(&self) -> f64 {
        self.pf.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Roots used for growth diagnostics; the repeated kind reports a single unit root.
    pub fn growth_roots(&self) -> Vec<C> {
        match self.kind {
            Kind::RepeatedRoot => vec![C::new(1.0, 0.0)],
            _ => self.roots.clone(),
        }
    }
}

/// Monic coefficients (ascending) of `∏ (x − r_j)`.
pub fn poly_from_roots(roots: &[C]) -> Vec<C> {
    let mut c = vec![C::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![C::new(0.0, 0.0); c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= ci * r;
        }
        c = next;
    }
    c
}

/// Horner evaluation of an ascending coefficient list.
pub fn poly_eval(coeffs: &[C], x: C) -> C {
    coeffs.iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * x + c)
}

fn poly_derivative_eval(coeffs: &[C], x: C) -> C {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(C::new(0.0, 0.0), |acc, (k, c)| acc * x + c * k as f64)
}

/// Smallest pairwise distance and largest modulus of a point set.
pub fn root_separation(roots: &[C]) -> (f64, f64) {
    let mut gap = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            gap = gap.min((roots[i] - roots[j]).norm());
        }
    }
    let max = roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
    (gap, max)
}

fn check_distinct(values: &[C], tol: f64) -> Result<()> {
    let (gap, max) = root_separation(values);
    let threshold = tol * (1.0 + max);
    if gap < threshold {
        return Err(Error::DegenerateRoots { gap, threshold });
    }
    Ok(())
}

/// Roots of `b_0 + b_1 x + … + b_m x^m` from the companion-matrix eigenvalues,
/// each refined by one Newton step.
pub fn roots_from_coeffs(b: &[C], tol: f64) -> Result<Vec<C>> {
    let lead = *b.last().ok_or(Error::NonmonicZero)?;
    if lead.norm() == 0.0 {
        return Err(Error::NonmonicZero);
    }
    let m = b.len() - 1;
    if m < 1 {
        return Err(Error::OrderTooLow(m));
    }
    let monic: Vec<C> = b.iter().map(|c| c / lead).collect();
    let mut companion = DMatrix::<C>::zeros(m, m);
    for i in 1..m {
        companion[(i, i - 1)] = C::new(1.0, 0.0);
    }
    for i in 0..m {
        companion[(i, m - 1)] = -monic[i];
    }
    let eig = Schur::try_new(companion, f64::EPSILON, SCHUR_MAX_ITER)
        .and_then(|s| s.eigenvalues())
        .ok_or_else(|| Error::InvalidProblem("companion Schur form did not converge".into()))?;
    let mut roots: Vec<C> = eig.iter().copied().collect();
    for r in roots.iter_mut() {
        let d = poly_derivative_eval(&monic, *r);
        if d.norm() > 0.0 {
            let step = poly_eval(&monic, *r) / d;
            if step.is_finite() {
                *r -= step;
            }
        }
    }
    check_distinct(&roots, tol)?;
    Ok(roots)
}

/// `c_j = a_j^{m−1} / ∏_{i≠j} (a_j − a_i)`.
pub fn partial_fraction_first(roots: &[C]) -> Result<Vec<C>> {
    let m = roots.len();
    if m < 2 {
        return Err(Error::OrderTooLow(m));
    }
    check_distinct(roots, ROOT_GAP_TOL)?;
    Ok(lagrange_weights(roots, m - 1))
}

/// `d_j = a_j^{2m−2} / ∏_{i≠j} (a_j² − a_i²)`.
pub fn partial_fraction_even(roots: &[C]) -> Result<Vec<C>> {
    let m = roots.len();
    if m < 2 {
        return Err(Error::OrderTooLow(m));
    }
    if let Some(index) = roots.iter().position(|a| a.norm() == 0.0) {
        return Err(Error::ZeroRoot { index });
    }
    let squares: Vec<C> = roots.iter().map(|a| a * a).collect();
    check_distinct(&squares, ROOT_GAP_TOL)?;
    Ok(lagrange_weights(&squares, m - 1))
}

/// `x_j^q / ∏_{i≠j} (x_j − x_i)`.
pub fn lagrange_weights(xs: &[C], q: usize) -> Vec<C> {
    xs.iter()
        .enumerate()
        .map(|(j, xj)| {
            let denom = xs
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .fold(C::new(1.0, 0.0), |acc, (_, xi)| acc * (xj - xi));
            xj.powu(q as u32) / denom
        })
        .collect()
}

/// Chebyshev-spaced sample points on the circle of the Cauchy root bound.
pub fn chebyshev_circle_points(b: &[C], count: usize) -> Vec<C> {
    let lead = b.last().copied().unwrap_or(C::new(1.0, 0.0));
    let bound = 1.0
        + b[..b.len().saturating_sub(1)]
            .iter()
            .map(|c| (c / lead).norm())
            .fold(0.0, f64::max);
    (0..count)
        .map(|j| {
            let theta = PI * (2 * j + 1) as f64 / (2 * count) as f64;
            C::from_polar(bound, 2.0 * theta)
        })
        .collect()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// A constant-coefficient spatial operator `P(∂x) = Σ c_α ∂^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPolynomial {
    pub dim: usize,
    pub terms: Vec<(Vec<u32>, C)>,
}

impl SymbolPolynomial {
    pub fn new(dim: usize, terms: Vec<(Vec<u32>, C)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidProblem("operator dimension must be >= 1".into()));
        }
        for (i, (alpha, _)) in terms.iter().enumerate() {
            if alpha.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: alpha.len(),
                });
            }
            if terms[..i].iter().any(|(other, _)| other == alpha) {
                return Err(Error::InvalidProblem(format!(
                    "duplicate multi-index {alpha:?} in operator"
                )));
            }
        }
        Ok(SymbolPolynomial { dim, terms })
    }

    /// The Laplacian `Σ_d ∂²/∂x_d²`.
    pub fn laplacian(dim: usize) -> Self {
        let terms = (0..dim)
            .map(|d| {
                let mut alpha = vec![0; dim];
                alpha[d] = 2;
                (alpha, C::new(1.0, 0.0))
            })
            .collect();
        SymbolPolynomial { dim, terms }
    }

    /// `p(k) = Σ_α c_α ∏_d (i 2π k_d / L_d)^{α_d}`.
    pub fn symbol_eval(&self, k: &[i64], lengths: &[f64]) -> C {
        debug_assert_eq!(k.len(), self.dim);
        let ik: Vec<C> = k
            .iter()
            .zip(lengths)
            .map(|(&kd, &l)| C::new(0.0, 2.0 * PI * kd as f64 / l))
            .collect();
        self.terms
            .iter()
            .map(|(alpha, c)| {
                alpha
                    .iter()
                    .zip(&ik)
                    .fold(*c, |acc, (&a, ikd)| acc * ikd.powu(a))
            })
            .sum()
    }
}
