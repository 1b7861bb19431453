//! Independent ground truth for the closed-form solutions.
//!
//! Every mode obeys a constant-coefficient scalar ODE in time. The oracle
//! solves it directly, either through the eigendecomposition of its companion
//! matrix or, when eigenvalues nearly collide, by Gragg–Bulirsch–Stoer
//! extrapolation. Nothing here calls into the multiplier or kernel code apart
//! from the probe, whose job is to compare against it.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Field, SpectralField};
use crate::kernel::mode::{inhomogeneous_mode, KernelMeasure};
use crate::kernel::CauchyProblem;
use crate::quadrature::{GaussLegendre, QuadConfig};
use crate::symbol_poly::{CharacteristicSpec, Kind, SCHUR_MAX_ITER};

type C = Complex64;

/// Relative eigenvalue gap below which the integrator replaces the eigen path.
pub const COLLISION_TOL: f64 = 1e-6;

/// Bound on `((1 + max|λ|)/gap)^{q−1} ε`, the rounding amplification of the
/// Vandermonde solve. A defective eigenvalue of multiplicity `k` splits by
/// about `ε^{1/k}` under rounding, which can pass the gap test alone.
pub const MAX_AMPLIFICATION: f64 = 1e-8;

/// Mode polynomial `Σ e_i s^i` (monic) built by multiplying out its factors.
fn mode_polynomial(spec: &CharacteristicSpec, p: C) -> Vec<C> {
    fn mul(a: &[C], b: &[C]) -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    let mut poly = vec![one];
    match spec.kind {
        Kind::FirstOrderProduct => {
            for a in &spec.roots {
                poly = mul(&poly, &[-a * p, one]);
            }
        }
        Kind::EvenOrderProduct => {
            for a in &spec.roots {
                poly = mul(&poly, &[-a * a * p, zero, one]);
            }
        }
        Kind::RepeatedRoot => {
            for _ in 0..spec.m {
                poly = mul(&poly, &[-p, zero, one]);
            }
        }
    }
    poly
}

/// Companion form `y' = A y + f(t)/lead · e_q` of a mode ODE.
#[derive(Debug, Clone)]
pub struct CompanionSystem {
    pub order: usize,
    pub coeffs: Vec<C>,
    pub matrix: DMatrix<C>,
    pub lead: C,
    eigenvalues: Option<Vec<C>>,
}

impl CompanionSystem {
    pub fn new(spec: &CharacteristicSpec, p: C) -> Self {
        let coeffs = mode_polynomial(spec, p);
        let q = coeffs.len() - 1;
        let mut matrix = DMatrix::<C>::zeros(q, q);
        for r in 0..q - 1 {
            matrix[(r, r + 1)] = C::new(1.0, 0.0);
        }
        for i in 0..q {
            matrix[(q - 1, i)] = -coeffs[i];
        }
        CompanionSystem {
            order: q,
            coeffs,
            matrix,
            lead: spec.lead,
            eigenvalues: None,
        }
    }

    pub fn eigenvalues(&mut self) -> &[C] {
        if self.eigenvalues.is_none() {
            // Unbounded QR iterations never return on some defective matrices.
            let eig = Schur::try_new(self.matrix.clone(), f64::EPSILON, SCHUR_MAX_ITER)
                .and_then(|s| s.eigenvalues())
                .map(|v| v.iter().copied().collect())
                .unwrap_or_default();
            self.eigenvalues = Some(eig);
        }
        self.eigenvalues.as_deref().unwrap_or(&[])
    }

    /// Whether the eigenvalues are separated enough for the Vandermonde path.
    pub fn well_separated(&mut self) -> bool {
        let eig = self.eigenvalues().to_vec();
        if eig.len() != self.order {
            return false;
        }
        let max = eig.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let mut gap = f64::INFINITY;
        for i in 0..eig.len() {
            for j in i + 1..eig.len() {
                gap = gap.min((eig[i] - eig[j]).norm());
            }
        }
        let amplification = ((1.0 + max) / gap).powi(self.order as i32 - 1) * f64::EPSILON;
        gap >= COLLISION_TOL * (1.0 + max) && amplification <= MAX_AMPLIFICATION
    }

    fn rhs(&self, y: &[C], forcing: C, out: &mut [C]) {
        let q = self.order;
        out[..q - 1].copy_from_slice(&y[1..q]);
        let mut last = forcing / self.lead;
        for i in 0..q {
            last -= self.coeffs[i] * y[i];
        }
        out[q - 1] = last;
    }
}

/// Tuning of the oracle's own integrators.
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Composite Gauss–Legendre panels for the Duhamel convolution.
    pub panels: usize,
    pub nodes_per_panel: usize,
    /// Relative local error target of the extrapolation integrator.
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            panels: 6,
            nodes_per_panel: 24,
            tolerance: 1e-13,
        }
    }
}

/// Solves the mode ODE `lead · Σ e_i û^{(i)} = f̂` with `û^{(r)}(0) = φ̂_r`.
pub fn mode_ode_solve(
    spec: &CharacteristicSpec,
    p: C,
    phi_hat: &[C],
    f_hat: Option<&dyn Fn(f64) -> C>,
    t: f64,
) -> C {
    mode_ode_solve_with(spec, p, phi_hat, f_hat, t, &OracleConfig::default())
}

pub fn mode_ode_solve_with(
    spec: &CharacteristicSpec,
    p: C,
    phi_hat: &[C],
    f_hat: Option<&dyn Fn(f64) -> C>,
    t: f64,
    cfg: &OracleConfig,
) -> C {
    let mut sys = CompanionSystem::new(spec, p);
    if sys.well_separated() {
        if let Some(v) = solve_eigen(&mut sys, phi_hat, f_hat, t, cfg) {
            return v;
        }
    }
    solve_extrapolated(&sys, phi_hat, f_hat, t, cfg)
}

/// Eigendecomposition path. `None` if the Vandermonde system is singular.
pub fn solve_eigen(
    sys: &mut CompanionSystem,
    phi_hat: &[C],
    f_hat: Option<&dyn Fn(f64) -> C>,
    t: f64,
    cfg: &OracleConfig,
) -> Option<C> {
    let q = sys.order;
    let eig = sys.eigenvalues().to_vec();
    if eig.len() != q {
        return None;
    }
    // Columns are eigenvectors (1, λ, λ², …) of the companion matrix.
    let vander = DMatrix::<C>::from_fn(q, q, |r, i| eig[i].powu(r as u32));
    let lu = vander.lu();
    let y0 = DVector::<C>::from_iterator(q, (0..q).map(|r| phi_hat.get(r).copied().unwrap_or_default()));
    let alpha = lu.solve(&y0)?;
    let mut value: C = eig
        .iter()
        .zip(alpha.iter())
        .map(|(l, a)| a * (l * t).exp())
        .sum();
    if let Some(f) = f_hat {
        let mut unit = DVector::<C>::zeros(q);
        unit[q - 1] = C::new(1.0, 0.0) / sys.lead;
        let beta = lu.solve(&unit)?;
        if t > 0.0 {
            let rule = GaussLegendre::new(cfg.nodes_per_panel);
            let h = t / cfg.panels as f64;
            for panel in 0..cfg.panels {
                let a = panel as f64 * h;
                for (tau, w) in rule.mapped(a, a + h) {
                    let ft = f(tau);
                    let prop: C = eig
                        .iter()
                        .zip(beta.iter())
                        .map(|(l, b)| b * (l * (t - tau)).exp())
                        .sum();
                    value += prop * ft * w;
                }
            }
        }
    }
    Some(value)
}

/// Gragg–Bulirsch–Stoer extrapolation with four stages (order 8) and
/// adaptive step size.
pub fn solve_extrapolated(
    sys: &CompanionSystem,
    phi_hat: &[C],
    f_hat: Option<&dyn Fn(f64) -> C>,
    t: f64,
    cfg: &OracleConfig,
) -> C {
    const STAGES: usize = 4;
    let q = sys.order;
    let zero = C::new(0.0, 0.0);
    let forcing = |s: f64| f_hat.map(|f| f(s)).unwrap_or(zero);
    let mut y: Vec<C> = (0..q).map(|r| phi_hat.get(r).copied().unwrap_or_default()).collect();
    if t <= 0.0 {
        return y[0];
    }
    let scale = sys
        .coeffs
        .iter()
        .enumerate()
        .take(q)
        .map(|(i, c)| c.norm().powf(1.0 / (q - i) as f64))
        .fold(1.0, f64::max);
    let mut h = (0.5 / scale).min(t);
    let mut now = 0.0;
    let mut dz = vec![zero; q];
    let midpoint = |y0: &[C], t0: f64, big: f64, n: usize, dz: &mut Vec<C>| -> Vec<C> {
        let step = big / n as f64;
        let mut prev = y0.to_vec();
        sys.rhs(&prev, forcing(t0), dz);
        let mut cur: Vec<C> = prev.iter().zip(dz.iter()).map(|(a, d)| a + d * step).collect();
        for k in 1..n {
            sys.rhs(&cur, forcing(t0 + k as f64 * step), dz);
            let next: Vec<C> = prev
                .iter()
                .zip(dz.iter())
                .map(|(a, d)| a + d * (2.0 * step))
                .collect();
            prev = cur;
            cur = next;
        }
        sys.rhs(&cur, forcing(t0 + big), dz);
        cur.iter()
            .zip(prev.iter())
            .zip(dz.iter())
            .map(|((c, p), d)| 0.5 * (c + p + d * step))
            .collect()
    };
    let mut guard = 0;
    while now < t && guard < 1_000_000 {
        guard += 1;
        if now + h > t {
            h = t - now;
        }
        let steps: [usize; STAGES] = [2, 4, 6, 8];
        let mut table: Vec<Vec<Vec<C>>> = Vec::with_capacity(STAGES);
        for (j, &n) in steps.iter().enumerate() {
            let mut row = vec![midpoint(&y, now, h, n, &mut dz)];
            for k in 1..=j {
                let ratio = (n as f64 / steps[j - k] as f64).powi(2) - 1.0;
                let refined: Vec<C> = row[k - 1]
                    .iter()
                    .zip(table[j - 1][k - 1].iter())
                    .map(|(a, b)| a + (a - b) / ratio)
                    .collect();
                row.push(refined);
            }
            table.push(row);
        }
        let best = &table[STAGES - 1][STAGES - 1];
        let second = &table[STAGES - 1][STAGES - 2];
        let norm = best.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let err = best
            .iter()
            .zip(second)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / (cfg.tolerance * norm);
        if err <= 1.0 || h < 1e-10 * t {
            y = best.clone();
            now += h;
        }
        let factor = if err == 0.0 {
            4.0
        } else {
            (0.9 * err.powf(-1.0 / (2 * STAGES - 1) as f64)).clamp(0.2, 4.0)
        };
        h *= factor;
    }
    y[0]
}

/// Oracle values of a whole problem at its output times, mode by mode.
///
/// Forcing spectra are computed once per time node the oracle asks for and
/// shared across modes.
pub fn oracle_solution(problem: &CauchyProblem) -> Result<Vec<(f64, Field)>> {
    problem.validate()?;
    let grid = &problem.grid;
    let phi_hat: Vec<SpectralField> = problem.phi.iter().map(Field::forward).collect();
    let cache: RefCell<HashMap<u64, SpectralField>> = RefCell::new(HashMap::new());
    let mut out = Vec::with_capacity(problem.times.len());
    for &t in &problem.times {
        let mut hat = SpectralField::zeros(grid);
        for k in 0..grid.len() {
            let p = problem.operator.symbol_eval(&grid.wavevector(k), &grid.lengths);
            let phi: Vec<C> = phi_hat.iter().map(|s| s.data[k]).collect();
            let f = |tau: f64| -> C {
                let mut cache = cache.borrow_mut();
                cache
                    .entry(tau.to_bits())
                    .or_insert_with(|| problem.forcing_spectrum(tau).expect("forcing present"))
                    .data[k]
            };
            let forcing: Option<&dyn Fn(f64) -> C> = problem.forcing.as_ref().map(|_| &f as _);
            hat.data[k] = mode_ode_solve(&problem.spec, p, &phi, forcing, t);
        }
        out.push((t, hat.inverse()));
    }
    Ok(out)
}

/// Outcome of substituting a computed space-time field back into the PDE.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// Largest relative L² residual over the interior snapshots.
    pub relative_residual: f64,
    /// Per interior snapshot: `(t, relative residual)`.
    pub per_time: Vec<(f64, f64)>,
    /// `max_x |∂_t^r u(0) − φ_r|` per `r`, when the first snapshot is at `t = 0`.
    pub initial_errors: Option<Vec<f64>>,
}

impl ResidualReport {
    pub fn max_initial_error(&self) -> Option<f64> {
        self.initial_errors
            .as_ref()
            .map(|v| v.iter().copied().fold(0.0, f64::max))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "relative_residual = {:.6e}", self.relative_residual);
        for (t, r) in &self.per_time {
            let _ = writeln!(s, "residual t={t:.6} {r:.6e}");
        }
        match &self.initial_errors {
            Some(errs) => {
                for (r, e) in errs.iter().enumerate() {
                    let _ = writeln!(s, "initial_error r={r} {e:.6e}");
                }
            }
            None => {
                let _ = writeln!(s, "initial_error unavailable (first snapshot not at t=0)");
            }
        }
        s
    }
}

/// Finite-difference weights for derivatives `0..=max_order` at `x0` over `xs`
/// (Fornberg's recursion). Returns `w[d][j]`.
pub fn fd_weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Substitutes snapshots into `P(∂x, ∂t) u = f` (spectral in space, central
/// differences of at least sixth order in time) and checks initial data with
/// one-sided differences.
pub fn residual_check(snapshots: &[(f64, Field)], problem: &CauchyProblem) -> Result<ResidualReport> {
    let spec = &problem.spec;
    let q = spec.time_order();
    let half = q.div_ceil(2) + 2;
    let needed = (2 * half + 1).max(7);
    if snapshots.len() < needed {
        return Err(Error::InsufficientSnapshots {
            needed,
            got: snapshots.len(),
        });
    }
    let times: Vec<f64> = snapshots.iter().map(|(t, _)| *t).collect();
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let uniform = h > 0.0
        && times
            .iter()
            .enumerate()
            .all(|(i, t)| (t - (times[0] + i as f64 * h)).abs() <= 1e-9 * (1.0 + t.abs()));
    if !uniform {
        return Err(Error::InvalidProblem(
            "snapshot times are not uniformly spaced".into(),
        ));
    }
    let grid = &problem.grid;
    let spectra: Vec<SpectralField> = snapshots.iter().map(|(_, u)| u.forward()).collect();
    let symbols: Vec<C> = (0..grid.len())
        .map(|i| problem.operator.symbol_eval(&grid.wavevector(i), &grid.lengths))
        .collect();
    let polys: Vec<Vec<C>> = symbols
        .iter()
        .map(|&p| mode_polynomial(spec, p).iter().map(|e| e * spec.lead).collect())
        .collect();

    let offsets: Vec<f64> = (0..2 * half + 1).map(|j| (j as f64 - half as f64) * h).collect();
    let central = fd_weights(0.0, &offsets, q);
    let mut per_time = Vec::new();
    for centre in half..snapshots.len() - half {
        let tc = times[centre];
        let forcing = problem.forcing_spectrum(tc);
        let mut res_sq = 0.0;
        let mut term_sq = vec![0.0; q + 1];
        let mut f_sq = 0.0;
        for k in 0..grid.len() {
            let mut total = C::new(0.0, 0.0);
            for (i, w) in central.iter().enumerate() {
                let d: C = (0..offsets.len())
                    .map(|j| spectra[centre + j - half].data[k] * w[j])
                    .sum::<C>();
                let term = polys[k][i] * d;
                term_sq[i] += term.norm_sqr();
                total += term;
            }
            let fk = forcing.as_ref().map(|f| f.data[k]).unwrap_or_default();
            f_sq += fk.norm_sqr();
            res_sq += (total - fk).norm_sqr();
        }
        let denom = term_sq.iter().copied().fold(f_sq, f64::max).sqrt();
        let rel = if denom > 0.0 { res_sq.sqrt() / denom } else { res_sq.sqrt() };
        per_time.push((tc, rel));
    }
    let relative_residual = per_time.iter().map(|(_, r)| *r).fold(0.0, f64::max);

    let initial_errors = if times[0].abs() <= 1e-12 {
        let mut errs = Vec::with_capacity(q);
        for r in 0..q {
            let count = (r + 9).min(snapshots.len());
            let xs: Vec<f64> = times[..count].to_vec();
            let w = fd_weights(0.0, &xs, r);
            let mut worst: f64 = 0.0;
            for x in 0..grid.len() {
                let d: C = (0..count).map(|j| snapshots[j].1.data[x] * w[r][j]).sum();
                worst = worst.max((d - problem.phi[r].data[x]).norm());
            }
            errs.push(worst);
        }
        Some(errs)
    } else {
        None
    };
    Ok(ResidualReport {
        relative_residual,
        per_time,
        initial_errors,
    })
}

/// One row of the discrepancy probe's evidence table.
#[derive(Debug, Clone, Copy)]
pub struct ProbeSample {
    pub m: usize,
    pub p: C,
    pub t: f64,
    pub oracle: C,
    pub err_plain: f64,
    pub err_tau_prime: f64,
}

/// Verdict and evidence from [`kernel_discrepancy_probe`].
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub orders: Vec<usize>,
    pub seed: u64,
    pub quad_nodes: usize,
    pub verdict: Option<KernelMeasure>,
    pub evidence: Vec<ProbeSample>,
}

/// Required error ratio between the losing and winning variants on every sample.
pub const PROBE_DOMINANCE: f64 = 1e3;

impl ProbeReport {
    pub fn decisive(&self) -> Result<KernelMeasure> {
        self.verdict.ok_or_else(|| {
            Error::Inconclusive(format!(
                "no variant beats the other by {PROBE_DOMINANCE:e} on all {} samples",
                self.evidence.len()
            ))
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# opcauchy repeated-root kernel measure verdict");
        let verdict = self.verdict.map(|v| v.name()).unwrap_or("Inconclusive");
        let _ = writeln!(s, "verdict = {verdict}");
        let orders: Vec<String> = self.orders.iter().map(|m| m.to_string()).collect();
        let _ = writeln!(s, "orders = {}", orders.join(","));
        let _ = writeln!(s, "samples = {}", self.evidence.len());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "quad_nodes = {}", self.quad_nodes);
        let _ = writeln!(s, "# evidence = m, p_re, p_im, t, oracle_abs, err_plain, err_tau_prime");
        for e in &self.evidence {
            let _ = writeln!(
                s,
                "evidence = {}, {:.17e}, {:.17e}, {:.17e}, {:.6e}, {:.6e}, {:.6e}",
                e.m,
                e.p.re,
                e.p.im,
                e.t,
                e.oracle.norm(),
                e.err_plain,
                e.err_tau_prime
            );
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Reads the `verdict` key of a stored probe file.
pub fn read_verdict(path: &Path) -> Result<KernelMeasure> {
    let text = std::fs::read_to_string(path)?;
    for line in text.lines() {
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            if key.trim() == "verdict" {
                let value = value.trim();
                if value == "Inconclusive" {
                    return Err(Error::Inconclusive(format!(
                        "stored verdict in {} is inconclusive",
                        path.display()
                    )));
                }
                return value.parse();
            }
        }
    }
    Err(Error::Config(format!("no `verdict` key in {}", path.display())))
}

/// Compares both readings of the repeated-root forcing kernel against the
/// oracle on random modes, forcings and times.
pub fn kernel_discrepancy_probe(
    orders: &[usize],
    samples: usize,
    seed: u64,
    quad: QuadConfig,
) -> Result<ProbeReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut evidence = Vec::with_capacity(orders.len() * samples);
    for &m in orders {
        let spec = CharacteristicSpec::repeated(m)?;
        for _ in 0..samples {
            let p = C::from_polar(rng.random_range(0.2..4.0), rng.random_range(0.0..std::f64::consts::TAU));
            let t = rng.random_range(0.25..1.0);
            let a = C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let b = C::new(rng.random_range(0.5..1.5), rng.random_range(-1.0..1.0));
            let w: f64 = rng.random_range(0.5..3.0);
            let f = move |s: f64| a + b * (w * s).cos();
            let oracle = mode_ode_solve(&spec, p, &vec![C::new(0.0, 0.0); 2 * m], Some(&f), t);
            let eval = |measure| -> Result<f64> {
                let v = inhomogeneous_mode(&spec, p, f, t, quad, Some(measure))?.value;
                Ok((v - oracle).norm() / (1.0 + oracle.norm()))
            };
            evidence.push(ProbeSample {
                m,
                p,
                t,
                oracle,
                err_plain: eval(KernelMeasure::PlainMeasure)?,
                err_tau_prime: eval(KernelMeasure::TauPrimeMeasure)?,
            });
        }
    }
    let dominates = |win: fn(&ProbeSample) -> f64, lose: fn(&ProbeSample) -> f64| {
        !evidence.is_empty()
            && evidence
                .iter()
                .all(|e| lose(e) >= PROBE_DOMINANCE * win(e).max(f64::MIN_POSITIVE))
    };
    let verdict = if dominates(|e| e.err_tau_prime, |e| e.err_plain) {
        Some(KernelMeasure::TauPrimeMeasure)
    } else if dominates(|e| e.err_plain, |e| e.err_tau_prime) {
        Some(KernelMeasure::PlainMeasure)
    } else {
        None
    };
    Ok(ProbeReport {
        orders: orders.to_vec(),
        seed,
        quad_nodes: quad.nodes,
        verdict,
        evidence,
    })
}
