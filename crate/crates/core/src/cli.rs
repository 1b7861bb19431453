//! Run orchestration behind the `opcauchy` binary.
//!
//! Every mode writes its artifacts into `--out` and reports an exit code:
//! [`EXIT_OK`], [`EXIT_VALIDATION`] for bad input or missing prerequisites,
//! [`EXIT_NUMERICAL`] when a numerical check fails or a mode overflows, and
//! [`EXIT_INCONCLUSIVE`] when the kernel probe cannot decide.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::config::{load_problem, ProblemConfig};
use crate::error::{Error, Result};
use crate::field::{Field, Grid, SpectralField};
use crate::kernel::{solve, CauchyProblem, KernelMeasure, SolveOptions};
use crate::multiplier::{apply_multiplier, sinhc_sqrt};
use crate::oracle::{kernel_discrepancy_probe, oracle_solution, read_verdict, residual_check};
use crate::output::{read_dump, write_solution, DUMP_NAME};
use crate::quadrature::QuadConfig;
use crate::spherical::{sinhc_spherical, SphereQuadrature};
use crate::symbol_poly::{Kind, SymbolPolynomial};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

pub const VERDICT_NAME: &str = "kernel_verdict.txt";
pub const RESIDUAL_NAME: &str = "residual.txt";
pub const CONVERGENCE_NAME: &str = "convergence.txt";
pub const SPHERICAL_NAME: &str = "compare_spherical.txt";

/// `verify` fails above these.
pub const RESIDUAL_TOL: f64 = 1e-4;
pub const INITIAL_TOL: f64 = 1e-5;
/// `convergence` expects the error to fall below this before [`CONVERGENCE_MAX_NODES`].
pub const CONVERGENCE_FLOOR: f64 = 1e-10;
pub const CONVERGENCE_MAX_NODES: usize = 96;
/// `compare-spherical` fails above this relative L² difference.
pub const SPHERICAL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Solve,
    Verify,
    Probe,
    Convergence,
    CompareSpherical,
}

/// Command-line configuration.
#[derive(Debug, Clone, Parser)]
#[command(name = "opcauchy", version, about = "Closed-form Cauchy problem solver on periodic grids")]
pub struct RunConfig {
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Problem file (INI).
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub quad_nodes: usize,
    #[arg(long, default_value_t = 29)]
    pub sphere_order: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 20240611)]
    pub seed: u64,
    /// Write results even if some modes overflowed.
    #[arg(long)]
    pub permissive_overflow: bool,
    /// Repeated-root forcing measure (`plain` or `tau-prime`); overrides the stored verdict.
    #[arg(long)]
    pub kernel_measure: Option<KernelMeasure>,
    /// Random samples per order in `probe`.
    #[arg(long, default_value_t = 8)]
    pub probe_samples: usize,
}

impl RunConfig {
    pub fn new(mode: Mode, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            mode,
            problem: None,
            quad_nodes: 64,
            sphere_order: 29,
            out: out.into(),
            seed: 20240611,
            permissive_overflow: false,
            kernel_measure: None,
            probe_samples: 8,
        }
    }

    pub fn with_problem(mut self, path: impl Into<PathBuf>) -> Self {
        self.problem = Some(path.into());
        self
    }

    fn quad(&self) -> QuadConfig {
        QuadConfig {
            nodes: self.quad_nodes,
        }
    }
}

/// Exit code, a human-readable summary and the files written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Inconclusive(_) => EXIT_INCONCLUSIVE,
        Error::DegenerateRoots { .. } => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

/// Runs one mode. Errors become exit codes; nothing panics on bad input.
pub fn run(cfg: &RunConfig) -> Outcome {
    let result = match cfg.mode {
        Mode::Solve => run_solve(cfg),
        Mode::Verify => run_verify(cfg),
        Mode::Probe => run_probe(cfg),
        Mode::Convergence => run_convergence(cfg),
        Mode::CompareSpherical => run_compare_spherical(cfg),
    };
    result.unwrap_or_else(|e| Outcome {
        code: exit_code(&e),
        summary: format!("error: {e}"),
        artifacts: Vec::new(),
    })
}

fn problem_config(cfg: &RunConfig) -> Result<ProblemConfig> {
    let path = cfg
        .problem
        .as_deref()
        .ok_or_else(|| Error::Config(format!("--problem is required for --mode {:?}", cfg.mode)))?;
    load_problem(path)
}

/// Measure for repeated-root forcing: the explicit flag, else the stored verdict.
pub fn resolve_measure(cfg: &RunConfig, problem: &CauchyProblem) -> Result<Option<KernelMeasure>> {
    if problem.spec.kind != Kind::RepeatedRoot || problem.forcing.is_none() {
        return Ok(cfg.kernel_measure);
    }
    if let Some(m) = cfg.kernel_measure {
        return Ok(Some(m));
    }
    let path = cfg.out.join(VERDICT_NAME);
    if !path.exists() {
        return Err(Error::Config(format!(
            "repeated-root forcing needs a kernel verdict and {} does not exist; \
             run `--mode probe --out {}` first or pass --kernel-measure",
            path.display(),
            cfg.out.display()
        )));
    }
    read_verdict(&path).map(Some)
}

fn solve_options(cfg: &RunConfig, problem: &CauchyProblem) -> Result<SolveOptions> {
    Ok(SolveOptions {
        quad: cfg.quad(),
        repeated_measure: resolve_measure(cfg, problem)?,
    })
}

fn run_solve(cfg: &RunConfig) -> Result<Outcome> {
    let pc = problem_config(cfg)?;
    let problem = &pc.problem;
    let sol = solve(problem, solve_options(cfg, problem)?)?;
    let artifacts = write_solution(&cfg.out, &problem.grid, &sol, pc.formats)?;
    let mut summary = format!(
        "solved {} (m = {}) on {:?} at {} times",
        problem.spec.kind.name(),
        problem.spec.m,
        problem.grid.shape,
        problem.times.len()
    );
    let mut code = EXIT_OK;
    if sol.report.has_overflow() {
        let _ = write!(summary, "; {} modes overflowed", sol.report.overflowed.len());
        if !cfg.permissive_overflow {
            code = EXIT_NUMERICAL;
        }
    }
    Ok(Outcome {
        code,
        summary,
        artifacts,
    })
}

fn same_times(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))
}

fn run_verify(cfg: &RunConfig) -> Result<Outcome> {
    let pc = problem_config(cfg)?;
    let problem = &pc.problem;
    let dump = cfg.out.join(DUMP_NAME);
    let mut artifacts = Vec::new();
    let snapshots = if dump.exists() {
        let (grid, snaps) = read_dump(&dump)?;
        let times: Vec<f64> = snaps.iter().map(|(t, _)| *t).collect();
        if grid != problem.grid || !same_times(&times, &problem.times) {
            return Err(Error::Config(format!(
                "{} does not match the problem's grid and output times",
                dump.display()
            )));
        }
        snaps
    } else {
        let sol = solve(problem, solve_options(cfg, problem)?)?;
        artifacts.extend(write_solution(&cfg.out, &problem.grid, &sol, pc.formats)?);
        sol.snapshots
    };
    let report = residual_check(&snapshots, problem)?;
    let path = cfg.out.join(RESIDUAL_NAME);
    fs::write(&path, report.to_text())?;
    artifacts.push(path);
    let init = report.max_initial_error();
    let pass = report.relative_residual <= RESIDUAL_TOL && init.is_none_or(|e| e <= INITIAL_TOL);
    let summary = format!(
        "relative residual {:.3e}, initial error {}",
        report.relative_residual,
        init.map(|e| format!("{e:.3e}")).unwrap_or_else(|| "n/a".into())
    );
    Ok(Outcome {
        code: if pass { EXIT_OK } else { EXIT_NUMERICAL },
        summary,
        artifacts,
    })
}

fn run_probe(cfg: &RunConfig) -> Result<Outcome> {
    fs::create_dir_all(&cfg.out)?;
    let report = kernel_discrepancy_probe(&[2, 3], cfg.probe_samples, cfg.seed, cfg.quad())?;
    let path = cfg.out.join(VERDICT_NAME);
    report.write(&path)?;
    let verdict = report.verdict.map(KernelMeasure::name).unwrap_or("Inconclusive");
    Ok(Outcome {
        code: if report.verdict.is_some() { EXIT_OK } else { EXIT_INCONCLUSIVE },
        summary: format!("kernel verdict {verdict} from {} samples", report.evidence.len()),
        artifacts: vec![path],
    })
}

/// Relative L² distance over all snapshots; absolute when the reference vanishes.
fn snapshot_error(a: &[(f64, Field)], b: &[(f64, Field)]) -> f64 {
    a.iter()
        .zip(b)
        .map(|((_, u), (_, v))| {
            let diff = u.add(&v.scaled((-1.0).into())).l2_norm();
            let norm = v.l2_norm();
            if norm > 0.0 {
                diff / norm
            } else {
                diff
            }
        })
        .fold(0.0, f64::max)
}

/// Quadrature node counts swept by `convergence`.
pub fn convergence_nodes() -> Vec<usize> {
    (1..=CONVERGENCE_MAX_NODES / 4).map(|i| 4 * i).collect()
}

/// Error against the oracle per node count.
pub fn convergence_table(problem: &CauchyProblem, measure: Option<KernelMeasure>) -> Result<Vec<(usize, f64)>> {
    let reference = oracle_solution(problem)?;
    convergence_nodes()
        .into_iter()
        .map(|nodes| {
            let sol = solve(
                problem,
                SolveOptions {
                    quad: QuadConfig { nodes },
                    repeated_measure: measure,
                },
            )?;
            Ok((nodes, snapshot_error(&sol.snapshots, &reference)))
        })
        .collect()
}

/// First node count whose error is below `floor`, and whether the error
/// decreased monotonically up to that point.
pub fn convergence_summary(table: &[(usize, f64)], floor: f64) -> (Option<usize>, bool) {
    let reached = table.iter().position(|(_, e)| *e < floor);
    let upto = reached.map(|i| i + 1).unwrap_or(table.len());
    let monotone = table[..upto].windows(2).all(|w| w[1].1 <= w[0].1);
    (reached.map(|i| table[i].0), monotone)
}

fn run_convergence(cfg: &RunConfig) -> Result<Outcome> {
    let pc = problem_config(cfg)?;
    let measure = resolve_measure(cfg, &pc.problem)?;
    let table = convergence_table(&pc.problem, measure)?;
    let (reached, monotone) = convergence_summary(&table, CONVERGENCE_FLOOR);
    let mut text = String::from("# nodes, relative error vs oracle\n");
    for (n, e) in &table {
        let _ = writeln!(text, "{n:>4} {e:.6e}");
    }
    let _ = writeln!(text, "monotone = {monotone}");
    let _ = writeln!(
        text,
        "floor_reached_at = {}",
        reached.map(|n| n.to_string()).unwrap_or_else(|| "never".into())
    );
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(CONVERGENCE_NAME);
    fs::write(&path, &text)?;
    let pass = monotone && reached.is_some_and(|n| n < CONVERGENCE_MAX_NODES);
    Ok(Outcome {
        code: if pass { EXIT_OK } else { EXIT_NUMERICAL },
        summary: text,
        artifacts: vec![path],
    })
}

/// Relative L² difference between the spherical-mean and multiplier
/// realizations of `sinh(t a √Δ)/(a √Δ) u` for each `(a, t)`.
pub fn spherical_table(u: &Field, pairs: &[(f64, f64)], order: usize) -> Result<Vec<(f64, f64, f64)>> {
    let q = SphereQuadrature::new(order);
    let lap = SymbolPolynomial::laplacian(3);
    pairs
        .iter()
        .map(|&(a, t)| {
            let spherical = sinhc_spherical(u, a, t, &q)?;
            let spectral = apply_multiplier(u, &lap, |p| sinhc_sqrt(p * (a * a * t * t)) * t)?.field;
            Ok((a, t, spherical.relative_l2(&spectral)))
        })
        .collect()
}

fn run_compare_spherical(cfg: &RunConfig) -> Result<Outcome> {
    let (u, pairs) = match &cfg.problem {
        Some(_) => {
            let pc = problem_config(cfg)?;
            let pairs: Vec<(f64, f64)> = pc.problem.times.iter().map(|&t| (1.0, t)).collect();
            (pc.problem.phi[0].clone(), pairs)
        }
        None => {
            let grid = Grid::cube(3, 32);
            let u = SpectralField::random_band_limited(&grid, 5, cfg.seed).inverse();
            (u, vec![(1.0, 0.5), (0.5, 1.0), (1.0, 1.0), (2.0, 0.5)])
        }
    };
    let table = spherical_table(&u, &pairs, cfg.sphere_order)?;
    let mut text = format!("# sphere order {}; a, t, relative L2 difference\n", cfg.sphere_order);
    for (a, t, e) in &table {
        let _ = writeln!(text, "{a:.4} {t:.4} {e:.6e}");
    }
    fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(SPHERICAL_NAME);
    fs::write(&path, &text)?;
    let pass = table.iter().all(|(_, _, e)| *e <= SPHERICAL_TOL);
    Ok(Outcome {
        code: if pass { EXIT_OK } else { EXIT_NUMERICAL },
        summary: text,
        artifacts: vec![path],
    })
}
