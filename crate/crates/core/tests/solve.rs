use std::sync::Arc;

use num_complex::Complex64 as C;
use opcauchy::config::parse_problem;
use opcauchy::field::{Field, Grid};
use opcauchy::kernel::{solve, CauchyProblem, KernelMeasure, SolveOptions};
use opcauchy::oracle::oracle_solution;
use opcauchy::symbol_poly::{CharacteristicSpec, SymbolPolynomial};

fn max_diff(a: &[(f64, Field)], b: &[(f64, Field)]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|((_, u), (_, v))| u.data.iter().zip(&v.data).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

const BASE: &str = "
[operator]
dim = 2
terms = alpha=2,0: coeff=1; alpha=0,2: coeff=0.5; alpha=1,0: coeff=0.3i
[grid]
shape = 8, 6
box = 2*pi, 3
[forcing]
f = cos(t)*sin(x1) + exp(-t)*cos(2*pi*x2/3) + 0.2i
[output]
times = 0.3, 0.8
";

fn check_against_oracle(equation: &str, initial: &str, measure: Option<KernelMeasure>) {
    let cfg = parse_problem(&format!("{equation}\n{BASE}\n[initial]\n{initial}")).unwrap();
    let sol = solve(&cfg.problem, SolveOptions { repeated_measure: measure, ..Default::default() }).unwrap();
    let oracle = oracle_solution(&cfg.problem).unwrap();
    let scale = oracle.iter().map(|(_, u)| u.max_abs()).fold(1.0, f64::max);
    let err = max_diff(&sol.snapshots, &oracle);
    assert!(err < 1e-9 * scale, "{equation}: {err:e}");
    assert!(!sol.report.has_overflow());
}

#[test]
fn first_order_from_coefficients_with_lead() {
    check_against_oracle(
        "[equation]\nkind = first\nm = 3\ncoeffs = 6; 11; 6; 2",
        "phi0 = sin(x1)*cos(2*pi*x2/3)\nphi1 = cos(x1)\nphi2 = 1",
        None,
    );
}

#[test]
fn even_order_complex_roots() {
    check_against_oracle(
        "[equation]\nkind = even\nm = 2\nroots = 1,0.2; 0.5,-0.3",
        "phi0 = sin(x1)\nphi1 = cos(x1 + 2*pi*x2/3)\nphi2 = 0\nphi3 = 1i*sin(2*x1)",
        None,
    );
}

#[test]
fn repeated_root_with_data_and_forcing() {
    check_against_oracle(
        "[equation]\nkind = repeated\nm = 3",
        "phi0 = sin(x1)\nphi1 = 0\nphi2 = cos(2*pi*x2/3)\nphi3 = 0\nphi4 = 0.5\nphi5 = 0",
        Some(KernelMeasure::TauPrimeMeasure),
    );
}

#[test]
fn plain_measure_disagrees_with_oracle() {
    let cfg = parse_problem(&format!(
        "[equation]\nkind = repeated\nm = 2\n{BASE}\n[initial]\nphi0 = 0\nphi1 = 0\nphi2 = 0\nphi3 = 0"
    ))
    .unwrap();
    let opts = |m| SolveOptions { repeated_measure: Some(m), ..Default::default() };
    let oracle = oracle_solution(&cfg.problem).unwrap();
    let good = max_diff(&solve(&cfg.problem, opts(KernelMeasure::TauPrimeMeasure)).unwrap().snapshots, &oracle);
    let bad = max_diff(&solve(&cfg.problem, opts(KernelMeasure::PlainMeasure)).unwrap().snapshots, &oracle);
    assert!(bad > 1e3 * good.max(1e-16), "plain {bad:e} vs tau' {good:e}");
}

#[test]
fn solve_is_linear_in_data_and_forcing() {
    let grid = Grid::new(vec![12, 10], vec![2.0, 3.0]).unwrap();
    let spec = CharacteristicSpec::from_roots(
        opcauchy::symbol_poly::Kind::EvenOrderProduct,
        &[C::new(1.0, 0.0), C::new(0.6, 0.1)],
    )
    .unwrap();
    let make = |scale: C, shift: f64| CauchyProblem {
        spec: spec.clone(),
        operator: SymbolPolynomial::laplacian(2),
        grid: grid.clone(),
        phi: (0..4)
            .map(|r| Field::from_fn(&grid, |x| scale * C::new((x[0] * 3.0 + r as f64 + shift).sin(), x[1].cos())))
            .collect(),
        forcing: Some(Arc::new(move |x: &[f64], t: f64| scale * C::new((t + x[1] + shift).cos(), 0.0))),
        times: vec![0.4, 1.1],
    };
    let alpha = C::new(0.7, -1.3);
    let u = solve(&make(C::new(1.0, 0.0), 0.0), SolveOptions::default()).unwrap();
    let v = solve(&make(C::new(1.0, 0.0), 0.9), SolveOptions::default()).unwrap();
    // Combine the data of both problems directly.
    let pu = make(alpha, 0.0);
    let pv = make(C::new(1.0, 0.0), 0.9);
    let combined = CauchyProblem {
        phi: pu.phi.iter().zip(&pv.phi).map(|(a, b)| a.add(b)).collect(),
        forcing: {
            let (fu, fv) = (pu.forcing.clone().unwrap(), pv.forcing.clone().unwrap());
            Some(Arc::new(move |x: &[f64], t: f64| fu(x, t) + fv(x, t)))
        },
        ..pu.clone()
    };
    let w = solve(&combined, SolveOptions::default()).unwrap();
    for ((_, a), ((_, b), (_, c))) in w.snapshots.iter().zip(u.snapshots.iter().zip(&v.snapshots)) {
        let expect = b.scaled(alpha).add(c);
        assert!(a.relative_l2(&expect) < 1e-12);
    }
}
