use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use num_complex::Complex64 as C;
use opcauchy::cli::{run, Mode, RunConfig, EXIT_INCONCLUSIVE, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, VERDICT_NAME};
use opcauchy::output::{csv_name, read_csv_values, read_dump, DUMP_NAME};

fn problem(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems").join(name)
}

fn run_mode(mode: Mode, out: &Path, problem_file: Option<&Path>) -> opcauchy::cli::Outcome {
    let mut cfg = RunConfig::new(mode, out);
    cfg.problem = problem_file.map(Path::to_path_buf);
    run(&cfg)
}

#[test]
fn heat_product_solve_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_mode(Mode::Solve, dir.path(), Some(&problem("heat_product.ini")));
    assert_eq!(out.code, EXIT_OK, "{}", out.summary);
    let (grid, snaps) = read_dump(&dir.path().join(DUMP_NAME)).unwrap();
    let (_, u) = snaps.iter().find(|(t, _)| *t == 1.0).unwrap();
    let a = 2.0 * (-1.0f64).exp() - (-2.0f64).exp();
    for i in 0..grid.len() {
        assert!((u.data[i] - C::new(a * grid.point(i)[0].sin(), 0.0)).norm() < 1e-8);
    }
    assert!(dir.path().join("stability.txt").exists());
}

#[test]
fn csv_and_binary_agree() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_mode(Mode::Solve, dir.path(), Some(&problem("wave_product.ini"))).code, EXIT_OK);
    let (_, snaps) = read_dump(&dir.path().join(DUMP_NAME)).unwrap();
    for (i, (_, u)) in snaps.iter().enumerate() {
        let csv = read_csv_values(&dir.path().join(csv_name(i))).unwrap();
        assert_eq!(csv.len(), u.data.len());
        for (a, b) in csv.iter().zip(&u.data) {
            assert!((a - b).norm() <= 1e-12);
        }
    }
}

#[test]
fn reruns_are_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(run_mode(Mode::Solve, d.path(), Some(&problem("heat3d.ini"))).code, EXIT_OK);
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join(DUMP_NAME)).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn verify_and_convergence_modes() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem("heat_product.ini");
    assert_eq!(run_mode(Mode::Solve, dir.path(), Some(&p)).code, EXIT_OK);
    let out = run_mode(Mode::Verify, dir.path(), Some(&p));
    assert_eq!(out.code, EXIT_OK, "{}", out.summary);
    let text = fs::read_to_string(dir.path().join("residual.txt")).unwrap();
    let residual: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("relative_residual = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual <= 1e-4);

    let out = run_mode(Mode::Convergence, dir.path(), Some(&p));
    assert_eq!(out.code, EXIT_OK, "{}", out.summary);
    assert!(out.summary.contains("monotone = true"));
}

#[test]
fn verify_rejects_a_stale_dump() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_mode(Mode::Solve, dir.path(), Some(&problem("heat_product.ini"))).code, EXIT_OK);
    let out = run_mode(Mode::Verify, dir.path(), Some(&problem("wave_product.ini")));
    assert_eq!(out.code, EXIT_VALIDATION);
}

#[test]
fn repeated_forcing_requires_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem("repeated_forced.ini");
    let out = run_mode(Mode::Solve, dir.path(), Some(&p));
    assert_eq!(out.code, EXIT_VALIDATION);
    assert!(out.summary.contains("--mode probe"), "{}", out.summary);

    let probe = run_mode(Mode::Probe, dir.path(), None);
    assert_eq!(probe.code, EXIT_OK, "{}", probe.summary);
    assert!(dir.path().join(VERDICT_NAME).exists());
    let out = run_mode(Mode::Solve, dir.path(), Some(&p));
    assert_eq!(out.code, EXIT_OK, "{}", out.summary);

    fs::write(dir.path().join(VERDICT_NAME), "verdict = Inconclusive\n").unwrap();
    assert_eq!(run_mode(Mode::Solve, dir.path(), Some(&p)).code, EXIT_INCONCLUSIVE);
}

#[test]
fn explicit_measure_overrides_missing_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(Mode::Solve, dir.path()).with_problem(problem("repeated_forced.ini"));
    cfg.kernel_measure = Some("tau-prime".parse().unwrap());
    assert_eq!(run(&cfg).code, EXIT_OK);
}

fn write_problem(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("p.ini");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(problem("heat_product.ini")).unwrap();
    let p = write_problem(dir.path(), &text.replace("phi1 = 0\n", ""));
    let out = run_mode(Mode::Solve, dir.path(), Some(&p));
    assert_eq!(out.code, EXIT_VALIDATION);
    assert!(out.summary.contains("initial.phi1"), "{}", out.summary);

    assert_eq!(run_mode(Mode::Solve, dir.path(), None).code, EXIT_VALIDATION);
    let missing = dir.path().join("nope.ini");
    assert_eq!(run_mode(Mode::Solve, dir.path(), Some(&missing)).code, EXIT_VALIDATION);
}

#[test]
fn overflow_is_a_numerical_failure_unless_permissive() {
    let dir = tempfile::tempdir().unwrap();
    // Backward diffusion: Re(a p) = k² grows past the overflow threshold.
    let p = write_problem(
        dir.path(),
        "[equation]\nkind = first\nm = 2\nroots = -1,0; -2,0\n\
         [operator]\ndim = 1\nterms = laplacian\n[grid]\nshape = 64\n\
         [initial]\nphi0 = sin(x1)\nphi1 = 0\n[output]\ntimes = 2\n",
    );
    let out = run_mode(Mode::Solve, dir.path(), Some(&p));
    assert_eq!(out.code, EXIT_NUMERICAL, "{}", out.summary);
    let report = fs::read_to_string(dir.path().join("stability.txt")).unwrap();
    assert!(report.contains("overflow k = "));

    let mut cfg = RunConfig::new(Mode::Solve, dir.path()).with_problem(&p);
    cfg.permissive_overflow = true;
    assert_eq!(run(&cfg).code, EXIT_OK);
}

#[test]
fn compare_spherical_on_problem_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_mode(Mode::CompareSpherical, dir.path(), Some(&problem("kirchhoff.ini")));
    assert_eq!(out.code, EXIT_OK, "{}", out.summary);
    assert_eq!(out.summary.lines().filter(|l| !l.starts_with('#')).count(), 2);
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_opcauchy");
    let status = Command::new(bin)
        .args(["--mode", "solve", "--problem"])
        .arg(problem("heat_product.ini"))
        .arg("--out")
        .arg(dir.path())
        .args(["--quad-nodes", "32"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&status.stdout).contains("solution.bin"));
    let status = Command::new(bin)
        .args(["--mode", "solve", "--problem"])
        .arg(problem("repeated_forced.ini"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_VALIDATION));
    assert!(String::from_utf8_lossy(&status.stderr).contains("--mode probe"));
}
