// Substitute a computed solution back into the PDE: spectral derivatives in
// space, finite differences in time. Uses the 3-D forced problem file.
//
// $ cargo run --example residual_verification

use std::path::Path;

use opcauchy::config::load_problem;
use opcauchy::kernel::{solve, SolveOptions};
use opcauchy::oracle::residual_check;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("problems/heat3d.ini");
    let cfg = load_problem(&path).unwrap();
    let sol = solve(&cfg.problem, SolveOptions::default()).unwrap();
    let report = residual_check(&sol.snapshots, &cfg.problem).unwrap();
    print!("{}", report.to_text());

    // A solution that is slightly wrong at one time shows up immediately.
    let mut bad = sol.snapshots.clone();
    bad[5].1 = bad[5].1.scaled(1.0001.into());
    let report = residual_check(&bad, &cfg.problem).unwrap();
    println!("perturbed: relative_residual = {:.3e}", report.relative_residual);
}
