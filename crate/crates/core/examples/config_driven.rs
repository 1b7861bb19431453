// Solve and verify a problem file the way the binary does.
//
// $ cargo run --example config_driven -- problems/wave_product.ini
// $ cargo run --bin opcauchy -- --mode solve --problem problems/wave_product.ini --out out

use std::path::PathBuf;

use opcauchy::cli::{run, Mode, RunConfig};

fn main() {
    let problem = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("problems/heat_product.ini"));
    let out = std::env::temp_dir().join("opcauchy-config-driven");
    for mode in [Mode::Solve, Mode::Verify, Mode::Convergence] {
        let outcome = run(&RunConfig::new(mode, &out).with_problem(&problem));
        println!("{mode:?}: exit {}\n{}", outcome.code, outcome.summary.trim_end());
    }
    println!("artifacts in {}", out.display());
}
