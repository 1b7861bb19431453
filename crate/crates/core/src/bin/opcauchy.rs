use clap::Parser;
use opcauchy::cli::{run, RunConfig};

fn main() {
    let cfg = RunConfig::parse();
    let outcome = run(&cfg);
    if outcome.code == 0 {
        println!("{}", outcome.summary);
    } else {
        eprintln!("{}", outcome.summary);
    }
    for path in &outcome.artifacts {
        println!("wrote {}", path.display());
    }
    std::process::exit(outcome.code);
}
