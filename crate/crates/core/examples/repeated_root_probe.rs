// The forcing kernel of (∂t² − P)^m can be read with or without a τ′ factor in
// its inner measure. The probe compares both against the ODE oracle.
//
// $ cargo run --example repeated_root_probe
// verdict = TauPrimeMeasure

use opcauchy::oracle::kernel_discrepancy_probe;
use opcauchy::quadrature::QuadConfig;

fn main() {
    let report = kernel_discrepancy_probe(&[2, 3], 6, 7, QuadConfig::default()).unwrap();
    println!("{:>2} {:>24} {:>6} {:>11} {:>11}", "m", "p", "t", "plain", "tau'");
    for e in &report.evidence {
        println!(
            "{:>2} {:>11.4}{:+.4}i {:>6.3} {:>11.2e} {:>11.2e}",
            e.m, e.p.re, e.p.im, e.t, e.err_plain, e.err_tau_prime
        );
    }
    match report.decisive() {
        Ok(v) => println!("verdict = {}", v.name()),
        Err(e) => println!("{e}"),
    }
}
