// The expression language used for initial data and forcing in problem files.
//
// $ cargo run --example expression_language

use opcauchy::expr::parse;

fn main() {
    let x = [0.3, -1.2];
    for src in [
        "sin(x1)*cos(x2)",
        "-x1^2 + 2*x1*x2 - x2^2",
        "exp(-t)*(1 + 2i)",
        "sqrt(-4)",
        "abs(3 - 4i)",
        "x1^-2",
        "cosh(pi*x1)/sinh(1)",
    ] {
        let e = parse(src, 2, true).unwrap();
        println!("{src:<24} -> {e}  = {:.6}", e.eval(&x, 0.5));
    }
    for bad in ["sin x1", "x3 + 1", "x1^0.5", "t*x1", "(1 + 2"] {
        println!("{bad:<12} error: {}", parse(bad, 2, false).unwrap_err());
    }
}
