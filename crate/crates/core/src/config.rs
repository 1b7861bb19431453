//! Problem files: a flat INI format with `[section]` headers.
//!
//! ```ini
//! [equation]
//! # first-order-product, even-order-product or repeated-root
//! kind = first-order-product
//! m = 2
//! # "re,im" pairs; or `coeffs = b0; b1; ..` from low to high degree
//! roots = 1,0; 2,0
//!
//! [operator]
//! dim = 1
//! # `;`-separated monomials, or `terms = laplacian`
//! terms = alpha=2: coeff=1
//!
//! [grid]
//! # one entry per axis, or one for all; box defaults to 2*pi
//! shape = 64
//! box = 2*pi
//!
//! [initial]
//! phi0 = sin(x1)
//! phi1 = 0
//!
//! [forcing]
//! f = cos(t)*sin(x1)
//!
//! [output]
//! # a list, or `start:stop:count`
//! times = 0.5, 1
//! formats = csv, binary
//! ```
//!
//! Coefficients and coordinates of `coeffs`, `roots` and `coeff=` are parsed
//! with the expression language, so `pi`, `sqrt(2)` and `1+2i` all work.

use std::path::Path;
use std::sync::Arc;

use ini::{Ini, Properties};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::field::{Field, Grid};
use crate::kernel::{CauchyProblem, Forcing};
use crate::symbol_poly::{CharacteristicSpec, Kind, SymbolPolynomial};

type C = Complex64;

/// Which artifacts `solve` writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub binary: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats {
            csv: true,
            binary: true,
        }
    }
}

/// A parsed problem file.
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub problem: CauchyProblem,
    pub formats: Formats,
    /// Source text of every initial field and of the forcing, for reports.
    pub phi_src: Vec<String>,
    pub forcing_src: Option<String>,
}

const SECTIONS: [(&str, &[&str]); 6] = [
    ("equation", &["kind", "m", "roots", "coeffs"]),
    ("operator", &["dim", "terms"]),
    ("grid", &["shape", "box"]),
    ("initial", &[]),
    ("forcing", &["f"]),
    ("output", &["times", "formats"]),
];

fn cfg_err(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

fn section<'a>(ini: &'a Ini, name: &str) -> Option<&'a Properties> {
    ini.section(Some(name))
}

fn required<'a>(ini: &'a Ini, sec: &str, key: &str) -> Result<&'a str> {
    section(ini, sec)
        .and_then(|p| p.get(key))
        .ok_or_else(|| cfg_err(&format!("{sec}.{key}"), "missing required key"))
}

fn optional<'a>(ini: &'a Ini, sec: &str, key: &str) -> Option<&'a str> {
    section(ini, sec).and_then(|p| p.get(key))
}

fn parse_usize(key: &str, s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| cfg_err(key, format!("expected a non-negative integer, got `{}`", s.trim())))
}

/// A constant expression (no coordinates, no time).
fn constant(key: &str, s: &str) -> Result<C> {
    let e = expr::parse(s, 0, false).map_err(|e| cfg_err(key, e))?;
    Ok(e.eval(&[], 0.0))
}

fn real_constant(key: &str, s: &str) -> Result<f64> {
    let z = constant(key, s)?;
    if z.im != 0.0 {
        return Err(cfg_err(key, format!("expected a real value, got {z}")));
    }
    Ok(z.re)
}

fn split_list(s: &str, sep: char) -> impl Iterator<Item = &str> {
    s.split(sep).map(str::trim).filter(|p| !p.is_empty())
}

/// `"re,im; re,im"`, where a lone entry is real.
fn complex_list(key: &str, s: &str) -> Result<Vec<C>> {
    split_list(s, ';')
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
            match parts.as_slice() {
                [z] => constant(key, z),
                [re, im] => Ok(C::new(real_constant(key, re)?, real_constant(key, im)?)),
                _ => Err(cfg_err(key, format!("`{pair}` is not a `re,im` pair"))),
            }
        })
        .collect()
}

fn parse_times(s: &str) -> Result<Vec<f64>> {
    let key = "output.times";
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    if let [a, b, n] = parts.as_slice() {
        let (a, b) = (real_constant(key, a)?, real_constant(key, b)?);
        let n = parse_usize(key, n)?;
        if n < 2 {
            return Err(cfg_err(key, "a range needs at least two points"));
        }
        return Ok((0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect());
    }
    let times: Vec<f64> = split_list(s, ',')
        .map(|t| real_constant(key, t))
        .collect::<Result<_>>()?;
    if times.is_empty() {
        return Err(cfg_err(key, "no output times"));
    }
    Ok(times)
}

fn parse_formats(s: &str) -> Result<Formats> {
    let mut f = Formats {
        csv: false,
        binary: false,
    };
    for name in split_list(s, ',') {
        match name {
            "csv" => f.csv = true,
            "binary" | "bin" => f.binary = true,
            other => return Err(cfg_err("output.formats", format!("unknown format `{other}`"))),
        }
    }
    Ok(f)
}

fn parse_terms(s: &str, dim: usize) -> Result<SymbolPolynomial> {
    let key = "operator.terms";
    if s.trim() == "laplacian" {
        return Ok(SymbolPolynomial::laplacian(dim));
    }
    let mut terms = Vec::new();
    for term in split_list(s, ';') {
        let (alpha, coeff) = term
            .split_once(':')
            .ok_or_else(|| cfg_err(key, format!("`{term}` lacks `alpha=..: coeff=..`")))?;
        let alpha = alpha
            .trim()
            .strip_prefix("alpha")
            .and_then(|r| r.trim_start().strip_prefix('='))
            .ok_or_else(|| cfg_err(key, format!("`{term}` must start with `alpha=`")))?;
        let coeff = coeff
            .trim()
            .strip_prefix("coeff")
            .and_then(|r| r.trim_start().strip_prefix('='))
            .ok_or_else(|| cfg_err(key, format!("`{term}` needs `coeff=`")))?;
        let alpha: Vec<u32> = split_list(alpha, ',')
            .map(|a| {
                a.parse()
                    .map_err(|_| cfg_err(key, format!("bad multi-index entry `{a}`")))
            })
            .collect::<Result<_>>()?;
        if alpha.len() != dim {
            return Err(cfg_err(
                key,
                format!("multi-index {alpha:?} has {} entries for dim = {dim}", alpha.len()),
            ));
        }
        terms.push((alpha, constant(key, coeff)?));
    }
    SymbolPolynomial::new(dim, terms).map_err(|e| cfg_err(key, e))
}

fn parse_spec(ini: &Ini) -> Result<CharacteristicSpec> {
    let kind: Kind = required(ini, "equation", "kind")?
        .parse()
        .map_err(|e| cfg_err("equation.kind", e))?;
    let m = parse_usize("equation.m", required(ini, "equation", "m")?)?;
    let roots = optional(ini, "equation", "roots");
    let coeffs = optional(ini, "equation", "coeffs");
    let spec = match (kind, roots, coeffs) {
        (Kind::RepeatedRoot, None, None) => {
            CharacteristicSpec::repeated(m).map_err(|e| cfg_err("equation.m", e))?
        }
        (Kind::RepeatedRoot, _, _) => {
            return Err(cfg_err(
                "equation.roots",
                "repeated-root equations take only `m`",
            ))
        }
        (_, Some(_), Some(_)) => {
            return Err(cfg_err("equation.roots", "give either `roots` or `coeffs`, not both"))
        }
        (_, Some(r), None) => {
            let roots = complex_list("equation.roots", r)?;
            if roots.len() != m {
                return Err(cfg_err(
                    "equation.roots",
                    format!("{} roots given for m = {m}", roots.len()),
                ));
            }
            CharacteristicSpec::from_roots(kind, &roots).map_err(|e| cfg_err("equation.roots", e))?
        }
        (_, None, Some(c)) => {
            let b = complex_list("equation.coeffs", c)?;
            if b.len() != m + 1 {
                return Err(cfg_err(
                    "equation.coeffs",
                    format!("{} coefficients given for m = {m} (need {})", b.len(), m + 1),
                ));
            }
            CharacteristicSpec::from_coeffs(kind, &b).map_err(|e| cfg_err("equation.coeffs", e))?
        }
        (_, None, None) => {
            return Err(cfg_err("equation.roots", "missing; give `roots` or `coeffs`"))
        }
    };
    Ok(spec)
}

fn parse_grid(ini: &Ini, dim: usize) -> Result<Grid> {
    let broadcast = |key: &str, v: Vec<_>| -> Result<Vec<_>> {
        match v.len() {
            1 => Ok(vec![v[0]; dim]),
            n if n == dim => Ok(v),
            n => Err(cfg_err(key, format!("{n} entries for dim = {dim}"))),
        }
    };
    let shape: Vec<usize> = split_list(required(ini, "grid", "shape")?, ',')
        .map(|s| parse_usize("grid.shape", s))
        .collect::<Result<_>>()?;
    let shape = broadcast("grid.shape", shape.into_iter().map(|n| n as f64).collect())?
        .into_iter()
        .map(|n| n as usize)
        .collect();
    let lengths = match optional(ini, "grid", "box") {
        Some(b) => broadcast(
            "grid.box",
            split_list(b, ',')
                .map(|s| real_constant("grid.box", s))
                .collect::<Result<_>>()?,
        )?,
        None => vec![std::f64::consts::TAU; dim],
    };
    Grid::new(shape, lengths).map_err(|e| cfg_err("grid", e))
}

fn check_keys(ini: &Ini) -> Result<()> {
    for (name, props) in ini.iter() {
        let Some(name) = name else {
            if let Some((k, _)) = props.iter().next() {
                return Err(cfg_err(k, "key outside of any section"));
            }
            continue;
        };
        let allowed = SECTIONS
            .iter()
            .find(|(s, _)| *s == name)
            .ok_or_else(|| cfg_err(&format!("[{name}]"), "unknown section"))?
            .1;
        for (k, _) in props.iter() {
            let ok = if name == "initial" {
                k.strip_prefix("phi").is_some_and(|r| r.parse::<usize>().is_ok())
            } else {
                allowed.contains(&k)
            };
            if !ok {
                return Err(cfg_err(&format!("{name}.{k}"), "unknown key"));
            }
        }
    }
    Ok(())
}

/// Parses problem-file text.
pub fn parse_problem(text: &str) -> Result<ProblemConfig> {
    let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    check_keys(&ini)?;
    let spec = parse_spec(&ini)?;
    let dim = parse_usize("operator.dim", required(&ini, "operator", "dim")?)?;
    if dim == 0 {
        return Err(cfg_err("operator.dim", "must be at least 1"));
    }
    let operator = parse_terms(required(&ini, "operator", "terms")?, dim)?;
    let grid = parse_grid(&ini, dim)?;

    let need = spec.initial_count();
    let mut phi = Vec::with_capacity(need);
    let mut phi_src = Vec::with_capacity(need);
    for r in 0..need {
        let key = format!("phi{r}");
        let src = optional(&ini, "initial", &key).ok_or_else(|| {
            cfg_err(
                &format!("initial.{key}"),
                format!("missing; {} with m = {} needs phi0..phi{}", spec.kind.name(), spec.m, need - 1),
            )
        })?;
        let e = expr::parse(src, dim, false).map_err(|e| cfg_err(&format!("initial.{key}"), e))?;
        phi.push(Field::from_fn(&grid, |x| e.eval(x, 0.0)));
        phi_src.push(src.to_string());
    }
    if let Some(props) = section(&ini, "initial") {
        if let Some((k, _)) = props
            .iter()
            .find(|(k, _)| k[3..].parse::<usize>().is_ok_and(|r| r >= need))
        {
            return Err(cfg_err(&format!("initial.{k}"), format!("only phi0..phi{} are used", need - 1)));
        }
    }

    let forcing_src = optional(&ini, "forcing", "f").map(str::to_string);
    let forcing: Option<Forcing> = match &forcing_src {
        Some(src) => {
            let e: Expr = expr::parse(src, dim, true).map_err(|e| cfg_err("forcing.f", e))?;
            Some(Arc::new(move |x: &[f64], t: f64| e.eval(x, t)))
        }
        None => None,
    };
    let times = parse_times(required(&ini, "output", "times")?)?;
    let formats = match optional(&ini, "output", "formats") {
        Some(s) => parse_formats(s)?,
        None => Formats::default(),
    };
    let problem = CauchyProblem {
        spec,
        operator,
        grid,
        phi,
        forcing,
        times,
    };
    problem.validate().map_err(|e| cfg_err("problem", e))?;
    Ok(ProblemConfig {
        problem,
        formats,
        phi_src,
        forcing_src,
    })
}

/// Reads and parses a problem file.
pub fn load_problem(path: &Path) -> Result<ProblemConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_problem(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAT: &str = "
[equation]
kind = first-order-product
m = 2
roots = 1,0; 2,0

[operator]
dim = 1
terms = alpha=2: coeff=1

[grid]
shape = 16

[initial]
phi0 = sin(x1)
phi1 = -3*sin(x1)

[output]
times = 0.5, 1
";

    #[test]
    fn heat_product_config() {
        let cfg = parse_problem(HEAT).unwrap();
        let p = &cfg.problem;
        assert_eq!(p.spec.kind, Kind::FirstOrderProduct);
        assert_eq!(p.spec.roots, vec![C::new(1.0, 0.0), C::new(2.0, 0.0)]);
        assert_eq!(p.grid.shape, vec![16]);
        assert!((p.grid.lengths[0] - std::f64::consts::TAU).abs() < 1e-15);
        assert_eq!(p.times, vec![0.5, 1.0]);
        assert!(p.forcing.is_none());
        assert_eq!(cfg.formats, Formats::default());
        let x = p.grid.point(3)[0];
        assert!((p.phi[1].data[3] - C::new(-3.0 * x.sin(), 0.0)).norm() < 1e-15);
        assert_eq!(p.operator, SymbolPolynomial::laplacian(1));
    }

    fn expect_key(text: &str, key: &str) {
        match parse_problem(text) {
            Err(Error::Config(msg)) => assert!(msg.contains(key), "`{msg}` lacks `{key}`"),
            other => panic!("expected config error naming {key}, got {other:?}"),
        }
    }

    #[test]
    fn missing_phi1() {
        expect_key(&HEAT.replace("phi1 = -3*sin(x1)\n", ""), "initial.phi1");
    }

    #[test]
    fn errors_name_their_keys() {
        expect_key(&HEAT.replace("m = 2", "m = 3"), "equation.roots");
        expect_key(&HEAT.replace("shape = 16", "shape = 16, 16"), "grid.shape");
        expect_key(&HEAT.replace("coeff=1", "coef=1"), "operator.terms");
        expect_key(&HEAT.replace("phi0 = sin(x1)", "phi0 = sin(x2)"), "initial.phi0");
        expect_key(&HEAT.replace("phi0 = sin(x1)", "phi0 = sin(t)"), "initial.phi0");
        expect_key(&HEAT.replace("times = 0.5, 1", "times = 1, 0.5"), "problem");
        expect_key(&HEAT.replace("[output]", "[output]\nformat = csv"), "output.format");
        expect_key(&format!("{HEAT}\n[extra]\na = 1\n"), "[extra]");
        expect_key(&format!("{HEAT}phi2 = 0\n").replace("[output]\ntimes = 0.5, 1\n", "") , "initial.phi2");
    }

    #[test]
    fn coeffs_ranges_and_forcing() {
        let text = "
[equation]
kind = even
m = 2
coeffs = 4; -5; 1
[operator]
dim = 2
terms = laplacian
[grid]
shape = 8, 4
box = 2*pi, pi
[initial]
phi0 = cos(x1)
phi1 = 0
phi2 = 0
phi3 = sin(2*x2)
[forcing]
f = exp(-t)*cos(x1+2*x2) + 1i
[output]
times = 0:1:5
formats = binary
";
        let cfg = parse_problem(text).unwrap();
        let p = &cfg.problem;
        assert_eq!(p.spec.kind, Kind::EvenOrderProduct);
        let mut r: Vec<f64> = p.spec.roots.iter().map(|z| z.re).collect();
        r.sort_by(f64::total_cmp);
        assert!((r[0] - 1.0).abs() < 1e-12 && (r[1] - 2.0).abs() < 1e-12);
        assert_eq!(p.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(cfg.formats, Formats { csv: false, binary: true });
        let f = p.forcing.as_ref().unwrap();
        assert!((f(&[0.0, 0.0], 0.0) - C::new(1.0, 1.0)).norm() < 1e-15);
        assert_eq!(cfg.forcing_src.as_deref(), Some("exp(-t)*cos(x1+2*x2) + 1i"));
    }

    #[test]
    fn repeated_root_takes_only_m() {
        let text = "
[equation]
kind = repeated-root
m = 2
[operator]
dim = 1
terms = laplacian
[grid]
shape = 8
[initial]
phi0 = sin(x1)
phi1 = 0
phi2 = 0
phi3 = 0
[output]
times = 1
";
        let cfg = parse_problem(text).unwrap();
        assert_eq!(cfg.problem.spec.kind, Kind::RepeatedRoot);
        expect_key(&text.replace("m = 2", "m = 2\nroots = 1,0; 1,0"), "equation.roots");
    }
}
