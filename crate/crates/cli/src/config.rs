//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use lane_emden::bounds::Recipe;
use lane_emden::{validate_exponents, DomainKind, ExponentSet, ScalarSolveConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaMode {
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartMode {
    /// Lower corner, or the upper one when the lower fields vanish on the boundary.
    Auto,
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub domain: DomainKind,
    pub extents: Vec<f64>,
    pub nodes: Vec<usize>,
    /// Ladder length for the boundedness check.
    pub levels: usize,
    pub exponents: ExponentSet,
    pub recipe: Recipe,
    pub lambda: LambdaMode,
    pub tol_res: f64,
    pub eps_grad: f64,
    pub max_inner: usize,
    pub damping: f64,
    pub tol_outer: f64,
    pub max_outer: usize,
    pub relaxation: f64,
    pub start: StartMode,
    /// Singular exponent for the boundedness check; defaults to the most
    /// negative coupling exponent.
    pub gamma: Option<f64>,
    pub output: Option<PathBuf>,
    pub eigen_restarts: usize,
}

const KEYS: &[&str] = &[
    "domain", "extents", "nodes", "levels", "p1", "p2", "alpha1", "beta1", "alpha2", "beta2", "recipe",
    "lambda", "tol_res", "eps_grad", "max_inner", "damping", "tol_outer", "max_outer", "relaxation", "start",
    "gamma", "output", "eigen_restarts",
];

const REQUIRED: &[&str] = &["domain", "p1", "p2", "alpha1", "beta1", "alpha2", "beta2"];

fn key_err(key: &str, msg: impl Into<String>) -> CliError {
    CliError::Key { key: key.to_string(), msg: msg.into() }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = v.parse().map_err(|_| key_err(key, format!("expected a number, got {v:?}")))?;
    if !x.is_finite() {
        return Err(key_err(key, format!("expected a finite number, got {v:?}")));
    }
    Ok(x)
}

fn parse_usize(key: &str, v: &str) -> Result<usize, CliError> {
    v.parse().map_err(|_| key_err(key, format!("expected a nonnegative integer, got {v:?}")))
}

fn parse_list<T>(key: &str, v: &str, item: impl Fn(&str, &str) -> Result<T, CliError>) -> Result<Vec<T>, CliError> {
    v.split(',').map(|s| item(key, s.trim())).collect()
}

impl RunConfig {
    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn inner(&self) -> ScalarSolveConfig {
        ScalarSolveConfig {
            eps_grad: self.eps_grad,
            tol_res: self.tol_res,
            max_inner_iterations: self.max_inner,
            damping: self.damping,
        }
    }

    /// Canonical text form: every key in a fixed order, defaults included.
    pub fn to_canonical_string(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        let mut s = String::new();
        let domain = match self.domain {
            DomainKind::Interval => "interval",
            DomainKind::Rectangle => "rectangle",
        };
        let e = &self.exponents;
        let _ = writeln!(s, "domain = {domain}");
        let _ = writeln!(s, "extents = {}", join(self.extents.iter().map(|x| format!("{x:?}")).collect()));
        let _ = writeln!(s, "nodes = {}", join(self.nodes.iter().map(|x| x.to_string()).collect()));
        let _ = writeln!(s, "levels = {}", self.levels);
        for (k, v) in [
            ("p1", e.p1),
            ("p2", e.p2),
            ("alpha1", e.alpha1),
            ("beta1", e.beta1),
            ("alpha2", e.alpha2),
            ("beta2", e.beta2),
        ] {
            let _ = writeln!(s, "{k} = {v:?}");
        }
        let _ = writeln!(s, "recipe = {}", self.recipe);
        match self.lambda {
            LambdaMode::Auto => {
                let _ = writeln!(s, "lambda = auto");
            }
            LambdaMode::Value(x) => {
                let _ = writeln!(s, "lambda = {x:?}");
            }
        }
        let _ = writeln!(s, "tol_res = {:?}", self.tol_res);
        let _ = writeln!(s, "eps_grad = {:?}", self.eps_grad);
        let _ = writeln!(s, "max_inner = {}", self.max_inner);
        let _ = writeln!(s, "damping = {:?}", self.damping);
        let _ = writeln!(s, "tol_outer = {:?}", self.tol_outer);
        let _ = writeln!(s, "max_outer = {}", self.max_outer);
        let _ = writeln!(s, "relaxation = {:?}", self.relaxation);
        let start = match self.start {
            StartMode::Auto => "auto",
            StartMode::Lower => "lower",
            StartMode::Upper => "upper",
        };
        let _ = writeln!(s, "start = {start}");
        if let Some(g) = self.gamma {
            let _ = writeln!(s, "gamma = {g:?}");
        }
        if let Some(o) = &self.output {
            let _ = writeln!(s, "output = {}", o.display());
        }
        let _ = writeln!(s, "eigen_restarts = {}", self.eigen_restarts);
        s
    }
}

/// Parses and validates a configuration. Unknown and repeated keys are
/// rejected; omitted optional keys take their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Syntax { line: i + 1, msg: format!("expected `key = value`, got {line:?}") });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(CliError::Syntax { line: i + 1, msg: format!("invalid key {k:?}") });
        }
        if v.is_empty() {
            return Err(CliError::Syntax { line: i + 1, msg: format!("missing value for {k:?}") });
        }
        if !KEYS.contains(&k) {
            return Err(CliError::Syntax { line: i + 1, msg: format!("unknown key {k:?}") });
        }
        if pairs.iter().any(|(x, _)| x == k) {
            return Err(CliError::Syntax { line: i + 1, msg: format!("key {k:?} given twice") });
        }
        pairs.push((k.to_string(), v.to_string()));
    }
    let get = |k: &str| pairs.iter().find(|(x, _)| x == k).map(|(_, v)| v.as_str());
    for k in REQUIRED {
        if get(k).is_none() {
            return Err(key_err(k, "required key is missing"));
        }
    }

    let domain = match get("domain").unwrap().to_ascii_lowercase().as_str() {
        "interval" => DomainKind::Interval,
        "rectangle" => DomainKind::Rectangle,
        other => return Err(key_err("domain", format!("expected interval or rectangle, got {other:?}"))),
    };
    let dim = domain.dimension();
    let extents = match get("extents") {
        Some(v) => parse_list("extents", v, parse_f64)?,
        None => [0.0, 1.0].repeat(dim),
    };
    if extents.len() != 2 * dim {
        return Err(key_err("extents", format!("{domain:?} needs {} values, got {}", 2 * dim, extents.len())));
    }
    if extents.chunks(2).any(|c| !(c[0] < c[1])) {
        return Err(key_err("extents", "each axis needs lower < upper"));
    }
    let nodes = match get("nodes") {
        Some(v) => parse_list("nodes", v, parse_usize)?,
        None => vec![if dim == 1 { 65 } else { 33 }; dim],
    };
    if nodes.len() != dim {
        return Err(key_err("nodes", format!("{domain:?} needs {dim} node counts, got {}", nodes.len())));
    }
    if nodes.iter().any(|&n| n < 3) {
        return Err(key_err("nodes", "every axis needs at least 3 nodes"));
    }
    let num = |k: &str, default: f64| get(k).map_or(Ok(default), |v| parse_f64(k, v));
    let int = |k: &str, default: usize| get(k).map_or(Ok(default), |v| parse_usize(k, v));

    let exponents = ExponentSet::new(
        num("p1", f64::NAN)?,
        num("p2", f64::NAN)?,
        num("alpha1", f64::NAN)?,
        num("beta1", f64::NAN)?,
        num("alpha2", f64::NAN)?,
        num("beta2", f64::NAN)?,
    );
    for (k, p) in [("p1", exponents.p1), ("p2", exponents.p2)] {
        if !(p > 1.0) {
            return Err(key_err(k, format!("must exceed 1, got {p}")));
        }
    }
    let report = validate_exponents(&exponents, dim);
    if let Some(c) = report.failures().first() {
        let key = ["alpha1", "beta1", "alpha2", "beta2"]
            .into_iter()
            .find(|k| c.name.contains(k))
            .unwrap_or("exponents");
        return Err(key_err(
            key,
            format!("{} outside the singular regime, which requires {}", c.value, c.name),
        ));
    }

    let recipe = match get("recipe") {
        Some(v) => v.parse::<Recipe>().map_err(|_| key_err("recipe", format!("expected T1, T3, T5 or T9, got {v:?}")))?,
        None => Recipe::T1,
    };
    let lambda = match get("lambda") {
        None => LambdaMode::Auto,
        Some(v) if v.eq_ignore_ascii_case("auto") => LambdaMode::Auto,
        Some(v) => {
            let x = parse_f64("lambda", v)?;
            if !(x > 0.0) {
                return Err(key_err("lambda", format!("must be positive, got {x}")));
            }
            LambdaMode::Value(x)
        }
    };
    let start = match get("start").map(|s| s.to_ascii_lowercase()) {
        None => StartMode::Auto,
        Some(s) => match s.as_str() {
            "auto" => StartMode::Auto,
            "lower" => StartMode::Lower,
            "upper" => StartMode::Upper,
            _ => return Err(key_err("start", format!("expected auto, lower or upper, got {s:?}"))),
        },
    };
    let gamma = get("gamma").map(|v| parse_f64("gamma", v)).transpose()?;
    if let Some(g) = gamma {
        if !(g > -1.0 && g <= 0.0) {
            return Err(key_err("gamma", format!("must lie in (-1, 0], got {g}")));
        }
    }

    let cfg = RunConfig {
        domain,
        extents,
        nodes,
        levels: int("levels", 3)?,
        exponents,
        recipe,
        lambda,
        tol_res: num("tol_res", 1e-9)?,
        eps_grad: num("eps_grad", 1e-8)?,
        max_inner: int("max_inner", 100)?,
        damping: num("damping", 1.0)?,
        tol_outer: num("tol_outer", 1e-8)?,
        max_outer: int("max_outer", 500)?,
        relaxation: num("relaxation", 1.0)?,
        start,
        gamma,
        output: get("output").map(PathBuf::from),
        eigen_restarts: int("eigen_restarts", 0)?,
    };
    let positive = [("tol_res", cfg.tol_res), ("tol_outer", cfg.tol_outer)];
    for (k, x) in positive {
        if !(x > 0.0) {
            return Err(key_err(k, format!("must be positive, got {x}")));
        }
    }
    if !(cfg.eps_grad >= 0.0) {
        return Err(key_err("eps_grad", format!("must be nonnegative, got {}", cfg.eps_grad)));
    }
    for (k, x) in [("damping", cfg.damping), ("relaxation", cfg.relaxation)] {
        if !(x > 0.0 && x <= 1.0) {
            return Err(key_err(k, format!("must lie in (0, 1], got {x}")));
        }
    }
    for (k, x) in [("max_inner", cfg.max_inner), ("max_outer", cfg.max_outer)] {
        if x == 0 {
            return Err(key_err(k, "must be at least 1"));
        }
    }
    if cfg.levels < 3 {
        return Err(key_err("levels", format!("needs at least 3 levels, got {}", cfg.levels)));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "domain = interval\np1 = 2\np2 = 2\nalpha1 = -0.5\nbeta1 = -0.5\nalpha2 = -0.5\nbeta2 = -0.5\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.recipe, Recipe::T1);
        assert_eq!(c.lambda, LambdaMode::Auto);
        assert_eq!(c.extents, vec![0.0, 1.0]);
        assert_eq!(c.nodes, vec![65]);
        assert_eq!(c.tol_outer, 1e-8);
    }

    #[test]
    fn canonical_round_trip() {
        let text = format!("{MINIMAL}# comment\nrecipe = t3 # trailing\nlambda = 12.5\ngamma = -0.3\nextents = 0, 2\n");
        let a = parse_config(&text).unwrap();
        let b = parse_config(&a.to_canonical_string()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_canonical_string(), b.to_canonical_string());
    }

    #[test]
    fn rejects_bad_input() {
        let err = parse_config(&MINIMAL.replace("alpha1 = -0.5", "alpha1 = -1.5")).unwrap_err();
        assert!(matches!(&err, CliError::Key { key, .. } if key == "alpha1"), "{err}");
        let err = parse_config(&format!("{MINIMAL}colour = red\n")).unwrap_err();
        assert!(matches!(err, CliError::Syntax { line: 8, .. }));
        let err = parse_config(&format!("{MINIMAL}just words\n")).unwrap_err();
        assert!(matches!(err, CliError::Syntax { line: 8, .. }));
        let err = parse_config("domain = interval\n").unwrap_err();
        assert!(matches!(err, CliError::Key { .. }));
        let err = parse_config(&format!("{MINIMAL}p1 = 3\n")).unwrap_err();
        assert!(matches!(err, CliError::Syntax { .. }));
        let err = parse_config(&format!("{MINIMAL}nodes = 2\n")).unwrap_err();
        assert!(matches!(&err, CliError::Key { key, .. } if key == "nodes"));
    }
}
