//! Problem files.
//!
//! ```toml
//! [problem]
//! alpha = 0.5
//! rho = 1
//! a = 0
//! b = 1
//! f = "0.25*y + 2*sqrt(t)/sqrt(pi) - 0.25*(t - 1/2)"
//!
//! [hypotheses]      # optional
//! lipschitz = 0.25
//!
//! [solver]          # optional
//! n = 1024
//!
//! [manufactured]    # optional, used by `order`
//! y_exact = "t - 1/2"
//! ```

use std::path::Path;

use katufrac::{Expr, GridResolution, HypothesisData, ProblemSpec, SolveConfig};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_N: usize = 1024;
pub const DEFAULT_GRADING: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    problem: ProblemTable,
    #[serde(default)]
    hypotheses: HypothesesTable,
    #[serde(default)]
    solver: SolverTable,
    manufactured: Option<ManufacturedTable>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemTable {
    alpha: f64,
    rho: f64,
    a: f64,
    b: f64,
    f: String,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct HypothesesTable {
    lipschitz: Option<f64>,
    eta: Option<String>,
    psi: Option<String>,
    q: Option<String>,
    delta: Option<String>,
    mu: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverTable {
    n: Option<usize>,
    grading: Option<f64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManufacturedTable {
    y_exact: String,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct LoadedProblem {
    pub spec: ProblemSpec,
    pub config: SolveConfig,
    /// Exact solution over `t`, when the file provides one.
    pub manufactured: Option<Expr>,
}

pub fn load_problem(path: &Path, overrides: Overrides) -> Result<LoadedProblem, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    parse_problem(&text, overrides)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn parse_problem(text: &str, overrides: Overrides) -> Result<LoadedProblem, String> {
    let file: ProblemFile = toml::from_str(text).map_err(|e| e.to_string())?;
    let p = &file.problem;
    let spec = ProblemSpec::parse(p.alpha, p.rho, p.a, p.b, &p.f).map_err(|e| e.to_string())?;

    let h = &file.hypotheses;
    let hypotheses = HypothesisData {
        lipschitz_l: h.lipschitz,
        eta: expr_field(&h.eta, "eta", "t")?,
        psi: expr_field(&h.psi, "psi", "u")?,
        q: expr_field(&h.q, "q", "t")?,
        delta_fn: expr_field(&h.delta, "delta", "t")?,
        mu: h.mu,
    };
    let spec = spec.with_hypotheses(hypotheses);

    let s = &file.solver;
    let n = overrides.n.or(s.n).unwrap_or(DEFAULT_N);
    let grading = s.grading.unwrap_or(DEFAULT_GRADING);
    let resolution = GridResolution::new(n, grading).map_err(|e| format!("solver: {e}"))?;
    let tol = overrides.tol.or(s.tol).unwrap_or(DEFAULT_TOL);
    let max_iter = s.max_iter.unwrap_or(DEFAULT_MAX_ITER);
    let config = SolveConfig::new(resolution, tol, max_iter).map_err(|e| format!("solver: {e}"))?;

    let manufactured = match &file.manufactured {
        Some(m) => Some(parse_expr(&m.y_exact, "y_exact", "t")?),
        None => None,
    };
    Ok(LoadedProblem {
        spec,
        config,
        manufactured,
    })
}

fn parse_expr(src: &str, name: &str, var: &str) -> Result<Expr, String> {
    Expr::parse(src, &[var]).map_err(|e| format!("{e} in {name}"))
}

fn expr_field(src: &Option<String>, name: &str, var: &str) -> Result<Option<Expr>, String> {
    src.as_deref().map(|s| parse_expr(s, name, var)).transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[problem]\nalpha = 0.5\nrho = 1\na = 0\nb = 1\nf = \"0\"\n";

    #[test]
    fn minimal_file_gets_defaults() {
        let p = parse_problem(MINIMAL, Overrides::default()).unwrap();
        assert_eq!(p.config.resolution.n(), DEFAULT_N);
        assert_eq!(p.config.resolution.grading(), DEFAULT_GRADING);
        assert_eq!(p.config.tol, DEFAULT_TOL);
        assert_eq!(p.config.max_iter, DEFAULT_MAX_ITER);
        assert!(p.manufactured.is_none());
        assert!(p.spec.hypotheses.lipschitz_l.is_none());
    }

    #[test]
    fn overrides_win() {
        let text = format!("{MINIMAL}[solver]\nn = 64\ntol = 1e-6\n");
        let p = parse_problem(
            &text,
            Overrides {
                n: Some(32),
                tol: None,
            },
        )
        .unwrap();
        assert_eq!(p.config.resolution.n(), 32);
        assert_eq!(p.config.tol, 1e-6);
        let p = parse_problem(
            &text,
            Overrides {
                n: None,
                tol: Some(1e-8),
            },
        )
        .unwrap();
        assert_eq!(p.config.resolution.n(), 64);
        assert_eq!(p.config.tol, 1e-8);
    }

    #[test]
    fn rejects_bad_alpha() {
        let err = parse_problem(&MINIMAL.replace("0.5", "1.2"), Overrides::default()).unwrap_err();
        assert!(err.contains("alpha must lie in (0,1)"), "{err}");
    }

    #[test]
    fn rejects_unknown_identifier() {
        let err = parse_problem(
            &MINIMAL.replace("\"0\"", "\"sin(z)\""),
            Overrides::default(),
        )
        .unwrap_err();
        assert!(err.contains("unknown identifier z in f"), "{err}");
        let text = format!("{MINIMAL}[hypotheses]\npsi = \"t\"\n");
        let err = parse_problem(&text, Overrides::default()).unwrap_err();
        assert!(err.contains("unknown identifier t in psi"), "{err}");
    }

    #[test]
    fn reports_line_of_toml_errors() {
        let err =
            parse_problem("[problem]\nalpha = 0.5\nrho = \n", Overrides::default()).unwrap_err();
        assert!(err.contains("line 3"), "{err}");
        let err = parse_problem("[problem]\nalpha = 0.5\n", Overrides::default()).unwrap_err();
        assert!(err.contains("missing field"), "{err}");
        let err =
            parse_problem(&format!("{MINIMAL}extra = 1\n"), Overrides::default()).unwrap_err();
        assert!(err.contains("unknown field"), "{err}");
    }

    #[test]
    fn rejects_bad_solver_values() {
        for bad in ["n = 1", "grading = 7.0", "tol = 1e-16", "max_iter = 0"] {
            let text = format!("{MINIMAL}[solver]\n{bad}\n");
            assert!(parse_problem(&text, Overrides::default()).is_err(), "{bad}");
        }
    }
}
