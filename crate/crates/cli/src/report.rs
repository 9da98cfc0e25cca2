//! JSON reports and CSV solution tables.

use std::io::Write;
use std::path::{Path, PathBuf};

use katufrac::{ConditionReport, ProblemSpec, SolveConfig, SolveReport, Verdict};
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct ProblemSummary {
    pub alpha: f64,
    pub rho: f64,
    pub a: f64,
    pub b: f64,
    pub f: String,
}

impl ProblemSummary {
    pub fn of(spec: &ProblemSpec) -> Self {
        ProblemSummary {
            alpha: spec.params.alpha(),
            rho: spec.params.rho(),
            a: spec.interval.a(),
            b: spec.interval.b(),
            f: spec.f.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdicts {
    pub th1: &'static str,
    pub th2: &'static str,
    pub th3: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictReasons {
    pub th1: String,
    pub th2: String,
    pub th3: String,
}

fn verdicts(c: &ConditionReport) -> (Verdicts, VerdictReasons) {
    let s = |v: &Verdict| v.status.as_str();
    (
        Verdicts {
            th1: s(&c.th1),
            th2: s(&c.th2),
            th3: s(&c.th3),
        },
        VerdictReasons {
            th1: c.th1.reason.clone(),
            th2: c.th2.reason.clone(),
            th3: c.th3.reason.clone(),
        },
    )
}

/// Output of `check`.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutput {
    pub command: &'static str,
    pub problem: ProblemSummary,
    pub n_constant: f64,
    pub lambda_constant: Option<f64>,
    pub ln_product: Option<f64>,
    pub m_found: Option<f64>,
    pub r_ball: Option<f64>,
    pub r0_ball: Option<f64>,
    pub mu: f64,
    pub verdicts: Verdicts,
    pub verdict_reasons: VerdictReasons,
}

impl CheckOutput {
    pub fn new(spec: &ProblemSpec, c: &ConditionReport) -> Self {
        let (verdicts, verdict_reasons) = verdicts(c);
        CheckOutput {
            command: "check",
            problem: ProblemSummary::of(spec),
            n_constant: c.n_constant,
            lambda_constant: c.lambda_constant,
            ln_product: c.ln_product,
            m_found: c.m_found,
            r_ball: c.r_ball,
            r0_ball: c.r0_ball,
            mu: c.mu,
            verdicts,
            verdict_reasons,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridSummary {
    pub n: usize,
    pub grading: f64,
}

/// Output of `solve`.
#[derive(Clone, Debug, Serialize)]
pub struct SolveOutput {
    pub command: &'static str,
    pub problem: ProblemSummary,
    pub grid: GridSummary,
    pub tol: f64,
    pub max_iter: usize,
    pub n_constant: f64,
    pub lambda_constant: Option<f64>,
    pub ln_product: Option<f64>,
    pub verdicts: Verdicts,
    pub verdict_reasons: VerdictReasons,
    pub converged: bool,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub contraction_estimates: Vec<f64>,
    pub anti_periodic_residual: f64,
    pub warnings: Vec<String>,
    pub solution_path: String,
}

impl SolveOutput {
    pub fn new(
        spec: &ProblemSpec,
        cfg: &SolveConfig,
        c: &ConditionReport,
        r: &SolveReport,
        solution_path: &Path,
    ) -> Self {
        let (verdicts, verdict_reasons) = verdicts(c);
        SolveOutput {
            command: "solve",
            problem: ProblemSummary::of(spec),
            grid: GridSummary {
                n: cfg.resolution.n(),
                grading: cfg.resolution.grading(),
            },
            tol: cfg.tol,
            max_iter: cfg.max_iter,
            n_constant: c.n_constant,
            lambda_constant: c.lambda_constant,
            ln_product: c.ln_product,
            verdicts,
            verdict_reasons,
            converged: r.converged,
            iterations: r.iterations,
            residual_history: r.residual_history.clone(),
            contraction_estimates: r.contraction_estimates.clone(),
            anti_periodic_residual: r.anti_periodic_residual,
            warnings: r.warnings.clone(),
            solution_path: solution_path.display().to_string(),
        }
    }
}

/// One line of the `verify` table.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyCase {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyOutput {
    pub command: &'static str,
    pub problem: ProblemSummary,
    pub grid: GridSummary,
    pub cases: Vec<VerifyCase>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderRow {
    pub n: usize,
    pub sup_error: f64,
    pub observed_order: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderOutput {
    pub command: &'static str,
    pub problem: ProblemSummary,
    pub grading: f64,
    pub y_exact: String,
    pub rows: Vec<OrderRow>,
    pub min_observed_order: Option<f64>,
}

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn solution_csv(t: &[f64], y: &[f64]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "y"]).map_err(CliError::output)?;
    for (t, y) in t.iter().zip(y) {
        w.write_record([format_value(*t), format_value(*y)])
            .map_err(CliError::output)?;
    }
    w.into_inner().map_err(|e| CliError::output(e.into_error()))
}

/// Reads a `t,y` table written by [`solution_csv`].
pub fn read_solution_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut r = csv::Reader::from_path(path).map_err(CliError::output)?;
    let header = r.headers().map_err(CliError::output)?;
    if header != vec!["t", "y"] {
        return Err(CliError::Validation(format!(
            "{}: expected header t,y",
            path.display()
        )));
    }
    let (mut t, mut y) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(CliError::output)?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
        };
        t.push(parse(&rec[0])?);
        y.push(parse(&rec[1])?);
    }
    Ok((t, y))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(CliError::output)
}

/// Files staged in `dir` and renamed into place together by [`Staged::commit`];
/// dropping without committing removes them.
pub struct Staged {
    dir: PathBuf,
    files: Vec<(tempfile::NamedTempFile, PathBuf)>,
}

impl Staged {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(CliError::output)?;
        Ok(Staged {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn add(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(CliError::output)?;
        tmp.write_all(bytes).map_err(CliError::output)?;
        tmp.as_file().sync_all().map_err(CliError::output)?;
        let target = self.dir.join(name);
        self.files.push((tmp, target.clone()));
        Ok(target)
    }

    pub fn commit(self) -> Result<(), CliError> {
        for (tmp, target) in self.files {
            tmp.persist(&target)
                .map_err(|e| CliError::output(e.error))?;
        }
        Ok(())
    }
}
