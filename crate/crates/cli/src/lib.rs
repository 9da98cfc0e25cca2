//! Library side of the `katufrac` command-line tool: problem files, the four
//! subcommands and their reports.

pub mod order;
pub mod problem;
pub mod report;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use katufrac::{check_all, picard_solve, BvpError, ConditionError, GridResolution};

use problem::{load_problem, Overrides};
use report::{
    CheckOutput, GridSummary, OrderOutput, ProblemSummary, SolveOutput, Staged, VerifyOutput,
};

pub const THREADS_ENV: &str = "KATUFRAC_THREADS";
pub const REPORT_FILE: &str = "report.json";
pub const SOLUTION_FILE: &str = "solution.csv";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    NanAbort(String),
    #[error("{0}")]
    VerifyFailed(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Output(_) => 1,
            CliError::NanAbort(_) => 2,
            CliError::VerifyFailed(_) => 3,
        }
    }

    pub(crate) fn output(e: impl std::fmt::Display) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<BvpError> for CliError {
    fn from(e: BvpError) -> Self {
        match e {
            BvpError::NanAbort { .. } => CliError::NanAbort(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<ConditionError> for CliError {
    fn from(e: ConditionError) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    Solve,
    Verify,
    Order,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub command: Command,
    pub problem: PathBuf,
    pub out: Option<PathBuf>,
    pub n: Option<usize>,
    pub tol: Option<f64>,
}

/// Caps the worker pool from the value of `KATUFRAC_THREADS`, if set.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else {
        return Ok(());
    };
    let threads: usize = v.trim().parse().ok().filter(|&t| t >= 1).ok_or_else(|| {
        CliError::Validation(format!(
            "{THREADS_ENV} must be a positive integer, got {v:?}"
        ))
    })?;
    katufrac::exec::init_thread_pool(threads);
    Ok(())
}

pub fn run(opts: &RunOptions, stdout: &mut dyn Write) -> Result<(), CliError> {
    let overrides = Overrides {
        n: opts.n,
        tol: opts.tol,
    };
    let problem = load_problem(&opts.problem, overrides)?;
    match opts.command {
        Command::Check => {
            let report = check_all(&problem.spec)?;
            let json = report::to_json(&CheckOutput::new(&problem.spec, &report))?;
            if let Some(dir) = &opts.out {
                let mut staged = Staged::new(dir)?;
                staged.add(REPORT_FILE, json.as_bytes())?;
                staged.commit()?;
            }
            writeln!(stdout, "{json}").map_err(CliError::output)
        }
        Command::Solve => {
            let r = picard_solve(&problem.spec, &problem.config)?;
            let conditions = check_all(&problem.spec)?;
            let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let mut staged = Staged::new(&dir)?;
            let csv = report::solution_csv(r.solution.grid().t_nodes(), r.solution.values())?;
            let csv_path = staged.add(SOLUTION_FILE, &csv)?;
            let out = SolveOutput::new(&problem.spec, &problem.config, &conditions, &r, &csv_path);
            let report_path = staged.add(REPORT_FILE, report::to_json(&out)?.as_bytes())?;
            staged.commit()?;
            write_solve_summary(stdout, &out, &report_path).map_err(CliError::output)
        }
        Command::Verify => {
            let n = opts.n.unwrap_or(verify::DEFAULT_VERIFY_N);
            let res = GridResolution::new(n, verify::VERIFY_GRADING)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let cases = verify::run_suite(&problem.spec, res)?;
            let out = VerifyOutput {
                command: "verify",
                problem: ProblemSummary::of(&problem.spec),
                grid: GridSummary {
                    n,
                    grading: verify::VERIFY_GRADING,
                },
                passed: cases.iter().all(|c| c.passed),
                cases,
            };
            write_optional_report(opts.out.as_deref(), &out)?;
            write_verify_table(stdout, &out).map_err(CliError::output)?;
            if out.passed {
                Ok(())
            } else {
                let failed = out.cases.iter().filter(|c| !c.passed).count();
                Err(CliError::VerifyFailed(format!(
                    "{failed} of {} oracle checks failed",
                    out.cases.len()
                )))
            }
        }
        Command::Order => {
            let exact = problem.manufactured.clone().ok_or_else(|| {
                CliError::Validation(
                    "order needs [manufactured] y_exact in the problem file".into(),
                )
            })?;
            let ns = order::ladder(opts.n.unwrap_or(order::DEFAULT_LADDER_END))?;
            let rows = order::study(&problem, &exact, &ns)?;
            let min_observed_order = rows
                .iter()
                .filter_map(|r| r.observed_order)
                .fold(None, |m: Option<f64>, o| Some(m.map_or(o, |m| m.min(o))));
            let out = OrderOutput {
                command: "order",
                problem: ProblemSummary::of(&problem.spec),
                grading: problem.config.resolution.grading(),
                y_exact: exact.to_string(),
                rows,
                min_observed_order,
            };
            write_optional_report(opts.out.as_deref(), &out)?;
            write_order_table(stdout, &out).map_err(CliError::output)
        }
    }
}

fn write_optional_report<T: serde::Serialize>(
    dir: Option<&Path>,
    value: &T,
) -> Result<(), CliError> {
    if let Some(dir) = dir {
        let mut staged = Staged::new(dir)?;
        staged.add(REPORT_FILE, report::to_json(value)?.as_bytes())?;
        staged.commit()?;
    }
    Ok(())
}

fn write_solve_summary(w: &mut dyn Write, out: &SolveOutput, report: &Path) -> std::io::Result<()> {
    let status = if out.converged {
        "converged"
    } else {
        "not converged"
    };
    writeln!(w, "{status} after {} iterations", out.iterations)?;
    if let Some(last) = out.residual_history.last() {
        writeln!(w, "final residual {last:.3e}")?;
    }
    writeln!(
        w,
        "anti-periodic residual {:.3e}",
        out.anti_periodic_residual
    )?;
    writeln!(
        w,
        "verdicts: th1 {}, th2 {}, th3 {}",
        out.verdicts.th1, out.verdicts.th2, out.verdicts.th3
    )?;
    for warning in &out.warnings {
        writeln!(w, "warning: {warning}")?;
    }
    writeln!(w, "solution: {}", out.solution_path)?;
    writeln!(w, "report: {}", report.display())
}

fn write_verify_table(w: &mut dyn Write, out: &VerifyOutput) -> std::io::Result<()> {
    let width = out.cases.iter().map(|c| c.name.len()).max().unwrap_or(0);
    writeln!(
        w,
        "{:<width$}  {:>10}  {:>8}  result",
        "check", "error", "tol"
    )?;
    for c in &out.cases {
        let result = if c.passed { "pass" } else { "FAIL" };
        writeln!(
            w,
            "{:<width$}  {:>10.3e}  {:>8.0e}  {result}",
            c.name, c.error, c.tolerance
        )?;
    }
    Ok(())
}

fn write_order_table(w: &mut dyn Write, out: &OrderOutput) -> std::io::Result<()> {
    writeln!(w, "{:>6}  {:>12}  {:>6}", "n", "sup-error", "order")?;
    for r in &out.rows {
        let order = r
            .observed_order
            .map_or("-".to_string(), |o| format!("{o:.3}"));
        writeln!(w, "{:>6}  {:>12.4e}  {order:>6}", r.n, r.sup_error)?;
    }
    Ok(())
}
