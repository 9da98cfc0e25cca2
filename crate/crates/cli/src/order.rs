//! Grid-refinement study against a manufactured solution.

use katufrac::{picard_solve, Expr, GridResolution, RealFunction};

use crate::problem::LoadedProblem;
use crate::report::OrderRow;
use crate::CliError;

pub const LADDER_START: usize = 64;
pub const DEFAULT_LADDER_END: usize = 4096;

/// `64, 128, ...` up to and including `end`.
pub fn ladder(end: usize) -> Result<Vec<usize>, CliError> {
    if end < 2 * LADDER_START {
        return Err(CliError::Validation(format!(
            "order needs n >= {}, got {end}",
            2 * LADDER_START
        )));
    }
    Ok(std::iter::successors(Some(LADDER_START), |n| Some(n * 2))
        .take_while(|&n| n <= end)
        .collect())
}

pub fn study(
    problem: &LoadedProblem,
    exact: &Expr,
    ns: &[usize],
) -> Result<Vec<OrderRow>, CliError> {
    let exact = RealFunction::Expr(exact.clone());
    let grading = problem.config.resolution.grading();
    let mut rows: Vec<OrderRow> = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut cfg = problem.config.clone();
        cfg.resolution =
            GridResolution::new(n, grading).map_err(|e| CliError::Validation(e.to_string()))?;
        let r = picard_solve(&problem.spec, &cfg)?;
        let want = exact
            .sample(r.solution.grid().t_nodes())
            .map_err(|e| CliError::Validation(format!("y_exact: {e}")))?
            .value;
        let err = r
            .solution
            .values()
            .iter()
            .zip(&want)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let observed_order = rows.last().map(|prev| (prev.sup_error / err).log2());
        rows.push(OrderRow {
            n,
            sup_error: err,
            observed_order,
            iterations: r.iterations,
            converged: r.converged,
        });
    }
    Ok(rows)
}
