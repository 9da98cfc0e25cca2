//! Anti-periodic boundary value problem
//!
//! ```text
//!   cD^{alpha;rho}_{a+} y(t) = f(t, y(t)),   y(a) + y(b) = 0.
//! ```
//!
//! Its solutions are the fixed points of
//!
//! ```text
//!   (Ty)(t) = c0 + I^{alpha;rho} g(t),   c0 = -1/2 I^{alpha;rho} g(b),   g(s) = f(s, y(s)),
//! ```
//!
//! which is evaluated on a grid with one shared weight table, so the
//! anti-periodic condition holds to round-off for every iterate.

use std::sync::Arc;

use thiserror::Error;

use crate::conditions::{banach_constant, HypothesisData};
use crate::exec::Execution;
use crate::expr::{Bindings, Expr};
use crate::operators::{
    ck_derivative_nodes, Interval, OperatorError, OperatorParams, RealFunction,
};
use crate::quadrature::{
    build_grid, singular_weights, DiscreteFunction, Grid, GridResolution, WeightTable,
};
use crate::Flagged;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum BvpError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("{}f(t, y) is NaN at node {node} (t = {t}, y = {y}){}",
        .iteration.map(|k| format!("iteration {k}: ")).unwrap_or_default(),
        .detail.as_ref().map(|d| format!(": {d}")).unwrap_or_default())]
    NanAbort {
        iteration: Option<usize>,
        node: usize,
        t: f64,
        y: f64,
        detail: Option<String>,
    },
}

impl BvpError {
    fn at_iteration(self, k: usize) -> Self {
        match self {
            BvpError::NanAbort {
                node, t, y, detail, ..
            } => BvpError::NanAbort {
                iteration: Some(k),
                node,
                t,
                y,
                detail,
            },
            other => other,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub params: OperatorParams,
    pub interval: Interval,
    /// Right-hand side over the variables `t` and `y`.
    pub f: Expr,
    pub hypotheses: HypothesisData,
}

impl ProblemSpec {
    pub fn new(
        params: OperatorParams,
        interval: Interval,
        f: Expr,
        hypotheses: HypothesisData,
    ) -> Result<Self, BvpError> {
        if let Some(v) = f.variables().into_iter().find(|v| *v != "t" && *v != "y") {
            return Err(BvpError::InvalidProblem(format!(
                "f may only use t and y, found {v}"
            )));
        }
        Ok(ProblemSpec {
            params,
            interval,
            f,
            hypotheses,
        })
    }

    /// Parses `f` over `{t, y}`; no hypothesis data.
    pub fn parse(alpha: f64, rho: f64, a: f64, b: f64, f: &str) -> Result<Self, BvpError> {
        let params = OperatorParams::new(alpha, rho)?;
        let interval = Interval::new(a, b)?;
        let f = Expr::parse(f, &["t", "y"])
            .map_err(|e| BvpError::InvalidProblem(format!("{e} in f")))?;
        ProblemSpec::new(params, interval, f, HypothesisData::default())
    }

    pub fn with_hypotheses(mut self, hypotheses: HypothesisData) -> Self {
        self.hypotheses = hypotheses;
        self
    }

    /// `L * N` when a Lipschitz constant is supplied.
    pub fn lipschitz_product(&self) -> Option<f64> {
        self.hypotheses
            .lipschitz_l
            .map(|l| l * banach_constant(self.params, self.interval))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialGuess {
    Constant(f64),
    /// Expression over `t`.
    Expr(Expr),
    /// Values at the grid nodes.
    Values(Vec<f64>),
}

impl Default for InitialGuess {
    fn default() -> Self {
        InitialGuess::Constant(0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub resolution: GridResolution,
    pub tol: f64,
    pub max_iter: usize,
    pub y0: InitialGuess,
    pub execution: Execution,
}

impl SolveConfig {
    pub const DEFAULT_N: usize = 1024;
    pub const DEFAULT_TOL: f64 = 1e-10;
    pub const DEFAULT_MAX_ITER: usize = 200;
    pub const MIN_TOL: f64 = 1e-14;
    pub const MAX_ITER_CAP: usize = 100_000;

    pub fn new(resolution: GridResolution, tol: f64, max_iter: usize) -> Result<Self, BvpError> {
        let cfg = SolveConfig {
            resolution,
            tol,
            max_iter,
            y0: InitialGuess::default(),
            execution: Execution::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), BvpError> {
        if !(self.tol >= Self::MIN_TOL) || !self.tol.is_finite() {
            return Err(BvpError::InvalidConfig(format!(
                "tol must be at least {:e}, got {}",
                Self::MIN_TOL,
                self.tol
            )));
        }
        if self.max_iter == 0 || self.max_iter > Self::MAX_ITER_CAP {
            return Err(BvpError::InvalidConfig(format!(
                "max_iter must lie in [1, {}], got {}",
                Self::MAX_ITER_CAP,
                self.max_iter
            )));
        }
        Ok(())
    }

    pub fn with_initial_guess(mut self, y0: InitialGuess) -> Self {
        self.y0 = y0;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            resolution: GridResolution::uniform(Self::DEFAULT_N).expect("default resolution"),
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
            y0: InitialGuess::default(),
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: DiscreteFunction,
    pub iterations: usize,
    /// `‖y_{k+1} - y_k‖_∞` for every step.
    pub residual_history: Vec<f64>,
    /// Ratios of successive residuals.
    pub contraction_estimates: Vec<f64>,
    pub anti_periodic_residual: f64,
    pub converged: bool,
    /// `L * N` when a Lipschitz constant was supplied.
    pub lipschitz_product: Option<f64>,
    pub warnings: Vec<String>,
}

/// The operator `T` on a fixed grid, with its weight table cached.
#[derive(Clone, Debug)]
pub struct SolutionOperator {
    f: Expr,
    grid: Arc<Grid>,
    table: WeightTable,
    exec: Execution,
}

impl SolutionOperator {
    pub fn new(spec: &ProblemSpec, res: GridResolution, exec: Execution) -> Result<Self, BvpError> {
        let grid = Arc::new(build_grid(spec.interval, spec.params, res));
        Self::on_grid(spec, grid, exec)
    }

    pub fn on_grid(spec: &ProblemSpec, grid: Arc<Grid>, exec: Execution) -> Result<Self, BvpError> {
        if grid.interval() != spec.interval || grid.params() != spec.params {
            return Err(BvpError::InvalidProblem(
                "grid does not match the problem's interval and parameters".into(),
            ));
        }
        let table = WeightTable::build_with(&grid, spec.params.alpha(), exec)?;
        Ok(SolutionOperator {
            f: spec.f.clone(),
            grid,
            table,
            exec,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn table(&self) -> &WeightTable {
        &self.table
    }

    /// `c0 + I^{alpha;rho} g` at every node for forcing samples `g`.
    pub fn linear(&self, g: &[f64]) -> Vec<f64> {
        let mut y = self.table.integrate_all_with(g, self.exec);
        let c0 = -0.5 * y[self.grid.n()];
        y.iter_mut().for_each(|v| *v += c0);
        y
    }

    /// `f(t_j, y_j)` at every node; aborts on the first NaN.
    pub fn forcing(&self, y: &[f64]) -> Result<Vec<f64>, BvpError> {
        let t = self.grid.t_nodes();
        self.exec.try_map_range(0..t.len(), |j| {
            let b = Bindings::new().with("t", t[j]).with("y", y[j]);
            let r = self.f.eval(&b).map_err(OperatorError::from)?;
            if r.value.is_nan() {
                return Err(BvpError::NanAbort {
                    iteration: None,
                    node: j,
                    t: t[j],
                    y: y[j],
                    detail: r.warning,
                });
            }
            Ok(r.value)
        })
    }

    /// `(Ty)` at every node.
    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>, BvpError> {
        if y.len() != self.grid.n() + 1 {
            return Err(OperatorError::GridMismatch(format!(
                "expected {} values, got {}",
                self.grid.n() + 1,
                y.len()
            ))
            .into());
        }
        Ok(self.linear(&self.forcing(y)?))
    }
}

/// `c0 = -1/2 * rho^{-alpha}/Gamma(alpha) ∫ (b^rho - u)^{alpha-1} ĝ(u) du`, the
/// constant that enforces `y(a) + y(b) = 0`.
pub fn c0_coefficient(g: &DiscreteFunction, alpha: f64) -> Result<f64, BvpError> {
    let grid = g.grid();
    let w = singular_weights(grid, grid.n(), alpha)?;
    let full: f64 = w.iter().zip(g.values()).map(|(w, v)| w * v).sum();
    Ok(-0.5 * full)
}

/// Solution of the linear problem `cD^{alpha;rho} y = g`, `y(a) + y(b) = 0`.
pub fn solve_linear(
    g: &RealFunction,
    p: OperatorParams,
    iv: Interval,
    res: GridResolution,
) -> Result<Flagged<DiscreteFunction>, BvpError> {
    let grid = Arc::new(build_grid(iv, p, res));
    let samples = g.sample(grid.t_nodes())?;
    let table = WeightTable::new(&grid, p.alpha())?;
    let mut y = table.integrate_all(&samples.value);
    let c0 = -0.5 * y[grid.n()];
    y.iter_mut().for_each(|v| *v += c0);
    Ok(Flagged {
        value: DiscreteFunction::new(grid, y)?,
        warnings: samples.warnings,
    })
}

/// One application of the solution operator to `y`, on `y`'s grid.
pub fn apply_solution_operator(
    spec: &ProblemSpec,
    y: &DiscreteFunction,
) -> Result<DiscreteFunction, BvpError> {
    let op = SolutionOperator::on_grid(spec, y.grid().clone(), Execution::default())?;
    let ty = op.apply(y.values())?;
    Ok(DiscreteFunction::new(y.grid().clone(), ty)?)
}

/// Number of consecutive residual increases treated as divergence when no
/// contraction is guaranteed.
const DIVERGENCE_RUN: usize = 5;

/// Picard iteration `y_{k+1} = T y_k` from `cfg.y0`.
pub fn picard_solve(spec: &ProblemSpec, cfg: &SolveConfig) -> Result<SolveReport, BvpError> {
    cfg.validate()?;
    let op = SolutionOperator::new(spec, cfg.resolution, cfg.execution)?;
    let grid = op.grid().clone();
    let mut y = match &cfg.y0 {
        InitialGuess::Constant(c) => vec![*c; grid.n() + 1],
        InitialGuess::Expr(e) => {
            let h = RealFunction::Expr(e.clone());
            h.sample(grid.t_nodes())?.value
        }
        InitialGuess::Values(v) => {
            if v.len() != grid.n() + 1 {
                return Err(BvpError::InvalidConfig(format!(
                    "initial guess has {} values, grid has {} nodes",
                    v.len(),
                    grid.n() + 1
                )));
            }
            v.clone()
        }
    };

    let mut warnings = Vec::new();
    let ln = spec.lipschitz_product();
    let guaranteed = matches!(ln, Some(v) if v < 1.0);
    if !guaranteed {
        warnings.push(match ln {
            Some(v) => format!("no contraction guarantee: L*N = {v:.6} >= 1"),
            None => "no contraction guarantee: no Lipschitz constant supplied".to_string(),
        });
    }

    let mut history: Vec<f64> = Vec::new();
    let mut estimates = Vec::new();
    let mut converged = false;
    let mut increases = 0usize;
    for k in 1..=cfg.max_iter {
        let next = op.apply(&y).map_err(|e| e.at_iteration(k))?;
        let res = next
            .iter()
            .zip(&y)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if let Some(&prev) = history.last() {
            estimates.push(if prev > 0.0 { res / prev } else { 0.0 });
            increases = if res > prev { increases + 1 } else { 0 };
        }
        history.push(res);
        y = next;
        if res <= cfg.tol {
            converged = true;
            break;
        }
        if !res.is_finite() {
            warnings.push(format!("iteration {k}: residual is not finite, stopping"));
            break;
        }
        if !guaranteed && increases >= DIVERGENCE_RUN {
            warnings.push(format!(
                "divergence detected: residual increased for {DIVERGENCE_RUN} consecutive iterations (stopped at iteration {k})"
            ));
            break;
        }
    }
    if !converged && history.len() == cfg.max_iter {
        warnings.push(format!(
            "maximum of {} iterations reached without meeting tol = {:e}",
            cfg.max_iter, cfg.tol
        ));
    }

    let solution = DiscreteFunction::new(grid, y)?;
    Ok(SolveReport {
        anti_periodic_residual: anti_periodic_residual(&solution),
        iterations: history.len(),
        residual_history: history,
        contraction_estimates: estimates,
        converged,
        lipschitz_product: ln,
        warnings,
        solution,
    })
}

/// `|y(a) + y(b)|`.
pub fn anti_periodic_residual(y: &DiscreteFunction) -> f64 {
    let v = y.values();
    (v[0] + v[v.len() - 1]).abs()
}

/// Largest defect `|cD^{alpha;rho} y(t_j) - f(t_j, y_j)|` over the nodes `j >= 1`.
///
/// The CK derivative of the samples uses finite-difference gamma-derivatives;
/// `t = a` is skipped because the derivative integral is empty there.
pub fn residual_ck(spec: &ProblemSpec, y: &DiscreteFunction) -> Result<f64, BvpError> {
    let grid = y.grid();
    if grid.interval() != spec.interval || grid.params() != spec.params {
        return Err(BvpError::InvalidProblem(
            "function grid does not match the problem".into(),
        ));
    }
    let ck = ck_derivative_nodes(y, None)?;
    let t = grid.t_nodes();
    let mut worst = 0.0f64;
    for j in 1..t.len() {
        let b = Bindings::new().with("t", t[j]).with("y", y.values()[j]);
        let fv = spec.f.eval(&b).map_err(OperatorError::from)?.value;
        let d = (ck[j] - fv).abs();
        if d.is_nan() {
            return Ok(f64::NAN);
        }
        worst = worst.max(d);
    }
    Ok(worst)
}
