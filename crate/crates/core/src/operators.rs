//! Katugampola fractional integral, Katugampola derivative and
//! Caputo-Katugampola derivative for `0 < alpha < 1`.
//!
//! All three are evaluated through the product-integration weights of
//! [`crate::quadrature`]. The CK derivative uses the absolutely continuous form
//! `cD^{alpha;rho} h = I^{1-alpha;rho} [t^{1-rho} h'(t)]`, so no quadrature
//! result is ever differentiated numerically.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Bindings, DiffError, EvalError, Expr};
use crate::quadrature::{build_grid, DiscreteFunction, Grid, GridResolution, WeightTable};
use crate::{special, Flagged};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum OperatorError {
    #[error("invalid operator parameters: {0}")]
    InvalidParams(String),
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("invalid grid resolution: {0}")]
    InvalidResolution(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("singular value: {0}")]
    Singular(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Diff(#[from] DiffError),
}

/// Order `alpha` in (0,1) and type `rho` of the fractional operators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    alpha: f64,
    rho: f64,
}

impl OperatorParams {
    /// Smallest supported `rho`; the Hadamard limit `rho -> 0` is not handled.
    pub const MIN_RHO: f64 = 1e-6;

    pub fn new(alpha: f64, rho: f64) -> Result<Self, OperatorError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(OperatorError::InvalidParams(format!(
                "alpha must lie in (0,1), got {alpha}"
            )));
        }
        if !(rho >= Self::MIN_RHO) || !rho.is_finite() {
            return Err(OperatorError::InvalidParams(format!(
                "rho must be at least {}, got {rho}",
                Self::MIN_RHO
            )));
        }
        Ok(OperatorParams { alpha, rho })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Same type, order `1 - alpha`.
    pub fn complement(&self) -> OperatorParams {
        OperatorParams {
            alpha: 1.0 - self.alpha,
            rho: self.rho,
        }
    }

    /// `(t^rho - a^rho) / rho`, the natural "distance" of the deformed calculus.
    pub fn deformed_distance(&self, a: f64, t: f64) -> f64 {
        if self.rho == 1.0 {
            t - a
        } else {
            (t.powf(self.rho) - a.powf(self.rho)) / self.rho
        }
    }
}

/// Closed interval `[a, b]` with `0 <= a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self, OperatorError> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(OperatorError::InvalidInterval(
                "endpoints must be finite".into(),
            ));
        }
        if a < 0.0 {
            return Err(OperatorError::InvalidInterval(format!(
                "a must be non-negative, got {a}"
            )));
        }
        if !(a < b) {
            return Err(OperatorError::InvalidInterval(format!(
                "a must be smaller than b, got [{a}, {b}]"
            )));
        }
        Ok(Interval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn contains(&self, t: f64) -> bool {
        self.a <= t && t <= self.b
    }
}

/// A function of one real variable `t`.
#[derive(Clone, Debug, PartialEq)]
pub enum RealFunction {
    /// Expression over the single variable `t`.
    Expr(Expr),
    Discrete(DiscreteFunction),
}

const MAX_LISTED_WARNINGS: usize = 5;

/// Accumulates per-node domain warnings, listing only the first few.
#[derive(Default)]
pub(crate) struct WarningSink {
    listed: Vec<String>,
    total: usize,
}

impl WarningSink {
    pub(crate) fn push(&mut self, t: f64, msg: &str) {
        self.total += 1;
        if self.listed.len() < MAX_LISTED_WARNINGS {
            self.listed.push(format!("t = {t}: {msg}"));
        }
    }

    pub(crate) fn finish(mut self) -> Vec<String> {
        if self.total > self.listed.len() {
            self.listed.push(format!(
                "... {} further domain warning(s) suppressed",
                self.total - self.listed.len()
            ));
        }
        self.listed
    }
}

impl RealFunction {
    pub fn parse(source: &str) -> Result<Self, crate::expr::ParseError> {
        Ok(RealFunction::Expr(Expr::parse(source, &["t"])?))
    }

    pub fn eval(&self, t: f64) -> Result<Flagged<f64>, OperatorError> {
        self.sample(&[t]).map(|f| f.map(|v| v[0]))
    }

    /// Values at the given points; NaN-producing domain violations are flagged.
    pub fn sample(&self, ts: &[f64]) -> Result<Flagged<Vec<f64>>, OperatorError> {
        match self {
            RealFunction::Expr(e) => {
                let mut sink = WarningSink::default();
                let mut b = Bindings::new().with("t", 0.0);
                let mut out = Vec::with_capacity(ts.len());
                for &t in ts {
                    b.set("t", t);
                    let r = e.eval(&b)?;
                    if let Some(w) = &r.warning {
                        sink.push(t, w);
                    }
                    out.push(r.value);
                }
                Ok(Flagged {
                    value: out,
                    warnings: sink.finish(),
                })
            }
            RealFunction::Discrete(d) => {
                let mut sink = WarningSink::default();
                let out: Vec<f64> = ts.iter().map(|&t| d.interpolate(t)).collect();
                for (t, v) in ts.iter().zip(&out) {
                    if v.is_nan() {
                        sink.push(*t, "NaN sample in discrete function");
                    }
                }
                Ok(Flagged {
                    value: out,
                    warnings: sink.finish(),
                })
            }
        }
    }

    /// Samples of the gamma-derivative `t^{1-rho} h'(t)` at the given points.
    pub(crate) fn gamma_derivative_sample(
        &self,
        rho: f64,
        ts: &[f64],
    ) -> Result<Flagged<Vec<f64>>, OperatorError> {
        match self {
            RealFunction::Expr(e) => {
                let d = e.differentiate("t")?;
                let mut sink = WarningSink::default();
                let mut out = Vec::with_capacity(ts.len());
                for &t in ts {
                    let v = expr_gamma_derivative(&d, rho, t)?;
                    if let Some(w) = &v.1 {
                        sink.push(t, w);
                    }
                    out.push(v.0);
                }
                Ok(Flagged {
                    value: out,
                    warnings: sink.finish(),
                })
            }
            RealFunction::Discrete(d) => {
                if d.grid().params().rho() != rho {
                    return Err(OperatorError::GridMismatch(format!(
                        "discrete function lives on a rho = {} grid, derivative requested for rho = {rho}",
                        d.grid().params().rho()
                    )));
                }
                let samples = d.gamma_derivative_samples();
                let derivative = DiscreteFunction::new(d.grid().clone(), samples)?;
                RealFunction::Discrete(derivative).sample(ts)
            }
        }
    }
}

// u-offset used to extrapolate the gamma-derivative to t = 0 when rho > 1.
const ORIGIN_PROBE: f64 = 1e-8;

/// `t^{1-rho} * d(t)` for a symbolic derivative `d`, with the limit at `t = 0`.
fn expr_gamma_derivative(
    d: &Expr,
    rho: f64,
    t: f64,
) -> Result<(f64, Option<String>), OperatorError> {
    let eval_d = |x: f64| d.eval(&Bindings::new().with("t", x));
    if rho == 1.0 {
        let r = eval_d(t)?;
        return Ok((r.value, r.warning));
    }
    if t < 0.0 {
        return Err(OperatorError::OutOfRange(format!(
            "gamma-derivative needs t >= 0 when rho != 1, got {t}"
        )));
    }
    if t > 0.0 {
        let r = eval_d(t)?;
        return Ok((t.powf(1.0 - rho) * r.value, r.warning));
    }
    let d0 = eval_d(0.0)?;
    if !d0.value.is_finite() {
        return Err(OperatorError::Singular(format!(
            "h'(0) = {} is not finite",
            d0.value
        )));
    }
    if rho < 1.0 {
        // t^{1-rho} -> 0 and h'(0) is finite
        return Ok((0.0, None));
    }
    if d0.value != 0.0 {
        return Err(OperatorError::Singular(format!(
            "t^(1-rho) h'(t) diverges at t = 0 for rho = {rho} and h'(0) = {}",
            d0.value
        )));
    }
    // h'(0) = 0: the limit equals rho * dĥ/du at u = 0; extrapolate linearly in u.
    let g = |u: f64| -> Result<f64, OperatorError> {
        let x = u.powf(1.0 / rho);
        Ok(x.powf(1.0 - rho) * eval_d(x)?.value)
    };
    let v = 2.0 * g(ORIGIN_PROBE)? - g(2.0 * ORIGIN_PROBE)?;
    Ok((v, None))
}

/// Γ(x) for `x > 0`, relative error below 1e-13.
pub fn gamma_fn(x: f64) -> Result<f64, OperatorError> {
    if !(x > 0.0) {
        return Err(OperatorError::OutOfRange(format!(
            "gamma is implemented for positive arguments, got {x}"
        )));
    }
    Ok(special::gamma(x))
}

fn check_point(iv: &Interval, t: f64) -> Result<(), OperatorError> {
    if iv.contains(t) {
        Ok(())
    } else {
        Err(OperatorError::OutOfRange(format!(
            "t = {t} outside [{}, {}]",
            iv.a(),
            iv.b()
        )))
    }
}

/// Grid on `[a, t]` so that `t` is the last node.
fn grid_to(p: OperatorParams, iv: &Interval, t: f64, res: GridResolution) -> Grid {
    let sub = Interval { a: iv.a(), b: t };
    build_grid(sub, p, res)
}

/// Left-sided Katugampola fractional integral `I^{alpha;rho}_{a+} h(t)`.
pub fn katu_integral(
    h: &RealFunction,
    p: OperatorParams,
    iv: Interval,
    t: f64,
    res: GridResolution,
) -> Result<Flagged<f64>, OperatorError> {
    check_point(&iv, t)?;
    if t == iv.a() {
        return Ok(Flagged::clean(0.0));
    }
    let grid = grid_to(p, &iv, t, res);
    crate::quadrature::integrate_full_kernel_b(h, &grid, p.alpha())
}

/// The gamma-derivative `h_rho^{(1)}(t) = t^{1-rho} h'(t)`.
///
/// At `t = 0` the prefactor is resolved as a limit: zero for `rho < 1`, an
/// error for `rho > 1` unless `h'(0) = 0`, in which case the finite limit is
/// extrapolated in `u = t^rho`.
pub fn gamma_derivative(h: &RealFunction, rho: f64, t: f64) -> Result<f64, OperatorError> {
    let s = h.gamma_derivative_sample(rho, &[t])?;
    Ok(s.value[0])
}

/// Caputo-Katugampola derivative `cD^{alpha;rho}_{a+} h(t)`; zero at `t = a`.
pub fn ck_derivative(
    h: &RealFunction,
    p: OperatorParams,
    iv: Interval,
    t: f64,
    res: GridResolution,
) -> Result<Flagged<f64>, OperatorError> {
    check_point(&iv, t)?;
    if t == iv.a() {
        return Ok(Flagged::clean(0.0));
    }
    let grid = grid_to(p, &iv, t, res);
    let dh = h.gamma_derivative_sample(p.rho(), grid.t_nodes())?;
    let w = crate::quadrature::singular_weights(&grid, grid.n(), 1.0 - p.alpha())?;
    Ok(dh.map(|v| w.iter().zip(&v).map(|(w, v)| w * v).sum()))
}

/// CK derivative of a discrete function at every node of its grid, using
/// finite-difference gamma-derivatives and a weight table of order `1 - alpha`.
pub fn ck_derivative_nodes(
    y: &DiscreteFunction,
    table: Option<&WeightTable>,
) -> Result<Vec<f64>, OperatorError> {
    let grid = y.grid();
    let order = 1.0 - grid.params().alpha();
    let owned;
    let table = match table {
        Some(t) if t.n() == grid.n() && t.alpha() == order => t,
        Some(_) => {
            return Err(OperatorError::GridMismatch(
                "weight table does not match the function's grid".into(),
            ))
        }
        None => {
            owned = WeightTable::new(grid, order)?;
            &owned
        }
    };
    Ok(table.integrate_all(&y.gamma_derivative_samples()))
}

/// Katugampola derivative `D^{alpha;rho}_{a+} h(t)`, assembled as
/// `cD^{alpha;rho} h(t) + h(a) ((t^rho - a^rho)/rho)^{-alpha} / Gamma(1 - alpha)`.
pub fn katu_derivative(
    h: &RealFunction,
    p: OperatorParams,
    iv: Interval,
    t: f64,
    res: GridResolution,
) -> Result<Flagged<f64>, OperatorError> {
    check_point(&iv, t)?;
    if t == iv.a() {
        return Err(OperatorError::Singular(
            "the Katugampola derivative is singular at t = a".into(),
        ));
    }
    let ck = ck_derivative(h, p, iv, t, res)?;
    let ha = h.eval(iv.a())?;
    let x = p.deformed_distance(iv.a(), t);
    let constant_part = ha.value * x.powf(-p.alpha()) / special::gamma(1.0 - p.alpha());
    let mut warnings = ck.warnings;
    warnings.extend(ha.warnings);
    Ok(Flagged {
        value: ck.value + constant_part,
        warnings,
    })
}

/// `I^{alpha;rho}_{a+} X^{delta-1} = Γ(δ)/Γ(δ+α) X^{α+δ-1}` with `X = (t^rho - a^rho)/rho`.
pub fn power_integral_oracle(
    delta: f64,
    p: OperatorParams,
    a: f64,
    t: f64,
) -> Result<f64, OperatorError> {
    if !(delta > 0.0) {
        return Err(OperatorError::OutOfRange(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if !(t >= a) {
        return Err(OperatorError::OutOfRange(format!(
            "t = {t} precedes a = {a}"
        )));
    }
    let x = p.deformed_distance(a, t);
    Ok(special::gamma(delta) / special::gamma(delta + p.alpha()) * x.powf(p.alpha() + delta - 1.0))
}

/// `cD^{alpha;rho}_{a+} X^{delta-1} = Γ(δ)/Γ(δ-α) X^{δ-α-1}`; exactly zero for `δ = 1`.
pub fn power_ck_oracle(
    delta: f64,
    p: OperatorParams,
    a: f64,
    t: f64,
) -> Result<f64, OperatorError> {
    if !(t >= a) {
        return Err(OperatorError::OutOfRange(format!(
            "t = {t} precedes a = {a}"
        )));
    }
    if delta == 1.0 {
        return Ok(0.0);
    }
    if !(delta > p.alpha()) {
        return Err(OperatorError::OutOfRange(format!(
            "power CK formula needs delta > alpha, got delta = {delta}, alpha = {}",
            p.alpha()
        )));
    }
    let x = p.deformed_distance(a, t);
    Ok(special::gamma(delta) / special::gamma(delta - p.alpha()) * x.powf(delta - p.alpha() - 1.0))
}

/// Convenience: a discrete function on a fresh grid over `iv`.
pub fn sample_on_grid(
    h: &RealFunction,
    p: OperatorParams,
    iv: Interval,
    res: GridResolution,
) -> Result<Flagged<DiscreteFunction>, OperatorError> {
    let grid = Arc::new(build_grid(iv, p, res));
    let s = h.sample(grid.t_nodes())?;
    let warnings = s.warnings;
    Ok(Flagged {
        value: DiscreteFunction::new(grid, s.value)?,
        warnings,
    })
}
