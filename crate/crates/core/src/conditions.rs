//! Existence and uniqueness checks for the anti-periodic problem.
//!
//! * Banach: a Lipschitz constant `L` with `L N < 1` gives a unique solution,
//!   `N = 3/2 rho^{-alpha} (b^rho - a^rho)^alpha / Gamma(alpha + 1)`.
//! * Leray-Schauder: `|f(t,y)| <= eta(t) psi(|y|)` and some `M > 0` with
//!   `N ‖eta‖ psi(M) / M < 1` give at least one solution.
//! * Krasnoselskii: `|f| <= q(t)`, `|f(t,x) - f(t,y)| <= delta(t) |x - y|` and
//!   `Lambda = N ‖delta‖ / 3 < 1` give at least one solution.
//!
//! Sup norms of user functions are estimated from 10^4 uniform samples. That
//! is a lower bound of the true norm, so every "guaranteed" verdict holds
//! modulo sampling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bvp::ProblemSpec;
use crate::exec::Execution;
use crate::expr::{Bindings, EvalError, Expr};
use crate::operators::{Interval, OperatorParams};
use crate::special;

/// Sample count for sup norms and sign checks.
pub const SAMPLE_POINTS: usize = 10_000;
/// Number of logarithmically spaced trial values of `M`.
pub const M_GRID_POINTS: usize = 1000;
pub const M_MIN: f64 = 1e-6;
pub const M_MAX: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConditionError {
    #[error("{name} is NaN at {var} = {at}")]
    NanSample {
        name: String,
        var: &'static str,
        at: f64,
    },
    #[error("hypothesis {name} violated: {detail}")]
    Violated { name: String, detail: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Optional hypothesis data for the three theorems.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HypothesisData {
    /// Lipschitz constant of `f` in `y`.
    pub lipschitz_l: Option<f64>,
    /// Growth weight `eta(t)`, over `{t}`.
    pub eta: Option<Expr>,
    /// Nondecreasing growth function `psi(u)`, over `{u}`.
    pub psi: Option<Expr>,
    /// Uniform bound `q(t)` of `|f|`, over `{t}`.
    pub q: Option<Expr>,
    /// Pointwise Lipschitz function `delta(t)`, over `{t}`.
    pub delta_fn: Option<Expr>,
    /// `sup_t |f(t, 0)|`; computed from `f` when absent.
    pub mu: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    Guaranteed,
    NotGuaranteed,
    Inapplicable,
}

impl VerdictStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictStatus::Guaranteed => "guaranteed",
            VerdictStatus::NotGuaranteed => "not-guaranteed",
            VerdictStatus::Inapplicable => "inapplicable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub reason: String,
}

impl Verdict {
    fn new(status: VerdictStatus, reason: impl Into<String>) -> Self {
        Verdict {
            status,
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub n_constant: f64,
    pub lambda_constant: Option<f64>,
    pub ln_product: Option<f64>,
    pub m_found: Option<f64>,
    /// Banach ball radius `mu N / (1 - L N)`, only when `L N < 1`.
    pub r_ball: Option<f64>,
    /// Krasnoselskii ball radius `N ‖q‖ + 1`.
    pub r0_ball: Option<f64>,
    pub mu: f64,
    /// Unique solution (Banach).
    pub th1: Verdict,
    /// At least one solution (Leray-Schauder).
    pub th2: Verdict,
    /// At least one solution (Krasnoselskii).
    pub th3: Verdict,
}

/// `rho^{-alpha} (b^rho - a^rho)^alpha / Gamma(alpha + 1)`, shared by N and Lambda.
fn kernel_mass(p: OperatorParams, iv: Interval) -> f64 {
    let width = iv.b().powf(p.rho()) - iv.a().powf(p.rho());
    p.rho().powf(-p.alpha()) * width.powf(p.alpha()) / special::gamma(p.alpha() + 1.0)
}

/// `N = 3/2 rho^{-alpha} (b^rho - a^rho)^alpha / Gamma(alpha + 1)`.
pub fn banach_constant(p: OperatorParams, iv: Interval) -> f64 {
    1.5 * kernel_mass(p, iv)
}

fn uniform_samples(iv: Interval) -> impl Fn(usize) -> f64 {
    let (a, b) = (iv.a(), iv.b());
    move |k| {
        if k + 1 == SAMPLE_POINTS {
            b
        } else {
            a + (b - a) * (k as f64 / (SAMPLE_POINTS - 1) as f64)
        }
    }
}

fn log_m_grid(points: usize) -> impl Fn(usize) -> f64 {
    let (lo, hi) = (M_MIN.log10(), M_MAX.log10());
    move |k| 10f64.powf(lo + (hi - lo) * k as f64 / (points - 1) as f64)
}

/// Values of a one-variable expression at the given abscissae; NaN is an error.
fn sample_expr(
    e: &Expr,
    name: &str,
    var: &'static str,
    count: usize,
    at: impl Fn(usize) -> f64 + Sync + Send,
    extra: &[(&str, f64)],
) -> Result<Vec<(f64, f64)>, ConditionError> {
    Execution::default().try_map_range(0..count, |k| {
        let x = at(k);
        let mut b = Bindings::new().with(var, x);
        for (n, v) in extra {
            b.set(n, *v);
        }
        let v = e.eval(&b)?.value;
        if v.is_nan() {
            return Err(ConditionError::NanSample {
                name: name.to_string(),
                var,
                at: x,
            });
        }
        Ok((x, v))
    })
}

fn sup_norm_t(e: &Expr, name: &str, iv: Interval) -> Result<f64, ConditionError> {
    let s = sample_expr(e, name, "t", SAMPLE_POINTS, uniform_samples(iv), &[])?;
    Ok(s.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs())))
}

fn check_nonnegative_t(e: &Expr, name: &str, iv: Interval) -> Result<f64, ConditionError> {
    let s = sample_expr(e, name, "t", SAMPLE_POINTS, uniform_samples(iv), &[])?;
    if let Some((t, v)) = s.iter().find(|(_, v)| *v < 0.0) {
        return Err(ConditionError::Violated {
            name: name.to_string(),
            detail: format!("must be nonnegative on J, {name}({t}) = {v}"),
        });
    }
    Ok(s.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs())))
}

fn check_psi(psi: &Expr) -> Result<(), ConditionError> {
    let s = sample_expr(
        psi,
        "psi",
        "u",
        SAMPLE_POINTS,
        log_m_grid(SAMPLE_POINTS),
        &[],
    )?;
    if let Some((u, v)) = s.iter().find(|(_, v)| *v < 0.0) {
        return Err(ConditionError::Violated {
            name: "psi".into(),
            detail: format!("must be nonnegative, psi({u}) = {v}"),
        });
    }
    for w in s.windows(2) {
        let ((u0, v0), (u1, v1)) = (w[0], w[1]);
        if v1 < v0 - 1e-12 * v0.abs().max(1.0) {
            return Err(ConditionError::Violated {
                name: "psi".into(),
                detail: format!("must be nondecreasing, psi({u0}) = {v0} > psi({u1}) = {v1}"),
            });
        }
    }
    Ok(())
}

/// `Lambda = 1/2 rho^{-alpha} ‖delta‖ (b^rho - a^rho)^alpha / Gamma(alpha + 1)`.
pub fn krasnoselskii_constant(
    p: OperatorParams,
    iv: Interval,
    delta_fn: &Expr,
) -> Result<f64, ConditionError> {
    let norm = sup_norm_t(delta_fn, "delta", iv)?;
    Ok(0.5 * norm * kernel_mass(p, iv))
}

/// Smallest `M` on a logarithmic grid over `[1e-6, 1e6]` with
/// `N ‖eta‖ psi(M) / M < 1`, if any.
pub fn leray_schauder_find_m(
    p: OperatorParams,
    iv: Interval,
    eta: &Expr,
    psi: &Expr,
) -> Result<Option<f64>, ConditionError> {
    let factor = banach_constant(p, iv) * sup_norm_t(eta, "eta", iv)?;
    let s = sample_expr(
        psi,
        "psi",
        "u",
        M_GRID_POINTS,
        log_m_grid(M_GRID_POINTS),
        &[],
    )?;
    Ok(s.into_iter()
        .find(|(m, psi_m)| factor * psi_m / m < 1.0)
        .map(|(m, _)| m))
}

/// `mu = max |f(t, 0)|` over the sample points.
pub fn compute_mu(f: &Expr, iv: Interval) -> Result<f64, ConditionError> {
    let s = sample_expr(
        f,
        "f(t, 0)",
        "t",
        SAMPLE_POINTS,
        uniform_samples(iv),
        &[("y", 0.0)],
    )?;
    Ok(s.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs())))
}

const SAMPLING_NOTE: &str = "sup norms estimated from 10^4 samples; guaranteed modulo sampling";

/// Evaluates every constant derivable from the supplied hypotheses and the
/// verdict of each theorem.
pub fn check_all(spec: &ProblemSpec) -> Result<ConditionReport, ConditionError> {
    let (p, iv, h) = (spec.params, spec.interval, &spec.hypotheses);
    let n = banach_constant(p, iv);

    if let Some(l) = h.lipschitz_l {
        if !(l >= 0.0) || !l.is_finite() {
            return Err(ConditionError::Violated {
                name: "lipschitz".into(),
                detail: format!("L must be a finite nonnegative number, got {l}"),
            });
        }
    }
    let mu = match h.mu {
        Some(m) if !(m >= 0.0) || !m.is_finite() => {
            return Err(ConditionError::Violated {
                name: "mu".into(),
                detail: format!("mu must be a finite nonnegative number, got {m}"),
            })
        }
        Some(m) => m,
        None => compute_mu(&spec.f, iv)?,
    };
    let eta_norm = h
        .eta
        .as_ref()
        .map(|e| check_nonnegative_t(e, "eta", iv))
        .transpose()?;
    if let Some(psi) = &h.psi {
        check_psi(psi)?;
    }
    let q_norm =
        h.q.as_ref()
            .map(|e| check_nonnegative_t(e, "q", iv))
            .transpose()?;
    if let Some(d) = &h.delta_fn {
        check_nonnegative_t(d, "delta", iv)?;
    }

    let ln = h.lipschitz_l.map(|l| l * n);
    let (th1, r_ball) = match ln {
        None => (
            Verdict::new(
                VerdictStatus::Inapplicable,
                "no Lipschitz constant L supplied",
            ),
            None,
        ),
        Some(v) if v < 1.0 => (
            Verdict::new(
                VerdictStatus::Guaranteed,
                format!("L*N = {v:.6} < 1: T is a contraction, unique solution"),
            ),
            Some(mu * n / (1.0 - v)),
        ),
        Some(v) => (
            Verdict::new(
                VerdictStatus::NotGuaranteed,
                format!("L*N = {v:.6} >= 1: no contraction guarantee"),
            ),
            None,
        ),
    };

    let (th2, m_found) = match (&h.eta, &h.psi, eta_norm) {
        (Some(eta), Some(psi), Some(_)) => match leray_schauder_find_m(p, iv, eta, psi)? {
            Some(m) => (
                Verdict::new(
                    VerdictStatus::Guaranteed,
                    format!("N*|eta|*psi(M)/M < 1 at M = {m:.6e}; {SAMPLING_NOTE}"),
                ),
                Some(m),
            ),
            None => (
                Verdict::new(
                    VerdictStatus::NotGuaranteed,
                    format!("no M found in [{M_MIN:e},{M_MAX:e}]"),
                ),
                None,
            ),
        },
        _ => (
            Verdict::new(VerdictStatus::Inapplicable, "eta and psi are both required"),
            None,
        ),
    };

    let lambda = h
        .delta_fn
        .as_ref()
        .map(|d| krasnoselskii_constant(p, iv, d))
        .transpose()?;
    let r0_ball = q_norm.map(|q| n * q + 1.0);
    let th3 = match (lambda, q_norm) {
        (Some(l), Some(_)) if l < 1.0 => Verdict::new(
            VerdictStatus::Guaranteed,
            format!("Lambda = {l:.6} < 1 with bound q; {SAMPLING_NOTE}"),
        ),
        (Some(l), Some(_)) => Verdict::new(
            VerdictStatus::NotGuaranteed,
            format!("Lambda = {l:.6} >= 1"),
        ),
        (None, _) => Verdict::new(VerdictStatus::Inapplicable, "no delta function supplied"),
        (Some(_), None) => Verdict::new(VerdictStatus::Inapplicable, "no bound q supplied"),
    };

    Ok(ConditionReport {
        n_constant: n,
        lambda_constant: lambda,
        ln_product: ln,
        m_found,
        r_ball,
        r0_ball,
        mu,
        th1,
        th2,
        th3,
    })
}
