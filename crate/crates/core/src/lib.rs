//! Numerical toolkit for Katugampola-type fractional calculus.
//!
//! The crate evaluates the left-sided Katugampola fractional integral, the
//! Katugampola derivative and the Caputo-Katugampola (CK) derivative for
//! orders `0 < alpha < 1`, solves the anti-periodic boundary value problem
//!
//! ```text
//!   cD^{alpha;rho} y(t) = f(t, y(t)),   t in [a, b],   y(a) + y(b) = 0
//! ```
//!
//! through its equivalent integral equation and Picard iteration, and checks
//! the contraction / a-priori-bound conditions that guarantee existence
//! (and uniqueness) of a solution.
//!
//! Module map:
//!
//! * [`expr`]: the arithmetic mini-language used for `f`, `eta`, `psi`, `q`, `delta`.
//! * [`operators`]: fractional operators, the gamma function and closed-form power-law values.
//! * [`quadrature`]: graded grids in `u = t^rho` and product-integration weights.
//! * [`bvp`]: the solution operator, linear solve and Picard solver.
//! * [`conditions`]: existence/uniqueness constants and verdicts.
//! * [`exec`]: sequential / rayon execution switch.

pub mod bvp;
pub mod conditions;
pub mod exec;
pub mod expr;
pub mod operators;
pub mod quadrature;
mod special;

pub use bvp::{
    anti_periodic_residual, apply_solution_operator, c0_coefficient, picard_solve, residual_ck,
    solve_linear, BvpError, InitialGuess, ProblemSpec, SolutionOperator, SolveConfig, SolveReport,
};
pub use conditions::{
    banach_constant, check_all, compute_mu, krasnoselskii_constant, leray_schauder_find_m,
    ConditionError, ConditionReport, HypothesisData, Verdict, VerdictStatus,
};
pub use exec::Execution;
pub use expr::{Bindings, Expr};
pub use operators::{
    ck_derivative, gamma_derivative, gamma_fn, katu_derivative, katu_integral, power_ck_oracle,
    power_integral_oracle, Interval, OperatorError, OperatorParams, RealFunction,
};
pub use quadrature::{
    build_grid, integrate_full_kernel_b, integrate_singular, singular_weights, DiscreteFunction,
    Grid, GridResolution, WeightTable,
};

/// A computed value together with the domain warnings raised while producing it.
///
/// Runtime domain violations in user expressions (for example `ln` of a
/// non-positive number) produce NaN rather than an error; every such NaN is
/// recorded here so callers can surface it.
#[derive(Clone, Debug, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl<T> Flagged<T> {
    pub fn clean(value: T) -> Self {
        Flagged {
            value,
            warnings: Vec::new(),
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Flagged<U> {
        Flagged {
            value: f(self.value),
            warnings: self.warnings,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }
}
