//! Oracle suite run at the parameters of a problem file.

use katufrac::operators::{ck_derivative_nodes, sample_on_grid};
use katufrac::{
    anti_periodic_residual, ck_derivative, gamma_fn, katu_integral, power_ck_oracle,
    power_integral_oracle, solve_linear, BvpError, DiscreteFunction, Execution, GridResolution,
    OperatorError, OperatorParams, ProblemSpec, RealFunction, SolutionOperator, WeightTable,
};

use crate::report::VerifyCase;
use crate::CliError;

pub const DEFAULT_VERIFY_N: usize = 4096;
/// Mild clustering toward `a` for the half-integer power cases.
pub const VERIFY_GRADING: f64 = 1.5;

pub const INTEGRAL_TOL: f64 = 1e-6;
pub const CK_TOL: f64 = 1e-6;
pub const SEMIGROUP_TOL: f64 = 1e-5;
pub const INVERSION_TOL: f64 = 1e-4;
pub const LINEAR_TOL: f64 = 1e-5;
pub const ANTI_PERIODIC_TOL: f64 = 1e-12;

fn op_err(e: OperatorError) -> CliError {
    CliError::Validation(e.to_string())
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn case(name: String, error: f64, tolerance: f64) -> VerifyCase {
    VerifyCase {
        name,
        error,
        tolerance,
        passed: error <= tolerance,
    }
}

/// `X = (t^rho - a^rho)/rho` as source text; case names refer to it as `X`.
fn deformed(p: OperatorParams, a: f64) -> String {
    let r = p.rho();
    format!("((t^{r} - {a}^{r})/{r})")
}

pub fn run_suite(spec: &ProblemSpec, res: GridResolution) -> Result<Vec<VerifyCase>, CliError> {
    let (p, iv) = (spec.params, spec.interval);
    let (a, b) = (iv.a(), iv.b());
    let alpha = p.alpha();
    let x = deformed(p, a);
    let parse = |s: &str| RealFunction::parse(s).map_err(|e| CliError::Validation(e.to_string()));
    let mut cases = Vec::new();

    {
        let op = SolutionOperator::new(spec, res, Execution::default()).map_err(bvp_err)?;
        let ty = op.apply(&vec![0.0; op.grid().n() + 1]).map_err(bvp_err)?;
        let ap = (ty[0] + ty[ty.len() - 1]).abs() / (1.0 + sup(&ty));
        cases.push(case(
            "solution operator anti-periodic".into(),
            ap,
            ANTI_PERIODIC_TOL,
        ));
    }

    for delta in [1.0, 1.5, 2.0, 3.0] {
        let h = parse(&format!("{x}^{}", delta - 1.0))?;
        let got = katu_integral(&h, p, iv, b, res).map_err(op_err)?.value;
        let want = power_integral_oracle(delta, p, a, b).map_err(op_err)?;
        let err = (got - want).abs() / want.abs();
        cases.push(case(
            format!("integral power delta={delta}"),
            err,
            INTEGRAL_TOL,
        ));
    }

    for delta in [1.0, 2.0, 3.0] {
        let h = parse(&format!("{x}^{}", delta - 1.0))?;
        let got = ck_derivative(&h, p, iv, b, res).map_err(op_err)?.value;
        let want = power_ck_oracle(delta, p, a, b).map_err(op_err)?;
        let err = if want == 0.0 {
            got.abs()
        } else {
            (got - want).abs() / want.abs()
        };
        cases.push(case(format!("ck power delta={delta}"), err, CK_TOL));
    }

    let beta = 0.5 * (1.0 - alpha);
    for (label, src) in [("sin(X)", format!("sin({x})")), ("X^2", format!("{x}^2"))] {
        let h = sample_on_grid(&parse(&src)?, p, iv, res)
            .map_err(op_err)?
            .value;
        let grid = h.grid().clone();
        let table = |order: f64| WeightTable::build_with(&grid, order, Execution::default());
        let ib = table(beta).map_err(op_err)?.integrate_all(h.values());
        let iab = table(alpha).map_err(op_err)?.integrate_all(&ib);
        let direct = table(alpha + beta)
            .map_err(op_err)?
            .integrate_all(h.values());
        let err = sup_diff(&iab, &direct) / (1.0 + sup(&direct));
        cases.push(case(
            format!("semigroup beta={beta} h={label}"),
            err,
            SEMIGROUP_TOL,
        ));
    }

    {
        let src = format!("sin({x}) + {x}");
        let h = sample_on_grid(&parse(&src)?, p, iv, res)
            .map_err(op_err)?
            .value;
        let grid = h.grid().clone();
        let ia = WeightTable::build_with(&grid, alpha, Execution::default())
            .map_err(op_err)?
            .integrate_all(h.values());
        let back = ck_derivative_nodes(&DiscreteFunction::new(grid, ia).map_err(op_err)?, None)
            .map_err(op_err)?;
        let err = sup_diff(&back, h.values()) / (1.0 + h.sup_norm());
        cases.push(case("inversion h=sin(X)+X".into(), err, INVERSION_TOL));
    }

    {
        // y = X^2 - X(b)^2/2 solves cD y = Γ(3)/Γ(3-alpha) X^{2-alpha}
        let coef = 2.0 / gamma_fn(3.0 - alpha).map_err(op_err)?;
        let g = parse(&format!("{coef}*{x}^{}", 2.0 - alpha))?;
        let y = solve_linear(&g, p, iv, res).map_err(bvp_err)?.value;
        let xb = (b.powf(p.rho()) - a.powf(p.rho())) / p.rho();
        let exact: Vec<f64> = y
            .grid()
            .t_nodes()
            .iter()
            .map(|t| {
                let xt = (t.powf(p.rho()) - a.powf(p.rho())) / p.rho();
                xt * xt - 0.5 * xb * xb
            })
            .collect();
        let err = sup_diff(y.values(), &exact) / (1.0 + sup(&exact));
        cases.push(case("linear bvp manufactured".into(), err, LINEAR_TOL));
        let ap = anti_periodic_residual(&y) / (1.0 + y.sup_norm());
        cases.push(case(
            "linear bvp anti-periodic".into(),
            ap,
            ANTI_PERIODIC_TOL,
        ));
    }

    Ok(cases)
}

fn bvp_err(e: BvpError) -> CliError {
    CliError::from(e)
}
