use super::{BinOp, Bindings, EvalError, Expr, Func};
use crate::special;

/// Result of one evaluation: the IEEE value plus the first domain violation
/// encountered, if any. `value` is NaN whenever `warning` is set by a
/// violation on the path to the root.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub warning: Option<String>,
}

impl Evaluation {
    pub fn is_flagged(&self) -> bool {
        self.warning.is_some()
    }
}

fn flag(slot: &mut Option<String>, msg: impl FnOnce() -> String) -> f64 {
    if slot.is_none() {
        *slot = Some(msg());
    }
    f64::NAN
}

impl Expr {
    /// Evaluates the expression in IEEE double precision.
    ///
    /// Unbound variables are an error. Domain violations (division by zero,
    /// `ln` of a non-positive number, `sqrt` of a negative number, `gamma` at a
    /// pole, and any other operation turning finite inputs into NaN) yield NaN
    /// together with a warning.
    pub fn eval(&self, b: &Bindings) -> Result<Evaluation, EvalError> {
        let mut warning = None;
        let value = self.eval_inner(b, &mut warning)?;
        if value.is_nan() && warning.is_none() {
            warning = Some(format!("NaN produced by {self}"));
        }
        Ok(Evaluation { value, warning })
    }

    fn eval_inner(&self, b: &Bindings, w: &mut Option<String>) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Const(c) => c.value(),
            Expr::Var(name) => b
                .get(name)
                .ok_or_else(|| EvalError::Unbound(name.clone()))?,
            Expr::Neg(a) => -a.eval_inner(b, w)?,
            Expr::Binary(op, lhs, rhs) => {
                let x = lhs.eval_inner(b, w)?;
                let y = rhs.eval_inner(b, w)?;
                let r = match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div if y == 0.0 => {
                        return Ok(flag(w, || format!("division by zero in {self}")));
                    }
                    BinOp::Div => x / y,
                    BinOp::Pow => x.powf(y),
                };
                if r.is_nan() && !x.is_nan() && !y.is_nan() {
                    flag(w, || {
                        format!("{} undefined for ({x}, {y}) in {self}", op.symbol())
                    })
                } else {
                    r
                }
            }
            Expr::Call(func, args) => {
                let x = args[0].eval_inner(b, w)?;
                if x.is_nan() {
                    return Ok(f64::NAN);
                }
                let r = match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Ln if x <= 0.0 => {
                        return Ok(flag(w, || format!("ln of non-positive value {x}")));
                    }
                    Func::Ln => x.ln(),
                    Func::Sqrt if x < 0.0 => {
                        return Ok(flag(w, || format!("sqrt of negative value {x}")));
                    }
                    Func::Sqrt => x.sqrt(),
                    Func::Abs => x.abs(),
                    Func::Sign => {
                        if x > 0.0 {
                            1.0
                        } else if x < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                    Func::Gamma if x <= 0.0 && x == x.floor() => {
                        return Ok(flag(w, || format!("gamma pole at {x}")));
                    }
                    Func::Gamma => special::gamma(x),
                    Func::Pow => {
                        let y = args[1].eval_inner(b, w)?;
                        if y.is_nan() {
                            return Ok(f64::NAN);
                        }
                        x.powf(y)
                    }
                };
                if r.is_nan() {
                    flag(w, || format!("{} undefined at {x}", func.name()))
                } else {
                    r
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Bindings, EvalError};

    fn at(src: &str, t: f64) -> super::Evaluation {
        parse(src, &["t"])
            .unwrap()
            .eval(&Bindings::new().with("t", t))
            .unwrap()
    }

    #[test]
    fn sin_at_zero() {
        assert_eq!(at("sin(t)", 0.0).value, 0.0);
    }

    #[test]
    fn gamma_half_integer() {
        // sqrt(pi)/2
        let v = at("gamma(t)", 1.5).value;
        assert!((v - 0.886_226_925_452_758_f64).abs() < 1e-15);
    }

    #[test]
    fn division_by_zero_is_flagged_nan() {
        let r = at("1/t", 0.0);
        assert!(r.value.is_nan());
        assert!(r.warning.unwrap().contains("division by zero"));
    }

    #[test]
    fn domain_violations_are_flagged() {
        for (src, t) in [
            ("ln(t)", 0.0),
            ("ln(t)", -1.0),
            ("sqrt(t)", -1.0),
            ("gamma(t)", -2.0),
            ("gamma(t)", 0.0),
            ("t^0.5", -4.0),
            ("pow(t, 1.5)", -1.0),
            ("1 + 0*ln(t)", -1.0),
        ] {
            let r = at(src, t);
            assert!(r.value.is_nan(), "{src}");
            assert!(r.is_flagged(), "{src}");
        }
        // finite everywhere: no flag
        assert!(!at("gamma(t)", -0.5).is_flagged());
        assert!(!at("abs(t) + sign(t)", 0.0).is_flagged());
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let e = parse("t + y", &["t", "y"]).unwrap();
        assert_eq!(
            e.eval(&Bindings::new().with("t", 1.0)),
            Err(EvalError::Unbound("y".into()))
        );
    }

    #[test]
    fn evaluation_is_deterministic() {
        let e = parse("sin(t)^2 + exp(-t) * gamma(t + 0.3)", &["t"]).unwrap();
        let b = Bindings::new().with("t", 0.731);
        let v1 = e.eval(&b).unwrap().value;
        for _ in 0..10 {
            assert_eq!(e.eval(&b).unwrap().value.to_bits(), v1.to_bits());
        }
    }
}
