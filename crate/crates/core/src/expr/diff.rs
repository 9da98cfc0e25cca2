use super::{BinOp, DiffError, Expr, Func};

// Smart constructors: fold literal subtrees and drop literal 0/1 identities.

fn lit(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(v) => Some(*v),
        _ => None,
    }
}

fn is_lit(e: &Expr, v: f64) -> bool {
    lit(e) == Some(v)
}

fn add(a: Expr, b: Expr) -> Expr {
    match (lit(&a), lit(&b)) {
        (Some(x), Some(y)) => Expr::Num(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Expr::Binary(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (lit(&a), lit(&b)) {
        (Some(x), Some(y)) => Expr::Num(x - y),
        (_, Some(y)) if y == 0.0 => a,
        (Some(x), _) if x == 0.0 => neg(b),
        _ => Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (lit(&a), lit(&b)) {
        (Some(x), Some(y)) => Expr::Num(x * y),
        _ if is_lit(&a, 0.0) || is_lit(&b, 0.0) => Expr::Num(0.0),
        _ if is_lit(&a, 1.0) => b,
        _ if is_lit(&b, 1.0) => a,
        _ => Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (lit(&a), lit(&b)) {
        (Some(x), Some(y)) if y != 0.0 => Expr::Num(x / y),
        (Some(x), _) if x == 0.0 => Expr::Num(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::Binary(BinOp::Div, Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match lit(&b) {
        Some(y) if y == 1.0 => a,
        _ => Expr::Binary(BinOp::Pow, Box::new(a), Box::new(b)),
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, vec![a])
}

/// d(base^exponent) for either operator form.
fn diff_pow(base: &Expr, exponent: &Expr, var: &str) -> Result<Expr, DiffError> {
    let db = base.differentiate(var)?;
    let de = exponent.differentiate(var)?;
    if !exponent.depends_on(var) {
        // e * base^(e - 1) * base'
        let reduced = sub(exponent.clone(), Expr::Num(1.0));
        return Ok(mul(mul(exponent.clone(), pow(base.clone(), reduced)), db));
    }
    let whole = pow(base.clone(), exponent.clone());
    if !base.depends_on(var) {
        return Ok(mul(mul(whole, call(Func::Ln, base.clone())), de));
    }
    // base^e * (e' ln(base) + e base' / base)
    let inner = add(
        mul(de, call(Func::Ln, base.clone())),
        div(mul(exponent.clone(), db), base.clone()),
    );
    Ok(mul(whole, inner))
}

impl Expr {
    /// Exact symbolic derivative with respect to `var`.
    ///
    /// `abs` differentiates to `sign(arg)`, `sign` to zero; `gamma` is rejected.
    pub fn differentiate(&self, var: &str) -> Result<Expr, DiffError> {
        Ok(match self {
            Expr::Num(_) | Expr::Const(_) => Expr::Num(0.0),
            Expr::Var(v) => Expr::Num(if v == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.differentiate(var)?),
            Expr::Binary(op, a, b) => match op {
                BinOp::Add => add(a.differentiate(var)?, b.differentiate(var)?),
                BinOp::Sub => sub(a.differentiate(var)?, b.differentiate(var)?),
                BinOp::Mul => add(
                    mul(a.differentiate(var)?, (**b).clone()),
                    mul((**a).clone(), b.differentiate(var)?),
                ),
                BinOp::Div => div(
                    sub(
                        mul(a.differentiate(var)?, (**b).clone()),
                        mul((**a).clone(), b.differentiate(var)?),
                    ),
                    pow((**b).clone(), Expr::Num(2.0)),
                ),
                BinOp::Pow => diff_pow(a, b, var)?,
            },
            Expr::Call(func, args) => {
                let a = &args[0];
                if *func == Func::Pow {
                    return diff_pow(a, &args[1], var);
                }
                let da = a.differentiate(var)?;
                if is_lit(&da, 0.0) {
                    return Ok(Expr::Num(0.0));
                }
                let outer = match func {
                    Func::Sin => call(Func::Cos, a.clone()),
                    Func::Cos => neg(call(Func::Sin, a.clone())),
                    Func::Exp => call(Func::Exp, a.clone()),
                    Func::Ln => return Ok(div(da, a.clone())),
                    Func::Sqrt => {
                        return Ok(div(da, mul(Expr::Num(2.0), call(Func::Sqrt, a.clone()))))
                    }
                    Func::Abs => call(Func::Sign, a.clone()),
                    Func::Sign => return Ok(Expr::Num(0.0)),
                    Func::Gamma => return Err(DiffError::Unsupported("gamma")),
                    Func::Pow => unreachable!("handled above"),
                };
                mul(outer, da)
            }
        })
    }
}
