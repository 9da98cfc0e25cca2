//! Arithmetic mini-language for problem functions.
//!
//! Grammar (EBNF, see `docs/grammar.md`):
//!
//! ```text
//! expr    = term , { ("+" | "-") , term } ;
//! term    = unary , { ("*" | "/") , unary } ;
//! unary   = "-" , unary | power ;
//! power   = primary , [ "^" , unary ] ;
//! primary = number | ident | ident , "(" , expr , { "," , expr } , ")" | "(" , expr , ")" ;
//! ```
//!
//! `^` binds tighter than unary minus and is right-associative, so `-t^2`
//! is `-(t^2)` and `2^3^2` is `2^(3^2)`. `pi` and `e` are built-in constants.

mod diff;
mod eval;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use eval::Evaluation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Pow,
    Gamma,
    /// Produced by differentiating `abs`; also accepted by the parser so that
    /// printed derivatives can be read back.
    Sign,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Pow => "pow",
            Func::Gamma => "gamma",
            Func::Sign => "sign",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "pow" => Func::Pow,
            "gamma" => Func::Gamma,
            "sign" => Func::Sign,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }
}

/// Expression tree. Immutable once built; cheap to share between threads.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier {0}")]
    UnknownIdentifier(String),
    #[error("unknown function {0}")]
    UnknownFunction(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("differentiation of {0} is not supported")]
    Unsupported(&'static str),
}

/// Variable values for one evaluation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bindings {
    slots: Vec<(String, f64)>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        match self.slots.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = value,
            None => self.slots.push((name.to_string(), value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.slots.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// Parses `source`, accepting only identifiers from `allowed_vars` as variables.
pub fn parse(source: &str, allowed_vars: &[&str]) -> Result<Expr, ParseError> {
    Expr::parse(source, allowed_vars)
}

impl Expr {
    pub fn parse(source: &str, allowed_vars: &[&str]) -> Result<Expr, ParseError> {
        parse::Parser::new(source, allowed_vars).parse()
    }

    pub fn num(value: f64) -> Expr {
        Expr::Num(value)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    /// The set of variable names referenced by this expression.
    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Num(_) | Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(v.as_str());
            }
            Expr::Neg(a) => a.collect_vars(out),
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        match self {
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Var(v) => v == var,
            Expr::Neg(a) => a.depends_on(var),
            Expr::Binary(_, a, b) => a.depends_on(var) || b.depends_on(var),
            Expr::Call(_, args) => args.iter().any(|a| a.depends_on(var)),
        }
    }

    /// Binding strength used by the printer; atoms are 5.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 0,
            Expr::Num(_) | Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => 5,
            Expr::Neg(_) => 3,
            Expr::Binary(op, ..) => op.precedence(),
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if v.is_finite() {
                    write!(f, "{v}")
                } else {
                    // Only reachable through constant folding; keeps the output parseable.
                    write!(f, "({}/0)", if v.is_nan() { 0.0 } else { v.signum() })
                }
            }
            Expr::Const(c) => f.write_str(c.name()),
            Expr::Var(v) => f.write_str(v),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, 3)
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                if *op == BinOp::Pow {
                    write_child(f, a, 5)?;
                    f.write_str("^")?;
                    write_child(f, b, 3)
                } else {
                    write_child(f, a, p)?;
                    write!(f, " {} ", op.symbol())?;
                    write_child(f, b, p + 1)
                }
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, b: &Bindings) -> f64 {
        parse(src, &["t", "y", "u"]).unwrap().eval(b).unwrap().value
    }

    #[test]
    fn polynomial_evaluation() {
        let e = parse("t^2 + y", &["t", "y"]).unwrap();
        let b = Bindings::new().with("t", 2.0).with("y", 1.0);
        assert_eq!(e.eval(&b).unwrap().value, 5.0);
    }

    #[test]
    fn constant_zero() {
        assert_eq!(parse("0", &["t"]).unwrap(), Expr::Num(0.0));
    }

    #[test]
    fn manufactured_forcing_parses() {
        let e = parse("2*sqrt(t)/sqrt(pi)", &["t"]).unwrap();
        let v = e.eval(&Bindings::new().with("t", 0.25)).unwrap().value;
        assert!((v - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn syntax_error_offset() {
        match parse("t +* y", &["t", "y"]) {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_and_function() {
        assert_eq!(
            parse("sin(z)", &["t"]),
            Err(ParseError::UnknownIdentifier("z".into()))
        );
        assert_eq!(
            parse("foo(t)", &["t"]),
            Err(ParseError::UnknownFunction("foo".into()))
        );
        assert!(matches!(
            parse("y", &["t"]),
            Err(ParseError::UnknownIdentifier(_))
        ));
    }

    #[test]
    fn precedence_rules() {
        let b = Bindings::new().with("t", 3.0);
        assert_eq!(ev("-t^2", &b), -9.0);
        assert_eq!(ev("2^3^2", &b), 512.0);
        assert_eq!(ev("1 - 2 - 3", &b), -4.0);
        assert_eq!(ev("12 / 2 / 3", &b), 2.0);
        assert_eq!(ev("2 * -t", &b), -6.0);
        assert_eq!(ev("2^-1", &b), 0.5);
        assert_eq!(ev("pow(t, 2) + 1e-1", &b), 9.1);
        assert_eq!(ev("(1 + t) * 2", &b), 8.0);
    }

    #[test]
    fn arity_is_checked() {
        assert!(matches!(
            parse("pow(t)", &["t"]),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse("sin(t, t)", &["t"]),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(parse("", &["t"]), Err(ParseError::Syntax { .. })));
        assert!(matches!(
            parse("(t", &["t"]),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse("t)", &["t"]),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn printing_reparses_to_same_tree() {
        for src in [
            "t^2 + y",
            "-t^2",
            "2^3^2",
            "(2^3)^2",
            "a - (b - c)",
            "t - (y - 1)",
            "t / (y * 2)",
            "-(-t)",
            "(-t)^2",
            "2^-t",
            "sin(t) * cos(y) / exp(-t)",
            "pow(t, y - 1) + abs(-t) * gamma(1.5)",
            "1e-7 * pi + e",
        ] {
            let vars = ["t", "y", "a", "b", "c"];
            let Ok(e) = parse(src, &vars) else {
                panic!("{src}")
            };
            let printed = e.to_string();
            assert_eq!(parse(&printed, &vars).unwrap(), e, "{src} -> {printed}");
        }
    }

    #[test]
    fn variables_are_collected() {
        let e = parse("sin(t) * y + t", &["t", "y"]).unwrap();
        assert_eq!(
            e.variables().into_iter().collect::<Vec<_>>(),
            vec!["t", "y"]
        );
        assert!(e.depends_on("y"));
        assert!(!parse("pi * t", &["t", "y"]).unwrap().depends_on("y"));
    }
}
