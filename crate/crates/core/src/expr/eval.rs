use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;

use super::{BinOp, Expr, Func, Var};

/// Variable lookup used by [`Expr::eval`].
pub trait Bindings {
    fn value(&self, var: Var) -> Option<f64>;
}

/// A point at which an expression is evaluated: optional `x` and the
/// components `u1..uN` (index 0 holds `u1`).
#[derive(Debug, Clone, Copy, Default)]
pub struct Point<'a> {
    pub x: Option<f64>,
    pub u: &'a [f64],
}

impl<'a> Point<'a> {
    pub fn at_x(x: f64) -> Self {
        Point { x: Some(x), u: &[] }
    }

    pub fn at_u(u: &'a [f64]) -> Self {
        Point { x: None, u }
    }
}

impl Bindings for Point<'_> {
    fn value(&self, var: Var) -> Option<f64> {
        match var {
            Var::X => self.x,
            Var::U(k) => self.u.get(k as usize - 1).copied(),
        }
    }
}

impl Bindings for BTreeMap<String, f64> {
    fn value(&self, var: Var) -> Option<f64> {
        let key = match var {
            Var::X => String::from("x"),
            Var::U(k) => alloc::format!("u{k}"),
        };
        self.get(&key).copied()
    }
}

impl Bindings for [(&str, f64)] {
    fn value(&self, var: Var) -> Option<f64> {
        self.iter().find_map(|&(name, v)| {
            let matches = match var {
                Var::X => name == "x",
                Var::U(k) => name
                    .strip_prefix('u')
                    .and_then(|d| d.parse::<u32>().ok())
                    .is_some_and(|i| i == k),
            };
            matches.then_some(v)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    /// `log(y)` with `y <= 0`.
    LogNonPositive,
    /// `sqrt(y)` with `y < 0`.
    SqrtNegative,
    DivisionByZero,
    /// Overflow or another operation without a finite real value.
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::LogNonPositive => "log of a non-positive value",
            DomainKind::SqrtNegative => "sqrt of a negative value",
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::NonFinite => "non-finite result",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(Var),
    #[error("{kind} in `{subtree}`")]
    Domain { kind: DomainKind, subtree: Box<Expr> },
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X => f.write_str("x"),
            Var::U(k) => write!(f, "u{k}"),
        }
    }
}

fn domain(kind: DomainKind, node: &Expr) -> EvalError {
    EvalError::Domain {
        kind,
        subtree: Box::new(node.clone()),
    }
}

pub(crate) fn sign(y: f64) -> f64 {
    if y > 0.0 {
        1.0
    } else if y < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Expr {
    /// Evaluate with real arithmetic. Every operation that has no finite
    /// real value is reported as a domain error naming the subtree; a NaN is
    /// never returned.
    pub fn eval<B: Bindings + ?Sized>(&self, env: &B) -> Result<f64, EvalError> {
        let value = match self {
            Expr::Num(v) => *v,
            Expr::Var(var) => env.value(*var).ok_or(EvalError::Unbound(*var))?,
            Expr::Neg(a) => -a.eval(env)?,
            Expr::Call(func, a) => {
                let y = a.eval(env)?;
                match func {
                    Func::Exp => libm::exp(y),
                    Func::Sin => libm::sin(y),
                    Func::Cos => libm::cos(y),
                    Func::Tanh => libm::tanh(y),
                    Func::Sqrt => {
                        if y < 0.0 {
                            return Err(domain(DomainKind::SqrtNegative, self));
                        }
                        libm::sqrt(y)
                    }
                    Func::Abs => libm::fabs(y),
                    Func::Log => {
                        if y <= 0.0 {
                            return Err(domain(DomainKind::LogNonPositive, self));
                        }
                        libm::log(y)
                    }
                    Func::Sign => sign(y),
                }
            }
            Expr::Binary(op, a, b) => {
                let (p, q) = (a.eval(env)?, b.eval(env)?);
                match op {
                    BinOp::Add => p + q,
                    BinOp::Sub => p - q,
                    BinOp::Mul => p * q,
                    BinOp::Div => {
                        if q == 0.0 {
                            return Err(domain(DomainKind::DivisionByZero, self));
                        }
                        p / q
                    }
                }
            }
            Expr::Pow(a, n) => powi(a.eval(env)?, *n),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(domain(DomainKind::NonFinite, self))
        }
    }
}

/// Integer power by repeated squaring.
pub(crate) fn powi(mut base: f64, mut n: u32) -> f64 {
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}
