use core::fmt;

use super::{BinOp, Expr};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => SUM,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => PRODUCT,
        Expr::Neg(_) => UNARY,
        Expr::Pow(..) => POWER,
        Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => ATOM,
    }
}

struct Wrapped<'a>(&'a Expr, bool);

impl fmt::Display for Wrapped<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Prints parseable source with the minimum of parentheses. Negative
/// literals (only produced by simplification) print as `(-c)`.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if v.is_sign_negative() => write!(f, "(-{})", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "-{}", Wrapped(a, precedence(a) < UNARY)),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Pow(a, n) => write!(f, "{}^{n}", Wrapped(a, precedence(a) < ATOM)),
            Expr::Binary(op, a, b) => {
                let p = precedence(self);
                write!(
                    f,
                    "{} {} {}",
                    Wrapped(a, precedence(a) < p),
                    op.symbol(),
                    Wrapped(b, precedence(b) <= p)
                )
            }
        }
    }
}
