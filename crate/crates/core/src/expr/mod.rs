//! The expression language used to describe kernels, multipliers, initial
//! data and nonlinearities.
//!
//! Grammar (EBNF, whitespace is insignificant):
//!
//! ```text
//! expr     = term { ("+" | "-") term } ;
//! term     = unary { ("*" | "/") unary } ;
//! unary    = "-" unary | power ;
//! power    = atom [ "^" exponent ] ;
//! exponent = integer [ "^" exponent ] | "(" integer ")" [ "^" exponent ] ;
//! atom     = number | variable | function "(" expr ")" | "(" expr ")" ;
//! variable = "x" | "u" digit-nonzero { digit } ;
//! function = "exp" | "sin" | "cos" | "tanh" | "sqrt" | "abs" | "log" | "sign" ;
//! number   = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```
//!
//! `^` binds tighter than unary minus, which binds tighter than `*` and `/`,
//! which bind tighter than `+` and `-`. Exponents are non-negative integer
//! literals so that differentiation stays inside the language.

mod diff;
mod display;
mod eval;
mod parse;
mod random;

use alloc::boxed::Box;
use alloc::collections::BTreeSet;

pub use eval::{Bindings, DomainKind, EvalError, Point};
pub use parse::{parse, ParseError};
pub use random::{derivative_mismatch, random_expr};

/// A variable of the language: the spatial coordinate `x` or a solution
/// component `u<k>` with `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X,
    U(u32),
}

impl Var {
    /// Component variable `u<k>`, `None` for `k == 0`.
    pub fn u(k: u32) -> Option<Var> {
        (k >= 1).then_some(Var::U(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Tanh,
    Sqrt,
    Abs,
    Log,
    /// Sign with `sign(0) = 0`; appears as the derivative of `abs`.
    Sign,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Exp,
        Func::Sin,
        Func::Cos,
        Func::Tanh,
        Func::Sqrt,
        Func::Abs,
        Func::Log,
        Func::Sign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Log => "log",
            Func::Sign => "sign",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Abstract syntax tree of a scalar expression.
///
/// Trees are immutable values; the constructors `add`, `mul`, ... fold the
/// trivial identities (`0 + t`, `1 * t`, `t ^ 1`, numeric constants) while
/// the parser builds trees verbatim.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn num(value: f64) -> Expr {
        Expr::Num(value)
    }

    pub fn x() -> Expr {
        Expr::Var(Var::X)
    }

    /// Component variable `u<k>`.
    ///
    /// # Panics
    /// If `k == 0`.
    pub fn u(k: u32) -> Expr {
        Expr::Var(Var::u(k).expect("component variables are numbered from 1"))
    }

    fn as_num(&self) -> Option<f64> {
        match *self {
            Expr::Num(v) => Some(v),
            _ => None,
        }
    }

    fn is_num(&self, value: f64) -> bool {
        self.as_num() == Some(value)
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(v) => Expr::Num(-v + 0.0),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            return fold(x + y).unwrap_or_else(|| raw(BinOp::Add, a, b));
        }
        if a.is_num(0.0) {
            return b;
        }
        if b.is_num(0.0) {
            return a;
        }
        raw(BinOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            return fold(x - y).unwrap_or_else(|| raw(BinOp::Sub, a, b));
        }
        if b.is_num(0.0) {
            return a;
        }
        if a.is_num(0.0) {
            return Expr::neg(b);
        }
        raw(BinOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            return fold(x * y).unwrap_or_else(|| raw(BinOp::Mul, a, b));
        }
        if a.is_num(0.0) || b.is_num(0.0) {
            return Expr::Num(0.0);
        }
        if a.is_num(1.0) {
            return b;
        }
        if b.is_num(1.0) {
            return a;
        }
        if a.is_num(-1.0) {
            return Expr::neg(b);
        }
        if b.is_num(-1.0) {
            return Expr::neg(a);
        }
        raw(BinOp::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if let (Some(x), Some(y)) = (a.as_num(), b.as_num()) {
            if y != 0.0 {
                return fold(x / y).unwrap_or_else(|| raw(BinOp::Div, a, b));
            }
        }
        if b.is_num(1.0) {
            return a;
        }
        raw(BinOp::Div, a, b)
    }

    pub fn pow(base: Expr, exponent: u32) -> Expr {
        match exponent {
            0 => Expr::Num(1.0),
            1 => base,
            _ => match base.as_num() {
                Some(v) => fold(libm::pow(v, f64::from(exponent)))
                    .unwrap_or_else(|| Expr::Pow(Box::new(base), exponent)),
                None => Expr::Pow(Box::new(base), exponent),
            },
        }
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call(func, Box::new(arg))
    }

    /// Every variable that occurs in the tree.
    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Neg(a) | Expr::Call(_, a) | Expr::Pow(a, _) => a.collect_variables(out),
            Expr::Binary(_, a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
        }
    }

    /// Largest component index `k` of any `u<k>` in the tree (0 if none).
    pub fn max_component(&self) -> u32 {
        self.variables()
            .into_iter()
            .filter_map(|v| match v {
                Var::U(k) => Some(k),
                Var::X => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Tree depth; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) | Expr::Pow(a, _) => 1 + a.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

fn raw(op: BinOp, a: Expr, b: Expr) -> Expr {
    Expr::Binary(op, Box::new(a), Box::new(b))
}

/// Finite results become literals, with `-0` folded to `0`.
fn fold(value: f64) -> Option<Expr> {
    value.is_finite().then_some(Expr::Num(value + 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_fold_identities() {
        let x = Expr::x();
        assert_eq!(Expr::add(Expr::num(0.0), x.clone()), x);
        assert_eq!(Expr::add(x.clone(), Expr::num(0.0)), x);
        assert_eq!(Expr::mul(Expr::num(0.0), x.clone()), Expr::num(0.0));
        assert_eq!(Expr::mul(Expr::num(1.0), x.clone()), x);
        assert_eq!(Expr::pow(x.clone(), 0), Expr::num(1.0));
        assert_eq!(Expr::pow(x.clone(), 1), x);
        assert_eq!(Expr::add(Expr::num(2.0), Expr::num(3.0)), Expr::num(5.0));
        assert_eq!(Expr::neg(Expr::neg(x.clone())), x);
        assert_eq!(Expr::sub(Expr::num(0.0), x.clone()), Expr::Neg(Box::new(x)));
    }

    #[test]
    fn division_by_literal_zero_is_not_folded() {
        let e = Expr::div(Expr::num(1.0), Expr::num(0.0));
        assert!(matches!(e, Expr::Binary(BinOp::Div, _, _)));
    }

    #[test]
    fn variables_and_components() {
        let e = parse("u1*u3 + sin(x)").unwrap();
        let vars: alloc::vec::Vec<_> = e.variables().into_iter().collect();
        assert_eq!(vars, [Var::X, Var::U(1), Var::U(3)]);
        assert_eq!(e.max_component(), 3);
        assert_eq!(Var::u(0), None);
    }
}
