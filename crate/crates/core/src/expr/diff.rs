use alloc::vec::Vec;

use super::{BinOp, Expr, Func, Var};

impl Expr {
    /// Symbolic partial derivative with respect to `var`.
    ///
    /// `d|y|/dy` is `sign(y)` with `sign(0) = 0`, and `sign` has derivative
    /// zero. The result is built with the folding constructors, so `0 * t`,
    /// `t + 0`, `1 * t`, `t^0` and `t^1` never survive.
    pub fn differentiate(&self, var: Var) -> Expr {
        match self {
            Expr::Num(_) => Expr::num(0.0),
            Expr::Var(v) => Expr::num(if *v == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => Expr::neg(a.differentiate(var)),
            Expr::Binary(op, a, b) => {
                let (da, db) = (a.differentiate(var), b.differentiate(var));
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinOp::Add => Expr::add(da, db),
                    BinOp::Sub => Expr::sub(da, db),
                    BinOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                    BinOp::Div => {
                        if db == Expr::Num(0.0) {
                            Expr::div(da, b)
                        } else {
                            Expr::div(
                                Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db)),
                                Expr::pow(b, 2),
                            )
                        }
                    }
                }
            }
            Expr::Pow(a, n) => {
                let da = a.differentiate(var);
                if *n == 0 {
                    return Expr::num(0.0);
                }
                Expr::mul(
                    Expr::mul(Expr::num(f64::from(*n)), Expr::pow((**a).clone(), n - 1)),
                    da,
                )
            }
            Expr::Call(func, a) => {
                let da = a.differentiate(var);
                if da == Expr::Num(0.0) {
                    return Expr::num(0.0);
                }
                let a = (**a).clone();
                let outer = match func {
                    Func::Exp => Expr::call(Func::Exp, a),
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, a)),
                    Func::Tanh => Expr::sub(Expr::num(1.0), Expr::pow(Expr::call(Func::Tanh, a), 2)),
                    Func::Sqrt => {
                        return Expr::div(da, Expr::mul(Expr::num(2.0), Expr::call(Func::Sqrt, a)))
                    }
                    Func::Abs => Expr::call(Func::Sign, a),
                    Func::Log => return Expr::div(da, a),
                    Func::Sign => return Expr::num(0.0),
                };
                Expr::mul(outer, da)
            }
        }
    }

    /// Gradient with respect to `u1..u_n`.
    pub fn gradient(&self, n: u32) -> Vec<Expr> {
        (1..=n).map(|k| self.differentiate(Var::U(k))).collect()
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Expr, Var};
    use alloc::string::ToString;

    fn d(src: &str, var: Var) -> Expr {
        parse(src).unwrap().differentiate(var)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn square() {
        assert_eq!(d("x^2", Var::X).to_string(), "2 * x");
    }

    #[test]
    fn product_rule_folds_zero_terms() {
        assert_eq!(d("u1*u2", Var::U(1)), Expr::u(2));
        assert_eq!(d("u1*u2", Var::U(3)), Expr::num(0.0));
    }

    #[test]
    fn gaussian_chain_rule() {
        let de = d("exp(-x^2)", Var::X);
        let reference = parse("-2*x*exp(-x^2)").unwrap();
        for x in [-1.3, -0.2, 0.0, 0.7, 2.0] {
            let env = [("x", x)];
            assert!(close(de.eval(&env[..]).unwrap(), reference.eval(&env[..]).unwrap()));
        }
    }

    #[test]
    fn abs_uses_sign_with_zero_at_origin() {
        let de = d("abs(x)", Var::X);
        assert_eq!(de.to_string(), "sign(x)");
        assert_eq!(de.eval(&[("x", 0.0)][..]).unwrap(), 0.0);
        assert_eq!(de.eval(&[("x", -2.0)][..]).unwrap(), -1.0);
        let de = d("exp(-abs(x))", Var::X);
        assert!(close(de.eval(&[("x", 1.0)][..]).unwrap(), -(-1.0f64).exp()));
        assert_eq!(de.eval(&[("x", 0.0)][..]).unwrap(), 0.0);
    }

    #[test]
    fn elementary_functions() {
        type Case = (&'static str, fn(f64) -> f64);
        let cases: [Case; 7] = [
            ("sin(x)", |x| x.cos()),
            ("cos(x)", |x| -x.sin()),
            ("tanh(x)", |x| 1.0 - x.tanh().powi(2)),
            ("sqrt(x)", |x| 0.5 / x.sqrt()),
            ("log(x)", |x| 1.0 / x),
            ("1/x", |x| -1.0 / (x * x)),
            ("x^3/(1+x)", |x| (3.0 * x * x * (1.0 + x) - x.powi(3)) / (1.0 + x).powi(2)),
        ];
        for (src, exact) in cases {
            let de = d(src, Var::X);
            for x in [0.3, 1.0, 2.5] {
                let got = de.eval(&[("x", x)][..]).unwrap();
                assert!(close(got, exact(x)), "{src} at {x}: {got} vs {}", exact(x));
            }
        }
    }

    #[test]
    fn constants_and_other_variables_vanish() {
        assert_eq!(d("sin(3) + u2^4", Var::X), Expr::num(0.0));
        assert_eq!(d("x^0", Var::X), Expr::num(0.0));
        assert_eq!(d("x^1", Var::X), Expr::num(1.0));
        assert_eq!(d("sign(x)", Var::X), Expr::num(0.0));
    }

    #[test]
    fn gradient_components() {
        let g = parse("u1^2*u2 + sin(u2)").unwrap().gradient(2);
        let env = [("u1", 1.5), ("u2", 0.5)];
        assert!(close(g[0].eval(&env[..]).unwrap(), 2.0 * 1.5 * 0.5));
        assert!(close(g[1].eval(&env[..]).unwrap(), 1.5f64.powi(2) + 0.5f64.cos()));
    }
}
