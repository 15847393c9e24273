//! Random expression trees for property sweeps.

use rand::Rng;

use super::{BinOp, Expr, Func, Point, Var};

/// A random tree of at most `depth` levels over `vars`. Division, `sqrt`
/// and `log` are applied to arguments of the form `c + a²` with `c >= 1/2`
/// and `exp`, `sin`, `cos` to `c tanh(a)` with `c <= 2`, so evaluation at
/// bounded bindings cannot fail and the trees do not oscillate faster than
/// a central difference can resolve.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, depth: usize, vars: &[Var]) -> Expr {
    if depth <= 1 || rng.random_bool(0.25) {
        return leaf(rng, vars);
    }
    let sub = |rng: &mut R| random_expr(rng, depth - 1, vars);
    match rng.random_range(0..13) {
        0 => Expr::neg(sub(rng)),
        1 => binary(BinOp::Add, sub(rng), sub(rng)),
        2 => binary(BinOp::Sub, sub(rng), sub(rng)),
        3 => binary(BinOp::Mul, sub(rng), sub(rng)),
        4 => {
            let num = sub(rng);
            let den = sub(rng);
            let den = guarded(rng, den);
            binary(BinOp::Div, num, den)
        }
        5 => Expr::pow(sub(rng), rng.random_range(2..=3)),
        6 => {
            let arg = sub(rng);
            Expr::call(Func::Sin, squashed(rng, arg))
        }
        7 => {
            let arg = sub(rng);
            Expr::call(Func::Cos, squashed(rng, arg))
        }
        8 => Expr::call(Func::Tanh, sub(rng)),
        9 => {
            let arg = sub(rng);
            Expr::call(Func::Exp, squashed(rng, arg))
        }
        10 => {
            let arg = sub(rng);
            let arg = guarded(rng, arg);
            Expr::call(Func::Sqrt, arg)
        }
        11 => {
            let arg = sub(rng);
            let arg = guarded(rng, arg);
            Expr::call(Func::Log, arg)
        }
        _ => Expr::call(Func::Abs, sub(rng)),
    }
}

fn leaf<R: Rng + ?Sized>(rng: &mut R, vars: &[Var]) -> Expr {
    if !vars.is_empty() && rng.random_bool(0.6) {
        Expr::Var(vars[rng.random_range(0..vars.len())])
    } else {
        Expr::num(constant(rng, -200, 200))
    }
}

fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
    match op {
        BinOp::Add => Expr::add(a, b),
        BinOp::Sub => Expr::sub(a, b),
        BinOp::Mul => Expr::mul(a, b),
        BinOp::Div => Expr::div(a, b),
    }
}

/// `k / 100` for `k` uniform in `lo..=hi`.
fn constant<R: Rng + ?Sized>(rng: &mut R, lo: i32, hi: i32) -> f64 {
    f64::from(rng.random_range(lo..=hi)) / 100.0
}

/// `c + a²` with `c` in `[0.5, 2]`.
fn guarded<R: Rng + ?Sized>(rng: &mut R, a: Expr) -> Expr {
    let c = constant(rng, 50, 200);
    Expr::add(Expr::num(c), Expr::pow(a, 2))
}

/// `c tanh(a)` with `c` in `[0.5, 2]`.
fn squashed<R: Rng + ?Sized>(rng: &mut R, a: Expr) -> Expr {
    let c = constant(rng, 50, 200);
    Expr::mul(Expr::num(c), Expr::call(Func::Tanh, a))
}

/// `|d - D_h| / (1 + |d|)` where `d` is `de` at `z` and `D_h` the central
/// difference of `e` in `u_{k+1}` with step `h`. `None` when an evaluation
/// fails, `d` is not finite, or the stencil straddles a kink of `abs` or
/// `sign`.
pub fn derivative_mismatch(e: &Expr, de: &Expr, k: usize, z: &[f64], h: f64) -> Option<f64> {
    let analytic = de.eval(&Point::at_u(z)).ok()?;
    let mut plus = z.to_vec();
    plus[k] += h;
    let mut minus = z.to_vec();
    minus[k] -= h;
    let (plus, minus) = (Point::at_u(&plus), Point::at_u(&minus));
    if crosses_kink(e, &minus, &plus) {
        return None;
    }
    let fd = (e.eval(&plus).ok()? - e.eval(&minus).ok()?) / (2.0 * h);
    fd.is_finite().then(|| (analytic - fd).abs() / (1.0 + analytic.abs()))
}

/// Whether the argument of some `abs` or `sign` in `e` vanishes or changes
/// sign between `a` and `b` (evaluation failures count as a crossing).
fn crosses_kink(e: &Expr, a: &Point<'_>, b: &Point<'_>) -> bool {
    match e {
        Expr::Num(_) | Expr::Var(_) => false,
        Expr::Call(Func::Abs | Func::Sign, arg) => {
            match (arg.eval(a), arg.eval(b)) {
                (Ok(x), Ok(y)) if x * y > 0.0 => crosses_kink(arg, a, b),
                _ => true,
            }
        }
        Expr::Neg(arg) | Expr::Call(_, arg) | Expr::Pow(arg, _) => crosses_kink(arg, a, b),
        Expr::Binary(_, l, r) => crosses_kink(l, a, b) || crosses_kink(r, a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_and_bounded_depth() {
        let vars = [Var::U(1), Var::U(2)];
        let a: Vec<Expr> = {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            (0..50).map(|_| random_expr(&mut rng, 6, &vars)).collect()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for e in &a {
            assert_eq!(*e, random_expr(&mut rng, 6, &vars));
            // Guards add at most two levels per generated level.
            assert!(e.depth() <= 18);
            assert!(e.max_component() <= 2);
        }
    }

    #[test]
    fn mismatch_of_exact_derivative_is_small() {
        let e = super::super::parse("u1^3 + sin(u2)").unwrap();
        let d1 = e.differentiate(Var::U(1));
        let m = derivative_mismatch(&e, &d1, 0, &[0.7, -0.3], 1e-5).unwrap();
        assert!(m < 1e-9);
        let bad = super::super::parse("u1").unwrap();
        assert!(derivative_mismatch(&e, &bad, 0, &[0.7, -0.3], 1e-5).unwrap() > 0.1);
    }

    #[test]
    fn stencils_across_kinks_are_skipped() {
        let e = super::super::parse("abs(u1 - 0.5)").unwrap();
        let d = e.differentiate(Var::U(1));
        assert_eq!(derivative_mismatch(&e, &d, 0, &[0.5 + 1e-6], 1e-5), None);
        assert!(derivative_mismatch(&e, &d, 0, &[0.6], 1e-5).unwrap() < 1e-9);
    }
}
