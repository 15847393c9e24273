use proptest::prelude::*;
use quadint_core::expr::{parse, Expr};
use quadint_core::grid::{sample, GridSpec};
use quadint_core::norms::norm_linf;
use quadint_core::problem::{
    ball_radius, certify, compute_q, compute_sigma, operator_norm_bound, ProblemOptions,
    ProblemSpec,
};

fn e(s: &str) -> Expr {
    parse(s).unwrap()
}

proptest! {
    #[test]
    fn q_is_monotone_and_symmetric(
        t in prop::collection::vec(0.0..10.0f64, 1..6),
        k in prop::collection::vec(0.0..10.0f64, 6),
        which in 0usize..6,
        bump in 0.0..5.0f64,
    ) {
        let k = &k[..t.len()];
        let q = compute_q(&t, k);
        let i = which % t.len();
        let mut t2 = t.clone();
        t2[i] += bump;
        prop_assert!(compute_q(&t2, k) >= q);
        let mut k2 = k.to_vec();
        k2[i] += bump;
        prop_assert!(compute_q(&t, &k2) >= q);
        let (mut tr, mut kr) = (t.clone(), k.to_vec());
        tr.reverse();
        kr.reverse();
        prop_assert!((compute_q(&tr, &kr) - q).abs() <= 1e-14 * q.max(1.0));
    }

    #[test]
    fn ball_radius_floor(a in 0.0..1e6f64) {
        prop_assert!(ball_radius(a) >= std::f64::consts::FRAC_1_SQRT_2);
    }

    #[test]
    fn sigma_and_rub_are_tied(c_a in 0.1..3.0f64, q in 0.0..5.0f64, m in 0.0..5.0f64, u0 in 0.0..3.0f64) {
        let sigma = compute_sigma(c_a, q, m, u0);
        let rub = c_a * m * (u0 + 1.0).powi(2) * q;
        prop_assert!((rub - sigma * (u0 + 1.0) / 2.0).abs() <= 1e-14 * rub.max(1e-300));
    }

    #[test]
    fn operator_bound_dominates_samples(a in -2.0..2.0f64, b in 0.1..3.0f64, c in -1.0..1.0f64) {
        let v = e(&format!("{a} * tanh({b} * x) + {c} * exp(-x^2)"));
        let g = GridSpec::new(10.0, 128).unwrap();
        let bound = operator_norm_bound(&v, &g).unwrap();
        prop_assert!(bound >= norm_linf(&sample(&v, &g).unwrap()));
    }
}

#[test]
fn rub_implies_sigma_below_one() {
    for amp in ["0.001", "0.005", "0.02", "0.04", "0.08", "0.2"] {
        for u0 in ["0.01*exp(-x^2)", "0.2*exp(-x^2)"] {
            let p = ProblemSpec::new(
                GridSpec::new(20.0, 512).unwrap(),
                vec![e(&format!("{amp}*exp(-abs(x))"))],
                vec![e("1")],
                vec![e(u0)],
                vec![e("u1^2")],
                1.0,
                ProblemOptions::default(),
            )
            .unwrap();
            let c = certify(&p).unwrap();
            if c.rub_lhs <= c.rub_rhs {
                assert!(c.rub_ok && c.sigma < 1.0);
            } else {
                assert!(!c.rub_ok);
            }
        }
    }
}
