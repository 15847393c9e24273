use quadint_core::expr::{parse, Expr};
use quadint_core::grid::GridSpec;
use quadint_core::problem::{ProblemOptions, ProblemSpec};
use quadint_core::sensitivity::compare_g;
use quadint_core::solver::SolveOptions;

fn e(s: &str) -> Expr {
    parse(s).unwrap()
}

fn certified() -> ProblemSpec {
    ProblemSpec::new(
        GridSpec::new(20.0, 1024).unwrap(),
        vec![e("0.01*exp(-abs(x))")],
        vec![e("1")],
        vec![e("0.2*exp(-x^2)")],
        vec![e("u1^2")],
        1.0,
        ProblemOptions::default(),
    )
    .unwrap()
}

#[test]
fn epsilon_sweep_scales_linearly() {
    let p = certified();
    let opts = SolveOptions { tol: 1e-13, ..Default::default() };
    let mut slopes = Vec::new();
    let mut distance_slopes = Vec::new();
    for eps in [0.02, 0.01, 0.005] {
        let g2 = e(&format!("{}*u1^2", 1.0 + eps));
        let r = compare_g(&p, &[e("u1^2")], &[g2], &opts).unwrap();
        assert!(r.holds && r.margin > 0.0, "eps {eps}: {} vs {}", r.lhs, r.rhs);
        assert!(r.identity_gap <= 1e-12);
        assert!(r.eta_gap <= r.eta_bound);
        slopes.push(r.lhs / eps);
        distance_slopes.push(r.g_distance / eps);
    }
    for s in &distance_slopes {
        assert!((s - distance_slopes[0]).abs() <= 1e-9 * distance_slopes[0]);
    }
    // u depends smoothly on ε, so lhs/ε varies by O(ε).
    for s in &slopes {
        assert!((s / slopes[0] - 1.0).abs() < 0.05, "{slopes:?}");
    }
}

#[test]
fn cubic_perturbation_of_two_components() {
    let p = ProblemSpec::new(
        GridSpec::new(20.0, 512).unwrap(),
        vec![e("0.005*exp(-abs(x))"), e("0.004*exp(-x^2)")],
        vec![e("1"), e("1")],
        vec![e("0.05*exp(-x^2)"), e("0.05*exp(-(x-1)^2)")],
        vec![e("u1*u2"), e("u2^2")],
        1.0,
        ProblemOptions::default(),
    )
    .unwrap();
    let g1 = [e("u1*u2"), e("u2^2")];
    let g2 = [e("u1*u2 + 0.01*u1^3"), e("u2^2")];
    let r = compare_g(&p, &g1, &g2, &SolveOptions::default()).unwrap();
    assert!(r.g_distance_sampled);
    assert!(r.holds);
    assert!(r.identity_gap <= 1e-12);
}
