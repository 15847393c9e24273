//! Problem data, the constants `Q`, `M`, `σ`, and the hypothesis
//! certificate.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::convolve::{ConvolutionPlan, PreparedKernel};
use crate::expr::{EvalError, Expr, Point, Var};
use crate::grid::{sample, truncation_diagnostic, GridError, GridFunction, GridSpec, VectorGridFunction};
use crate::norms::{c1_norm_over_ball, norm_h1, norm_h1_vector, norm_linf, norm_w11, NormError, ALGEBRA_CONSTANT, DEFAULT_TAIL_TOLERANCE};

/// Samples with absolute value above this count as nonzero.
pub const NONTRIVIAL_THRESHOLD: f64 = 1e-12;

/// Refinement factor of the dense scan in [`operator_norm_bound`].
pub const OPERATOR_SCAN_REFINEMENT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Kernels,
    Multipliers,
    Initial,
    Nonlinearity,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Kernels => "kernels",
            Field::Multipliers => "multipliers",
            Field::Initial => "initial",
            Field::Nonlinearity => "g",
        }
    }
}

/// A field of the problem, optionally narrowed to one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub field: Field,
    pub index: Option<usize>,
}

impl Location {
    fn at(field: Field, index: usize) -> Self {
        Location {
            field,
            index: Some(index),
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}[{i}]", self.field.name()),
            None => f.write_str(self.field.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("the system needs at least one component")]
    Empty,
    #[error("{field} has {found} entries, expected {expected}")]
    Count {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{location} uses {var}, which is not allowed there")]
    Variable { location: Location, var: Var },
    #[error("rho must lie in (0, 1], got {0}")]
    Rho(f64),
    #[error("c_a must be positive and finite, got {0}")]
    AlgebraConstant(f64),
    #[error("safety_factor must be finite and at least 1, got {0}")]
    SafetyFactor(f64),
    #[error("tail_tolerance must be positive, got {0}")]
    TailTolerance(f64),
    #[error("M_override must be positive and finite, got {0}")]
    MOverride(f64),
    #[error("{location} at node {node}: {source}")]
    Sample {
        location: Location,
        node: usize,
        source: EvalError,
    },
    #[error("{location}: {source}")]
    Eval { location: Location, source: EvalError },
    #[error("{location}: {source}")]
    Norm { location: Location, source: NormError },
}

fn sampled(e: &Expr, grid: &GridSpec, location: Location) -> Result<GridFunction, ProblemError> {
    sample(e, grid).map_err(|err| match err {
        GridError::Sample { node, source } => ProblemError::Sample { location, node, source },
        _ => unreachable!("sampling only fails on evaluation"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ProblemOptions {
    pub c_a: f64,
    pub m_override: Option<f64>,
    pub safety_factor: f64,
    pub tail_tolerance: f64,
}

impl Default for ProblemOptions {
    fn default() -> Self {
        ProblemOptions {
            c_a: ALGEBRA_CONSTANT,
            m_override: None,
            safety_factor: 1.05,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        }
    }
}

/// A validated system `u_m = u0_m + V_m u_m (K_m * g_m(u))`, `m = 1..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    grid: GridSpec,
    kernels: Vec<Expr>,
    multipliers: Vec<Expr>,
    initial: Vec<Expr>,
    nonlinearity: Vec<Expr>,
    rho: f64,
    options: ProblemOptions,
}

impl ProblemSpec {
    pub fn new(
        grid: GridSpec,
        kernels: Vec<Expr>,
        multipliers: Vec<Expr>,
        initial: Vec<Expr>,
        nonlinearity: Vec<Expr>,
        rho: f64,
        options: ProblemOptions,
    ) -> Result<Self, ProblemError> {
        let n = kernels.len();
        if n == 0 {
            return Err(ProblemError::Empty);
        }
        for (field, found) in [
            ("multipliers", multipliers.len()),
            ("initial", initial.len()),
            ("g", nonlinearity.len()),
        ] {
            if found != n {
                return Err(ProblemError::Count { field, expected: n, found });
            }
        }
        for (field, exprs) in [
            (Field::Kernels, &kernels),
            (Field::Multipliers, &multipliers),
            (Field::Initial, &initial),
        ] {
            for (i, e) in exprs.iter().enumerate() {
                if let Some(&var) = e.variables().iter().find(|v| **v != Var::X) {
                    return Err(ProblemError::Variable { location: Location::at(field, i), var });
                }
            }
        }
        check_nonlinearity(&nonlinearity)?;
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(ProblemError::Rho(rho));
        }
        check_options(&options)?;
        Ok(ProblemSpec {
            grid,
            kernels,
            multipliers,
            initial,
            nonlinearity,
            rho,
            options,
        })
    }

    /// Same problem with a different nonlinearity.
    pub fn with_nonlinearity(&self, g: Vec<Expr>) -> Result<Self, ProblemError> {
        if g.len() != self.len() {
            return Err(ProblemError::Count {
                field: "g",
                expected: self.len(),
                found: g.len(),
            });
        }
        check_nonlinearity(&g)?;
        Ok(ProblemSpec {
            nonlinearity: g,
            ..self.clone()
        })
    }

    pub fn with_options(&self, options: ProblemOptions) -> Result<Self, ProblemError> {
        check_options(&options)?;
        Ok(ProblemSpec {
            options,
            ..self.clone()
        })
    }

    /// Number of equations `N`.
    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn kernels(&self) -> &[Expr] {
        &self.kernels
    }

    pub fn multipliers(&self) -> &[Expr] {
        &self.multipliers
    }

    pub fn initial(&self) -> &[Expr] {
        &self.initial
    }

    pub fn nonlinearity(&self) -> &[Expr] {
        &self.nonlinearity
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn options(&self) -> &ProblemOptions {
        &self.options
    }

    pub fn discretize(&self) -> Result<Discretization, ProblemError> {
        Discretization::new(self)
    }
}

fn check_nonlinearity(g: &[Expr]) -> Result<(), ProblemError> {
    let n = g.len() as u32;
    for (i, e) in g.iter().enumerate() {
        let bad = e.variables().into_iter().find(|v| match v {
            Var::X => true,
            Var::U(k) => *k == 0 || *k > n,
        });
        if let Some(var) = bad {
            return Err(ProblemError::Variable {
                location: Location::at(Field::Nonlinearity, i),
                var,
            });
        }
    }
    Ok(())
}

fn check_options(o: &ProblemOptions) -> Result<(), ProblemError> {
    if !(o.c_a.is_finite() && o.c_a > 0.0) {
        return Err(ProblemError::AlgebraConstant(o.c_a));
    }
    if !(o.safety_factor.is_finite() && o.safety_factor >= 1.0) {
        return Err(ProblemError::SafetyFactor(o.safety_factor));
    }
    if !(o.tail_tolerance > 0.0) {
        return Err(ProblemError::TailTolerance(o.tail_tolerance));
    }
    if let Some(m) = o.m_override {
        if !(m.is_finite() && m > 0.0) {
            return Err(ProblemError::MOverride(m));
        }
    }
    Ok(())
}

/// Sampled problem data ready for iteration.
#[derive(Debug, Clone)]
pub struct Discretization {
    u0: VectorGridFunction,
    multipliers: Vec<GridFunction>,
    kernels: Vec<GridFunction>,
    plan: ConvolutionPlan,
    prepared: Vec<PreparedKernel>,
}

impl Discretization {
    fn new(p: &ProblemSpec) -> Result<Self, ProblemError> {
        let grid = p.grid;
        let lag = grid.lag_grid();
        let sample_all = |field, exprs: &[Expr], on: &GridSpec| {
            exprs
                .iter()
                .enumerate()
                .map(|(i, e)| sampled(e, on, Location::at(field, i)))
                .collect::<Result<Vec<_>, _>>()
        };
        let kernels = sample_all(Field::Kernels, &p.kernels, &lag)?;
        let multipliers = sample_all(Field::Multipliers, &p.multipliers, &grid)?;
        let u0 = VectorGridFunction::new(sample_all(Field::Initial, &p.initial, &grid)?)
            .expect("components share the grid");
        let plan = ConvolutionPlan::new(grid);
        let prepared = kernels
            .iter()
            .map(|k| plan.prepare(k).expect("kernel sampled on the lag grid"))
            .collect();
        Ok(Discretization {
            u0,
            multipliers,
            kernels,
            plan,
            prepared,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.u0.grid()
    }

    /// Same data with `u0` replaced by grid values.
    pub fn with_initial(&self, u0: VectorGridFunction) -> Result<Self, GridError> {
        if u0.len() != self.u0.len() || u0.grid() != self.u0.grid() {
            return Err(GridError::Mismatch);
        }
        Ok(Discretization { u0, ..self.clone() })
    }

    pub fn u0(&self) -> &VectorGridFunction {
        &self.u0
    }

    pub fn multipliers(&self) -> &[GridFunction] {
        &self.multipliers
    }

    /// Kernels on the lag grid.
    pub fn kernels(&self) -> &[GridFunction] {
        &self.kernels
    }

    /// `K_m * f` on the grid.
    pub fn convolve(&self, m: usize, f: &GridFunction) -> GridFunction {
        self.plan
            .apply(&self.prepared[m], f)
            .expect("f lives on the problem grid")
    }
}

/// `‖V‖_∞ + ‖V'‖_∞` over a dense scan of `[-L, L]`: an upper bound for the
/// norm of `φ ↦ Vφ` on `H¹`.
pub fn operator_norm_bound(v: &Expr, grid: &GridSpec) -> Result<f64, GridError> {
    let dense = grid.refined(OPERATOR_SCAN_REFINEMENT);
    let value = sample(v, &dense)?;
    let slope = sample(&v.differentiate(Var::X), &dense)?;
    Ok(norm_linf(&value) + norm_linf(&slope))
}

/// `sqrt(Σ_m ‖T_m‖² ‖K_m‖²_{W^{1,1}})`.
pub fn compute_q(t_norms: &[f64], k_w11: &[f64]) -> f64 {
    assert_eq!(t_norms.len(), k_w11.len());
    let sum: f64 = t_norms
        .iter()
        .zip(k_w11)
        .map(|(t, k)| {
            let p = t * k;
            p * p
        })
        .sum();
    libm::sqrt(sum)
}

/// Radius `(‖u0‖_{H¹} + 1)/√2` of the ball `I ⊂ ℝᴺ` reached by `u0 + v`,
/// `v ∈ B_ρ`.
pub fn ball_radius(u0_h1: f64) -> f64 {
    (u0_h1 + 1.0) * core::f64::consts::FRAC_1_SQRT_2
}

pub fn compute_sigma(c_a: f64, q: f64, m: f64, u0_h1: f64) -> f64 {
    2.0 * c_a * q * m * (u0_h1 + 1.0)
}

/// Outcome of the hypothesis checks together with every constant they use.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Certificate {
    /// Upper bounds for `‖T_m‖`.
    pub t_norms: Vec<f64>,
    /// Probe-based lower estimates of `‖T_m‖`.
    pub t_lower: Vec<f64>,
    pub k_w11: Vec<f64>,
    pub q: f64,
    pub u0_h1: f64,
    pub ball_radius: f64,
    /// C¹ norm of `g` over the ball before the safety factor.
    pub g_c1: f64,
    /// Set when `g_c1` comes from sampling and may be low.
    pub g_c1_sampled: bool,
    pub m: f64,
    pub c_a: f64,
    pub rho: f64,
    pub sigma: f64,
    pub rub_lhs: f64,
    pub rub_rhs: f64,
    pub assumption1_ok: bool,
    pub assumption2_ok: bool,
    pub rub_ok: bool,
    pub notes: Vec<String>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.assumption1_ok && self.assumption2_ok && self.rub_ok
    }
}

/// Run the checks on kernels, initial data, multipliers and nonlinearity,
/// then condition `c_a M (‖u0‖+1)² Q ≤ ρ/2`.
pub fn certify(p: &ProblemSpec) -> Result<Certificate, ProblemError> {
    let disc = p.discretize()?;
    let grid = p.grid;
    let tol = p.options.tail_tolerance;
    let mut notes = Vec::new();
    let mut assumption1_ok = true;

    // (a) kernels
    let mut k_w11 = Vec::with_capacity(p.len());
    for (m, (k, e)) in disc.kernels.iter().zip(&p.kernels).enumerate() {
        let w11 = norm_w11(k);
        k_w11.push(w11);
        let at = Location::at(Field::Kernels, m);
        if !k.is_nontrivial(NONTRIVIAL_THRESHOLD) {
            assumption1_ok = false;
            notes.push(format!("Assumption 1.1: {at} vanishes on the grid"));
        }
        if !w11.is_finite() {
            assumption1_ok = false;
            notes.push(format!("Assumption 1.1: {at} has infinite W^(1,1) norm"));
        }
        let tail = truncation_diagnostic(&sampled(e, &grid, at)?);
        if !tail.within(tol) {
            assumption1_ok = false;
            notes.push(format!(
                "Assumption 1.1: {at} tail fraction {:.3e} exceeds {tol:.1e}; enlarge L",
                tail.tail_fraction
            ));
        }
    }

    // (b) initial data
    for (m, u) in disc.u0.components().iter().enumerate() {
        let tail = truncation_diagnostic(u);
        if !tail.within(tol) {
            assumption1_ok = false;
            notes.push(format!(
                "Assumption 1.1: {} tail fraction {:.3e} exceeds {tol:.1e}; enlarge L",
                Location::at(Field::Initial, m),
                tail.tail_fraction
            ));
        }
    }
    if !disc.u0.components().iter().any(|u| u.is_nontrivial(NONTRIVIAL_THRESHOLD)) {
        assumption1_ok = false;
        notes.push(String::from("Assumption 1.1: every component of initial vanishes"));
    }
    let u0_h1 = norm_h1_vector(&disc.u0);

    // (c) multiplication operators
    let mut t_norms = Vec::with_capacity(p.len());
    let mut t_lower = Vec::with_capacity(p.len());
    for (m, (v, e)) in disc.multipliers.iter().zip(&p.multipliers).enumerate() {
        let at = Location::at(Field::Multipliers, m);
        let t = operator_norm_bound(e, &grid).map_err(|err| match err {
            GridError::Sample { node, source } => ProblemError::Sample { location: at, node, source },
            _ => unreachable!("sampling only fails on evaluation"),
        })?;
        t_norms.push(t);
        let lower = probe_operator_norm(v);
        t_lower.push(lower);
        notes.push(format!("{at}: operator norm in [{lower:.6e}, {t:.6e}]"));
        if !(t > 0.0 && t.is_finite()) {
            assumption1_ok = false;
            notes.push(format!("Assumption 1.1: need 0 < ||T|| < inf for {at}, got {t:e}"));
        }
    }
    let q = compute_q(&t_norms, &k_w11);
    if !(q > 0.0) {
        assumption1_ok = false;
        notes.push(String::from("Assumption 1.1: Q = 0"));
    }

    // (d) nonlinearity
    let mut assumption2_ok = true;
    let origin = vec![0.0; p.len()];
    for (m, g) in p.nonlinearity.iter().enumerate() {
        let at = Location::at(Field::Nonlinearity, m);
        let g0 = g
            .eval(&Point::at_u(&origin))
            .map_err(|source| ProblemError::Eval { location: at, source })?;
        if g0 != 0.0 {
            assumption2_ok = false;
            notes.push(format!("Assumption 1.2: {at} at the origin is {g0:e}, must be 0"));
        }
    }
    let radius = ball_radius(u0_h1);
    let estimate = c1_norm_over_ball(&p.nonlinearity, radius).map_err(|source| ProblemError::Norm {
        location: Location {
            field: Field::Nonlinearity,
            index: None,
        },
        source,
    })?;
    if !(estimate.value > NONTRIVIAL_THRESHOLD) {
        assumption2_ok = false;
        notes.push(String::from("Assumption 1.2: g vanishes identically on the ball I"));
    }
    let m = match p.options.m_override {
        Some(m) => {
            if m < estimate.value {
                assumption2_ok = false;
                notes.push(format!(
                    "Assumption 1.2: M_override {m:e} is below the C1 norm {:e} of g on I",
                    estimate.value
                ));
            }
            m
        }
        None => estimate.value * p.options.safety_factor,
    };
    if estimate.lower_estimate {
        notes.push(format!(
            "M from a sampled C1 norm {:e} (a lower estimate) times safety factor",
            estimate.value
        ));
    }

    // (e) contraction condition
    let c_a = p.options.c_a;
    let sigma = compute_sigma(c_a, q, m, u0_h1);
    let rub_lhs = c_a * m * (u0_h1 + 1.0) * (u0_h1 + 1.0) * q;
    let rub_rhs = p.rho / 2.0;
    let rub_ok = rub_lhs <= rub_rhs && sigma < 1.0;
    if !rub_ok {
        notes.push(format!(
            "condition (rub): c_a M (||u0||+1)^2 Q = {rub_lhs:.6e} exceeds rho/2 = {rub_rhs:.6e} (sigma = {sigma:.6e})"
        ));
    }

    Ok(Certificate {
        t_norms,
        t_lower,
        k_w11,
        q,
        u0_h1,
        ball_radius: radius,
        g_c1: estimate.value,
        g_c1_sampled: estimate.lower_estimate,
        m,
        c_a,
        rho: p.rho,
        sigma,
        rub_lhs,
        rub_rhs,
        assumption1_ok,
        assumption2_ok,
        rub_ok,
        notes,
    })
}

/// `max ‖Vφ‖_{H¹}/‖φ‖_{H¹}` over a fixed family of Gaussian probes.
fn probe_operator_norm(v: &GridFunction) -> f64 {
    let grid = *v.grid();
    let half = grid.half_width();
    let mut best = 0.0f64;
    for c in [-0.5, -0.25, 0.0, 0.25, 0.5] {
        for w in [0.25, 1.0, 4.0] {
            let centre = c * half;
            let phi = GridFunction::from_fn(grid, |x| {
                let s = (x - centre) / w;
                libm::exp(-s * s)
            });
            let denom = norm_h1(&phi);
            if denom > 0.0 {
                let vphi = v.mul(&phi).expect("same grid");
                best = best.max(norm_h1(&vphi) / denom);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use alloc::vec;

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn grid() -> GridSpec {
        GridSpec::new(20.0, 1024).unwrap()
    }

    fn scalar(k: &str, v: &str, u0: &str, g: &str, rho: f64) -> Result<ProblemSpec, ProblemError> {
        ProblemSpec::new(grid(), vec![e(k)], vec![e(v)], vec![e(u0)], vec![e(g)], rho, ProblemOptions::default())
    }

    #[test]
    fn operator_norm_examples() {
        let g = grid();
        assert_eq!(operator_norm_bound(&e("1"), &g).unwrap(), 1.0);
        assert_eq!(operator_norm_bound(&e("0"), &g).unwrap(), 0.0);
        assert_eq!(operator_norm_bound(&e("tanh(x)"), &g).unwrap(), 2.0);
        assert!(operator_norm_bound(&e("log(x)"), &g).is_err());
    }

    #[test]
    fn q_examples() {
        assert_eq!(compute_q(&[1.0], &[4.0]), 4.0);
        assert_eq!(compute_q(&[1.0, 2.0], &[3.0, 2.0]), 5.0);
        assert_eq!(compute_q(&[0.0, 0.0], &[1.0, 2.0]), 0.0);
    }

    #[test]
    fn radius_and_sigma() {
        assert_eq!(ball_radius(0.0), core::f64::consts::FRAC_1_SQRT_2);
        assert!((ball_radius(1.0) - 2f64.sqrt()).abs() < 1e-15);
        assert!((ball_radius(2f64.sqrt() - 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(compute_sigma(1.0, 1.0, 0.0, 3.0), 0.0);
        assert!((compute_sigma(1.0, 1.0, 0.1, 0.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert_eq!(scalar("exp(-abs(x))", "1", "0", "u1^2", 0.0), Err(ProblemError::Rho(0.0)));
        assert_eq!(scalar("exp(-abs(x))", "1", "0", "u1^2", 1.5), Err(ProblemError::Rho(1.5)));
        assert!(matches!(
            scalar("exp(-abs(x))", "1", "0", "u2", 1.0),
            Err(ProblemError::Variable { var: Var::U(2), .. })
        ));
        assert!(matches!(
            scalar("exp(-abs(x))", "u1", "0", "u1", 1.0),
            Err(ProblemError::Variable { location: Location { field: Field::Multipliers, index: Some(0) }, .. })
        ));
        assert!(matches!(scalar("exp(-abs(x))", "1", "0", "x * u1", 1.0), Err(ProblemError::Variable { .. })));
        let err = ProblemSpec::new(grid(), vec![e("1")], vec![], vec![e("0")], vec![e("u1")], 1.0, ProblemOptions::default());
        assert_eq!(err, Err(ProblemError::Count { field: "multipliers", expected: 1, found: 0 }));
        let p = scalar("exp(-abs(x))", "1", "0", "u1^2", 1.0).unwrap();
        for bad in [
            ProblemOptions { c_a: 0.0, ..Default::default() },
            ProblemOptions { safety_factor: 0.9, ..Default::default() },
            ProblemOptions { m_override: Some(-1.0), ..Default::default() },
        ] {
            assert!(p.with_options(bad).is_err());
        }
    }

    // Reference instance. Analytic factors: ‖T‖ = 1, ‖K‖_{W11} = 4, so Q = 4,
    // and M ≥ r² + 2r with r = (‖u0‖+1)/√2 > 0.7, so (rub) fails.
    #[test]
    fn reference_instance_is_not_certified() {
        let p = scalar("exp(-abs(x))", "1", "0.01*exp(-x^2)", "u1^2", 1.0).unwrap();
        let c = certify(&p).unwrap();
        assert!(c.assumption1_ok && c.assumption2_ok);
        assert!(!c.rub_ok);
        assert_eq!(c.t_norms, vec![1.0]);
        assert!((c.q - 4.0).abs() < 2.0 * p.grid().spacing(), "{}", c.q);
        let r = c.ball_radius;
        assert!((c.g_c1 - (r * r + 2.0 * r)).abs() < 1e-12);
        assert!((c.m - 1.05 * c.g_c1).abs() < 1e-12);
        assert!(c.sigma > 1.0);
        assert!(c.notes.iter().any(|n| n.contains("condition (rub)")));
    }

    #[test]
    fn scaled_kernel_instance_is_certified() {
        let p = scalar("0.02*exp(-abs(x))", "1", "0.01*exp(-x^2)", "u1^2", 1.0).unwrap();
        let c = certify(&p).unwrap();
        assert!(c.passed(), "{:?}", c.notes);
        assert!(c.sigma < 1.0);
        let identity = c.sigma * (c.u0_h1 + 1.0) / 2.0;
        assert!((c.rub_lhs - identity).abs() <= 1e-15 * c.rub_lhs);
        let q2 = compute_q(&c.t_norms, &c.k_w11);
        assert_eq!(c.q, q2);
        assert!(c.t_lower[0] <= c.t_norms[0] + 1e-12);
    }

    #[test]
    fn g_must_vanish_at_origin() {
        let p = scalar("0.02*exp(-abs(x))", "1", "0.01*exp(-x^2)", "u1 + 1", 1.0).unwrap();
        let c = certify(&p).unwrap();
        assert!(!c.assumption2_ok);
        assert!(c.notes.iter().any(|n| n.starts_with("Assumption 1.2")));
    }

    #[test]
    fn zero_multiplier_fails_assumption_one() {
        let p = scalar("exp(-abs(x))", "0", "0.01*exp(-x^2)", "u1^2", 1.0).unwrap();
        let c = certify(&p).unwrap();
        assert!(!c.assumption1_ok);
        assert_eq!(c.q, 0.0);
        assert_eq!(c.sigma, 0.0);
    }

    #[test]
    fn slow_kernel_fails_tail_check() {
        let p = scalar("1/(1 + x^2)", "1", "0.01*exp(-x^2)", "u1^2", 1.0).unwrap();
        let c = certify(&p).unwrap();
        assert!(!c.assumption1_ok);
        assert!(c.notes.iter().any(|n| n.contains("kernels[0] tail")));
    }

    #[test]
    fn m_override_below_estimate_is_flagged() {
        let p = scalar("0.02*exp(-abs(x))", "1", "0.01*exp(-x^2)", "u1^2", 1.0)
            .unwrap()
            .with_options(ProblemOptions { m_override: Some(0.1), ..Default::default() })
            .unwrap();
        let c = certify(&p).unwrap();
        assert_eq!(c.m, 0.1);
        assert!(!c.assumption2_ok);
    }

    #[test]
    fn domain_errors_name_the_field() {
        let p = scalar("exp(-abs(x))", "1", "log(x)", "u1^2", 1.0).unwrap();
        let err = certify(&p).unwrap_err();
        assert!(alloc::format!("{err}").starts_with("initial[0] at node"));
        let p = scalar("exp(-abs(x))", "1", "exp(-x^2)", "log(u1)", 1.0).unwrap();
        assert!(matches!(certify(&p), Err(ProblemError::Eval { .. })));
    }
}
