//! The map `τ_g` and its Picard iteration.
//!
//! With `u = u0 + v`, component `m` of `τ_g v` is
//! `V_m (u0_m + v_m) · (K_m * g_m(u0 + v))`, and fixed points of `τ_g` are
//! exactly the solutions of the original system.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{DomainKind, EvalError, Expr, Point};
use crate::grid::{GridFunction, GridSpec, VectorGridFunction};
use crate::norms::norm_h1_vector;
use crate::problem::{Certificate, Discretization, ProblemError, ProblemSpec};

/// Slack on the ball membership check of [`TauMap::apply`].
pub const BALL_SLACK: f64 = 1e-9;

/// Consecutive growing updates after which the iteration is abandoned.
pub const DIVERGENCE_STEPS: usize = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("the certificate does not establish a contraction; pass force to iterate anyway")]
    Uncertified,
    #[error("iterate norm {norm:e} is outside the ball of radius {rho}")]
    OutsideBall { norm: f64, rho: f64 },
    #[error("expected {expected} components on the problem grid")]
    Shape { expected: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("g[{component}] at node {node}: {source}")]
    Eval {
        component: usize,
        node: usize,
        source: EvalError,
    },
    #[error("no convergence after {} iterations", .0.iterations)]
    NotConverged(Box<Solution>),
    #[error("iteration diverged after {} iterations", .0.iterations)]
    Diverged(Box<Solution>),
}

impl SolverError {
    /// The partial solution carried by non-convergence errors.
    pub fn solution(&self) -> Option<&Solution> {
        match self {
            SolverError::NotConverged(s) | SolverError::Diverged(s) => Some(s),
            _ => None,
        }
    }
}

/// Nodewise `g_m(w_1(x_i), ..., w_N(x_i))`.
pub fn eval_g(g: &[Expr], w: &VectorGridFunction) -> Result<VectorGridFunction, SolverError> {
    if g.len() != w.len() {
        return Err(SolverError::Shape { expected: g.len() });
    }
    let grid = *w.grid();
    let n = grid.points();
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(n); g.len()];
    let mut z = vec![0.0; g.len()];
    for node in 0..n {
        w.node_values(node, &mut z);
        let point = Point::at_u(&z);
        for (component, (gm, col)) in g.iter().zip(out.iter_mut()).enumerate() {
            let value = gm
                .eval(&point)
                .map_err(|source| SolverError::Eval { component, node, source })?;
            col.push(value);
        }
    }
    let components = out.into_iter().map(|values| GridFunction::new(grid, values)).collect();
    Ok(VectorGridFunction::new(components).expect("components share the grid"))
}

/// `τ_g` for one problem, with the kernels transformed once.
#[derive(Debug, Clone)]
pub struct TauMap {
    disc: Discretization,
    g: Vec<Expr>,
    rho: f64,
    enforce: bool,
}

impl TauMap {
    /// Requires `cert.rub_ok` unless `force` is set; forced maps also skip
    /// the ball check.
    pub fn new(p: &ProblemSpec, cert: &Certificate, force: bool) -> Result<Self, SolverError> {
        if !force && !cert.rub_ok {
            return Err(SolverError::Uncertified);
        }
        Ok(TauMap {
            disc: p.discretize()?,
            g: p.nonlinearity().to_vec(),
            rho: p.rho(),
            enforce: !force,
        })
    }

    /// The same discretized data with another nonlinearity.
    pub fn with_nonlinearity(&self, g: Vec<Expr>) -> Result<Self, SolverError> {
        if g.len() != self.g.len() {
            return Err(SolverError::Shape { expected: self.g.len() });
        }
        Ok(TauMap { g, ..self.clone() })
    }

    /// The same map with `u0` replaced by grid values.
    pub fn with_initial(&self, u0: VectorGridFunction) -> Result<Self, SolverError> {
        let disc = self
            .disc
            .with_initial(u0)
            .map_err(|_| SolverError::Shape { expected: self.len() })?;
        Ok(TauMap { disc, ..self.clone() })
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn grid(&self) -> &GridSpec {
        self.disc.grid()
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn check_shape(&self, v: &VectorGridFunction) -> Result<(), SolverError> {
        if v.len() != self.len() || v.grid() != self.grid() {
            return Err(SolverError::Shape { expected: self.len() });
        }
        Ok(())
    }

    pub fn apply(&self, v: &VectorGridFunction) -> Result<VectorGridFunction, SolverError> {
        self.check_shape(v)?;
        if self.enforce {
            let norm = norm_h1_vector(v);
            if norm > self.rho + BALL_SLACK {
                return Err(SolverError::OutsideBall { norm, rho: self.rho });
            }
        }
        let u = self.disc.u0().add(v).expect("shape checked");
        self.image_of(&u)
    }

    /// `V_m u_m (K_m * g_m(u))` for the full field `u`.
    fn image_of(&self, u: &VectorGridFunction) -> Result<VectorGridFunction, SolverError> {
        let gu = eval_g(&self.g, u)?;
        let components = (0..self.len())
            .map(|m| {
                let conv = self.disc.convolve(m, gu.component(m));
                let factor = self.disc.multipliers()[m].mul(u.component(m)).expect("same grid");
                factor.mul(&conv).expect("same grid")
            })
            .collect();
        Ok(VectorGridFunction::new(components).expect("components share the grid"))
    }

    /// `‖u - u0 - V u (K * g(u))‖_{H¹}`.
    pub fn residual(&self, u: &VectorGridFunction) -> Result<f64, SolverError> {
        self.check_shape(u)?;
        let image = self.image_of(u)?;
        let defect = u.sub(self.disc.u0()).and_then(|d| d.sub(&image)).expect("shape checked");
        Ok(norm_h1_vector(&defect))
    }
}

/// `τ_g v` for a certified problem.
pub fn apply_tau(p: &ProblemSpec, cert: &Certificate, v: &VectorGridFunction) -> Result<VectorGridFunction, SolverError> {
    TauMap::new(p, cert, false)?.apply(v)
}

pub fn residual(p: &ProblemSpec, u: &VectorGridFunction) -> Result<f64, SolverError> {
    let tau = TauMap {
        disc: p.discretize()?,
        g: p.nonlinearity().to_vec(),
        rho: p.rho(),
        enforce: false,
    };
    tau.residual(u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Iterate even without a passing certificate.
    pub force: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 10_000,
            force: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TraceStep {
    pub k: usize,
    /// `‖v^{k+1} - v^k‖_{H¹}`.
    pub delta: f64,
    /// `delta_k / delta_{k-1}`; absent for `k = 0` or a zero predecessor.
    pub ratio: Option<f64>,
    /// `‖v^k‖_{H¹}`.
    pub norm: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IterationTrace {
    pub steps: Vec<TraceStep>,
}

impl IterationTrace {
    fn push(&mut self, delta: f64, norm: f64) {
        let k = self.steps.len();
        let ratio = self
            .steps
            .last()
            .filter(|prev| prev.delta > 0.0)
            .map(|prev| delta / prev.delta);
        self.steps.push(TraceStep { k, delta, ratio, norm });
    }

    /// Largest ratio among steps `k >= from`.
    pub fn max_ratio(&self, from: usize) -> Option<f64> {
        self.steps
            .iter()
            .filter(|s| s.k >= from)
            .filter_map(|s| s.ratio)
            .fold(None, |m, r| Some(m.map_or(r, |m: f64| m.max(r))))
    }

    fn growing_run(&self) -> usize {
        self.steps
            .windows(2)
            .rev()
            .take_while(|w| w[1].delta > w[0].delta)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Solution {
    #[cfg_attr(feature = "serde", serde(skip))]
    pub u_p: VectorGridFunction,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub u: VectorGridFunction,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: IterationTrace,
    pub notes: Vec<String>,
}

/// Picard iteration from `v⁰ = 0`.
pub fn solve(p: &ProblemSpec, cert: &Certificate, opts: &SolveOptions) -> Result<Solution, SolverError> {
    let start = VectorGridFunction::zeros(*p.grid(), p.len());
    solve_from(p, cert, &start, opts)
}

pub fn solve_from(
    p: &ProblemSpec,
    cert: &Certificate,
    start: &VectorGridFunction,
    opts: &SolveOptions,
) -> Result<Solution, SolverError> {
    let mut notes = Vec::new();
    if !cert.passed() {
        if !opts.force {
            return Err(SolverError::Uncertified);
        }
        notes.push(String::from(
            "forced run: hypotheses not certified, no contraction or uniqueness claim",
        ));
    }
    let tau = TauMap::new(p, cert, opts.force)?;
    iterate(&tau, start, opts, notes)
}

/// Picard iteration of an already built map.
pub fn iterate(
    tau: &TauMap,
    start: &VectorGridFunction,
    opts: &SolveOptions,
    notes: Vec<String>,
) -> Result<Solution, SolverError> {
    tau.check_shape(start)?;
    let mut v = start.clone();
    let mut trace = IterationTrace::default();
    let mut stopped = false;
    let mut diverged = false;
    for _ in 0..opts.max_iter.max(1) {
        let norm = norm_h1_vector(&v);
        let next = match tau.apply(&v) {
            // g overflowed on the current iterate: the run has blown up.
            Err(SolverError::Eval {
                source: EvalError::Domain { kind: DomainKind::NonFinite, .. },
                ..
            }) if !trace.steps.is_empty() => {
                diverged = true;
                break;
            }
            other => other?,
        };
        let delta = norm_h1_vector(&next.sub(&v).expect("same shape"));
        trace.push(delta, norm);
        v = next;
        if delta <= opts.tol * norm.max(1.0) {
            stopped = true;
            break;
        }
        if !delta.is_finite() || trace.growing_run() >= DIVERGENCE_STEPS {
            diverged = true;
            break;
        }
    }
    let u = tau.disc.u0().add(&v).expect("same shape");
    let residual = if diverged { f64::NAN } else { tau.residual(&u)? };
    let converged = stopped && residual <= 10.0 * opts.tol;
    let solution = Solution {
        iterations: trace.steps.len(),
        u_p: v,
        u,
        residual,
        converged,
        trace,
        notes,
    };
    if converged {
        Ok(solution)
    } else if diverged {
        Err(SolverError::Diverged(Box::new(solution)))
    } else {
        Err(SolverError::NotConverged(Box::new(solution)))
    }
}

/// A random element of the ball of the given `H¹` radius: each component is
/// a sum of up to three Gaussian bumps inside `[-L/2, L/2]`, and the whole
/// vector is scaled to a norm drawn uniformly from `(0, radius]`.
pub fn random_in_ball<R: Rng>(grid: &GridSpec, count: usize, radius: f64, rng: &mut R) -> VectorGridFunction {
    let half = grid.half_width() / 2.0;
    let components = (0..count)
        .map(|_| {
            let bumps: Vec<(f64, f64, f64)> = (0..rng.random_range(1..=3))
                .map(|_| {
                    (
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-half..half),
                        rng.random_range(0.5..2.0),
                    )
                })
                .collect();
            GridFunction::from_fn(*grid, |x| {
                bumps
                    .iter()
                    .map(|&(a, c, w)| {
                        let s = (x - c) / w;
                        a * libm::exp(-s * s)
                    })
                    .sum()
            })
        })
        .collect();
    let v = VectorGridFunction::new(components).expect("components share the grid");
    let norm = norm_h1_vector(&v);
    let target = radius * (1.0 - rng.random::<f64>());
    if norm > 0.0 {
        v.scale(target / norm)
    } else {
        v
    }
}

/// Largest observed `‖τv₁ - τv₂‖ / ‖v₁ - v₂‖` over random pairs in `B_ρ`.
pub fn contraction_probe(p: &ProblemSpec, cert: &Certificate, trials: usize, seed: u64) -> Result<f64, SolverError> {
    contraction_probe_with(&TauMap::new(p, cert, false)?, trials, seed)
}

pub fn contraction_probe_with(tau: &TauMap, trials: usize, seed: u64) -> Result<f64, SolverError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let v1 = random_in_ball(tau.grid(), tau.len(), tau.rho, &mut rng);
        let v2 = random_in_ball(tau.grid(), tau.len(), tau.rho, &mut rng);
        let gap = norm_h1_vector(&v1.sub(&v2).expect("same shape"));
        if gap == 0.0 {
            continue;
        }
        let image_gap = norm_h1_vector(&tau.apply(&v1)?.sub(&tau.apply(&v2)?).expect("same shape"));
        worst = worst.max(image_gap / gap);
    }
    Ok(worst)
}

/// One-line summary of a solve for logs.
pub fn summary_line(s: &Solution) -> String {
    format!(
        "iterations = {}, residual = {:e}, converged = {}, max ratio = {}",
        s.iterations,
        s.residual,
        s.converged,
        s.trace.max_ratio(2).map_or(String::from("-"), |r| format!("{r:.6}"))
    )
}
