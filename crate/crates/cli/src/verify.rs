//! Seeded property suite: embedding, algebra, Young, FFT vs direct,
//! symbolic vs finite-difference gradients and analytic oracles.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use quadint_core::convolve::{convolve_direct, young_defect_with, ConvolutionPlan};
use quadint_core::expr::{derivative_mismatch, random_expr, Var};
use quadint_core::grid::{GridFunction, GridSpec};
use quadint_core::norms::{
    algebra_defect, embedding_ratio, norm_h1, norm_l2, norm_linf, norm_w11, ALGEBRA_CONSTANT,
    EMBEDDING_CONSTANT,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_POINTS: usize = 4096;
pub const HALF_WIDTH: f64 = 20.0;
const FFT_POINTS: usize = 512;
const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub seed: u64,
    pub points: usize,
    pub inject_circular: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: DEFAULT_SEED,
            points: DEFAULT_POINTS,
            inject_circular: false,
        }
    }
}

/// One line of the table. `worst` is compared against `limit` with `<=`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyRow {
    pub name: &'static str,
    pub samples: usize,
    pub worst: f64,
    pub limit: f64,
    pub passed: bool,
    pub measure: &'static str,
}

impl PropertyRow {
    fn new(name: &'static str, samples: usize, worst: f64, limit: f64, measure: &'static str) -> Self {
        PropertyRow {
            name,
            samples,
            worst,
            limit,
            passed: worst <= limit,
            measure,
        }
    }

    pub fn margin(&self) -> f64 {
        self.limit - self.worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub points: usize,
    pub half_width: f64,
    pub inject_circular: bool,
    pub rows: Vec<PropertyRow>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failing(&self) -> Vec<&'static str> {
        self.rows.iter().filter(|r| !r.passed).map(|r| r.name).collect()
    }
}

/// A stream of the seeded generator reserved for sample `item` of property
/// `property`, so results do not depend on scheduling.
fn stream(seed: u64, property: u64, item: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((property << 32) | item as u64);
    rng
}

/// `Σ a_i exp(-((x - c_i)/w_i)²)` with 1 to 4 random terms.
pub fn gaussian_mixture<R: Rng>(grid: GridSpec, rng: &mut R) -> GridFunction {
    let bumps: Vec<(f64, f64, f64)> = (0..rng.random_range(1..=4))
        .map(|_| {
            (
                rng.random_range(-2.0..2.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(0.3..2.0),
            )
        })
        .collect();
    GridFunction::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|&(a, c, w)| a * (-((x - c) / w).powi(2)).exp())
            .sum()
    })
}

fn worst(values: impl ParallelIterator<Item = f64>) -> f64 {
    values.reduce(|| f64::NEG_INFINITY, f64::max)
}

fn plan_for(grid: GridSpec, opts: &VerifyOptions) -> ConvolutionPlan {
    if opts.inject_circular {
        ConvolutionPlan::circular(grid)
    } else {
        ConvolutionPlan::new(grid)
    }
}

pub fn run(opts: &VerifyOptions) -> Result<VerifyReport, quadint_core::grid::GridError> {
    let grid = GridSpec::new(HALF_WIDTH, opts.points)?;
    let seed = opts.seed;
    let mut rows = Vec::new();

    let ratio = worst((0..200).into_par_iter().map(|i| {
        let f = gaussian_mixture(grid, &mut stream(seed, 1, i));
        embedding_ratio(&f).map_or(f64::INFINITY, |r| if r.certified { r.ratio } else { f64::INFINITY })
    }));
    rows.push(PropertyRow::new("embedding", 200, ratio, EMBEDDING_CONSTANT + 1e-3, "|f|_inf / |f|_H1"));

    let witness = embedding_ratio(&GridFunction::from_fn(grid, |x| (-x.abs()).exp()))
        .map_or(f64::INFINITY, |r| (r.ratio - FRAC_1_SQRT_2).abs());
    rows.push(PropertyRow::new("embedding_witness", 1, witness, 2e-2, "|ratio(e^-|x|) - 1/sqrt2|"));

    let algebra = worst((0..200).into_par_iter().map(|i| {
        let rng = &mut stream(seed, 2, i);
        let (f, g) = (gaussian_mixture(grid, rng), gaussian_mixture(grid, rng));
        let defect = algebra_defect(&f, &g, ALGEBRA_CONSTANT).unwrap_or(f64::INFINITY);
        defect / (norm_h1(&f) * norm_h1(&g))
    }));
    rows.push(PropertyRow::new("algebra", 200, algebra, 1e-3, "defect / (|f|_H1 |g|_H1)"));

    let plan = plan_for(grid, opts);
    let young = worst((0..100).into_par_iter().map(|i| {
        let rng = &mut stream(seed, 3, i);
        let k = gaussian_mixture(grid.lag_grid(), rng);
        let f = gaussian_mixture(grid, rng);
        match young_defect_with(&plan, &k, &f) {
            Ok(d) => (d.l2_defect / d.l2_bound).max(d.deriv_defect / d.deriv_bound),
            Err(_) => f64::INFINITY,
        }
    }));
    rows.push(PropertyRow::new("young", 100, young, 1e-6, "defect / bound"));

    let small = GridSpec::new(HALF_WIDTH, FFT_POINTS.min(opts.points))?;
    let plan = plan_for(small, opts);
    let gap = |k: &GridFunction, f: &GridFunction| match (plan.convolve(k, f), convolve_direct(k, f)) {
        (Ok(a), Ok(b)) => norm_linf(&a.sub(&b).expect("same grid")),
        _ => f64::INFINITY,
    };
    // A wide kernel against off-center mass exposes any wraparound; f still
    // vanishes at the ends, where the two quadratures differ.
    let edge = gap(
        &GridFunction::from_fn(small.lag_grid(), |x| (-(x / 6.0).abs()).exp()),
        &GridFunction::from_fn(small, |x| (-(x - 0.6 * HALF_WIDTH).powi(2)).exp()),
    );
    let fft = worst((0..20).into_par_iter().map(|i| {
        let rng = &mut stream(seed, 4, i);
        let k = gaussian_mixture(small.lag_grid(), rng);
        let f = gaussian_mixture(small, rng);
        gap(&k, &f)
    }))
    .max(edge);
    rows.push(PropertyRow::new("fft_vs_direct", 21, fft, 1e-10, "max |fft - direct|"));

    let vars = [Var::U(1), Var::U(2), Var::U(3)];
    let gradients = worst((0..1000).into_par_iter().map(|i| {
        let rng = &mut stream(seed, 5, i);
        loop {
            let e = random_expr(rng, 6, &vars);
            let grad = e.gradient(3);
            let z: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let m: Option<Vec<f64>> = (0..3)
                .map(|k| derivative_mismatch(&e, &grad[k], k, &z, FD_STEP))
                .collect();
            if let Some(m) = m {
                return m.into_iter().fold(0.0, f64::max);
            }
        }
    }));
    rows.push(PropertyRow::new("gradients", 1000, gradients, 1e-5, "|d - fd| / (1 + |d|)"));

    let plan = plan_for(grid, opts);
    let gauss = GridFunction::from_fn(grid, |x| (-x * x).exp());
    let conv = plan
        .convolve(&GridFunction::from_fn(grid.lag_grid(), |x| (-x * x).exp()), &gauss)
        .map_or(f64::INFINITY, |c| {
            let exact = GridFunction::from_fn(grid, |x| (PI / 2.0).sqrt() * (-x * x / 2.0).exp());
            norm_linf(&c.sub(&exact).expect("same grid"))
        });
    let h1_exact = (2.0 * (PI / 2.0).sqrt()).sqrt();
    rows.push(PropertyRow::new("oracle_l2", 1, (norm_l2(&gauss) - (PI / 2.0).powf(0.25)).abs(), 1e-6, "|computed - exact|"));
    rows.push(PropertyRow::new("oracle_h1", 1, (norm_h1(&gauss) - h1_exact).abs(), 1e-4, "|computed - exact|"));
    let laplace = GridFunction::from_fn(grid.lag_grid(), |x| (-x.abs()).exp());
    rows.push(PropertyRow::new("oracle_w11", 1, (norm_w11(&laplace) - 4.0).abs(), 2e-2, "|computed - exact|"));
    rows.push(PropertyRow::new("oracle_convolution", 1, conv, 1e-6, "max |computed - exact|"));

    let passed = rows.iter().all(|r| r.passed);
    Ok(VerifyReport {
        seed,
        points: opts.points,
        half_width: HALF_WIDTH,
        inject_circular: opts.inject_circular,
        rows,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementStep {
    pub points: usize,
    pub passed: bool,
    pub failing: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementStudy {
    pub steps: Vec<RefinementStep>,
    /// Largest grid size at which some property failed.
    pub failure_points: Option<usize>,
}

/// Run the suite at `opts.points`, then halve the grid until a property
/// fails or the grid reaches its minimum size.
pub fn refinement_study(opts: &VerifyOptions) -> Result<RefinementStudy, quadint_core::grid::GridError> {
    let mut steps = Vec::new();
    let mut points = opts.points;
    loop {
        let report = run(&VerifyOptions { points, ..*opts })?;
        steps.push(RefinementStep {
            points,
            passed: report.passed,
            failing: report.failing(),
        });
        if !report.passed {
            return Ok(RefinementStudy { steps, failure_points: Some(points) });
        }
        if points / 2 < 16 || !(points / 2).is_multiple_of(2) {
            return Ok(RefinementStudy { steps, failure_points: None });
        }
        points /= 2;
    }
}
