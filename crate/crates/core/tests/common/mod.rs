#![allow(dead_code)]

use quadint_core::expr::{parse, Expr};
use quadint_core::grid::{GridFunction, GridSpec};
use quadint_core::norms::norm_l2;
use quadint_core::solver::TauMap;
use rand::Rng;

pub fn e(s: &str) -> Expr {
    parse(s).unwrap()
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

/// `u = Σ ε^j w_j` with `w_0 = u0`, `w_j = V Σ_{a+b=j-1} w_a (K * w_b)`:
/// the power series in ε of the fixed point of `u = u0 + V u (K * ε u)`.
pub fn epsilon_series(tau: &TauMap, eps: f64) -> GridFunction {
    let disc = tau.discretization();
    let v = &disc.multipliers()[0];
    let mut terms = vec![disc.u0().component(0).clone()];
    let mut convs = vec![disc.convolve(0, &terms[0])];
    let mut sum = terms[0].clone();
    let mut scale = 1.0;
    for j in 1..80 {
        let mut w = GridFunction::zeros(*disc.grid());
        for a in 0..j {
            w = w.add(&terms[a].mul(&convs[j - 1 - a]).unwrap()).unwrap();
        }
        let w = w.mul(v).unwrap();
        scale *= eps;
        let contribution = w.scale(scale);
        sum = sum.add(&contribution).unwrap();
        convs.push(disc.convolve(0, &w));
        terms.push(w);
        if norm_l2(&contribution) < 1e-20 {
            return sum;
        }
    }
    panic!("series did not settle");
}

/// `u0 = u* - V u* (K * u*²)` on the grid of `tau`, which makes `u*` the
/// fixed point for `g = u1²`.
pub fn manufactured_initial(tau: &TauMap, star: &GridFunction) -> GridFunction {
    let disc = tau.discretization();
    let conv = disc.convolve(0, &star.mul(star).unwrap());
    let image = disc.multipliers()[0].mul(star).unwrap().mul(&conv).unwrap();
    star.sub(&image).unwrap()
}
