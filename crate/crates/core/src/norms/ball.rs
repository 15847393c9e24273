use alloc::vec;
use alloc::vec::Vec;

use super::NormError;
use crate::expr::{Expr, Point};

/// Sampling budget for [`c1_norm_over_ball_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallScan {
    /// Points of the uniform scan of `[-r, r]` when `N = 1`.
    pub line_points: usize,
    /// Quasi-random points in the ball when `N >= 2`.
    pub samples: usize,
    /// Best candidates per function refined by hill climbing.
    pub refine_from: usize,
}

impl Default for BallScan {
    fn default() -> Self {
        BallScan {
            line_points: 10_001,
            samples: 100_000,
            refine_from: 10,
        }
    }
}

/// Estimate of `‖g‖_{C¹(I)} = Σ_m (max_I |g_m| + Σ_n max_I |∂g_m/∂z_n|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct C1Estimate {
    pub value: f64,
    /// Set for `N >= 2`, where sampling can only bound the maximum from
    /// below.
    pub lower_estimate: bool,
}

pub fn c1_norm_over_ball(g: &[Expr], radius: f64) -> Result<C1Estimate, NormError> {
    c1_norm_over_ball_with(g, radius, &BallScan::default())
}

pub fn c1_norm_over_ball_with(g: &[Expr], radius: f64, scan: &BallScan) -> Result<C1Estimate, NormError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(NormError::Radius(radius));
    }
    let dim = g.len();
    if let Some(used) = g.iter().map(Expr::max_component).max().filter(|&k| k as usize > dim) {
        return Err(NormError::Components { count: dim, used });
    }
    // One target per g_m and per partial derivative.
    let mut targets: Vec<Expr> = Vec::with_capacity(dim * (dim + 1));
    for gm in g {
        targets.push(gm.clone());
        targets.extend(gm.gradient(dim as u32));
    }
    let mut best: Vec<Candidates> = (0..targets.len())
        .map(|_| Candidates::new(scan.refine_from.max(1)))
        .collect();

    let mut visit = |z: &[f64]| -> Result<(), NormError> {
        let point = Point::at_u(z);
        for (target, slot) in targets.iter().zip(best.iter_mut()) {
            slot.offer(target.eval(&point)?.abs(), z);
        }
        Ok(())
    };

    let mut z = vec![0.0; dim];
    if dim == 1 {
        let last = (scan.line_points.max(2) - 1) as f64;
        for j in 0..=last as usize {
            z[0] = (2.0 * j as f64 - last) / last * radius;
            visit(&z)?;
        }
    } else {
        visit(&z)?;
        for i in 0..dim {
            for s in [-1.0, 1.0] {
                z.fill(0.0);
                z[i] = s * radius;
                visit(&z)?;
            }
        }
        let bases = primes(dim);
        for j in 1..=scan.samples {
            for (zi, &b) in z.iter_mut().zip(&bases) {
                *zi = 2.0 * radical_inverse(j as u64, b) - 1.0;
            }
            cube_to_ball(&mut z, radius);
            visit(&z)?;
        }
    }

    let mut total = 0.0;
    for (target, slot) in targets.iter().zip(&best) {
        let mut peak = slot.best_value();
        for (value, start) in &slot.entries {
            peak = peak.max(climb(target, start, *value, radius)?);
        }
        total += peak;
    }
    Ok(C1Estimate {
        value: total,
        lower_estimate: dim >= 2,
    })
}

struct Candidates {
    capacity: usize,
    entries: Vec<(f64, Vec<f64>)>,
}

impl Candidates {
    fn new(capacity: usize) -> Self {
        Candidates {
            capacity,
            entries: Vec::with_capacity(capacity),
        }
    }

    fn best_value(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.0))
    }

    fn offer(&mut self, value: f64, z: &[f64]) {
        if self.entries.len() < self.capacity {
            self.entries.push((value, z.to_vec()));
            return;
        }
        let (worst, worst_value) = self
            .entries
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, e)| if e.0 < acc.1 { (i, e.0) } else { acc });
        if value > worst_value {
            let slot = &mut self.entries[worst];
            slot.0 = value;
            slot.1.copy_from_slice(z);
        }
    }
}

/// Coordinate pattern search for a maximum of `|target|` inside the ball.
fn climb(target: &Expr, start: &[f64], start_value: f64, radius: f64) -> Result<f64, NormError> {
    let mut z = start.to_vec();
    let mut value = start_value;
    let mut step = radius * 1e-2;
    let mut trial = z.clone();
    let mut evaluations = 0;
    while step > radius * 1e-12 && evaluations < 4000 {
        let mut improved = false;
        for i in 0..z.len() {
            for s in [-1.0, 1.0] {
                trial.copy_from_slice(&z);
                trial[i] += s * step;
                project(&mut trial, radius);
                let v = target.eval(&Point::at_u(&trial))?.abs();
                evaluations += 1;
                if v > value {
                    value = v;
                    z.copy_from_slice(&trial);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(value)
}

fn norm(z: &[f64]) -> f64 {
    libm::sqrt(z.iter().map(|v| v * v).sum())
}

fn project(z: &mut [f64], radius: f64) {
    let r = norm(z);
    if r > radius {
        let s = radius / r;
        z.iter_mut().for_each(|v| *v *= s);
    }
}

/// Radial stretch of `[-1, 1]^N` onto the ball of the given radius.
fn cube_to_ball(z: &mut [f64], radius: f64) {
    let l2 = norm(z);
    if l2 == 0.0 {
        return;
    }
    let linf = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let s = radius * linf / l2;
    z.iter_mut().for_each(|v| *v *= s);
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while out.len() < count {
        if out.iter().all(|p| !candidate.is_multiple_of(*p)) {
            out.push(candidate);
        }
        candidate += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn exprs(src: &[&str]) -> Vec<Expr> {
        src.iter().map(|s| parse(s).unwrap()).collect()
    }

    #[test]
    fn zero_nonlinearity() {
        let e = c1_norm_over_ball(&exprs(&["0"]), 1.0).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(!e.lower_estimate);
    }

    // Oracle: on [-r, r], max|z| = r and max|1| = 1.
    #[test]
    fn identity_on_interval() {
        for r in [0.25, 1.0, 3.5] {
            let e = c1_norm_over_ball(&exprs(&["u1"]), r).unwrap();
            assert_eq!(e.value, r + 1.0);
        }
    }

    // Oracle: max z² = 1 and max |2z| = 2 on [-1, 1].
    #[test]
    fn square_on_unit_interval() {
        let e = c1_norm_over_ball(&exprs(&["u1^2"]), 1.0).unwrap();
        assert_eq!(e.value, 3.0);
    }

    #[test]
    fn interior_maximum_found_by_refinement() {
        // sin(7z) has |derivative| maximal at z = 0 and |value| maximal at
        // z = π/14, which is not a scan node.
        let e = c1_norm_over_ball(&exprs(&["sin(7*u1)"]), 1.0).unwrap();
        assert!((e.value - 8.0).abs() < 1e-12, "{}", e.value);
    }

    // Oracle for N = 2: g1 = u1*u2 on the disc of radius r has max |g1| = r²/2,
    // max |u2| = max |u1| = r; g2 = u1^2 + u2^2 has max r², max |2u1| = 2r.
    #[test]
    fn two_components_on_disc() {
        let r = 1.3;
        let e = c1_norm_over_ball(&exprs(&["u1*u2", "u1^2 + u2^2"]), r).unwrap();
        let exact = r * r / 2.0 + 2.0 * r + r * r + 4.0 * r;
        assert!(e.lower_estimate);
        assert!(e.value <= exact + 1e-12);
        assert!(exact - e.value < 1e-6, "{} vs {exact}", e.value);
    }

    #[test]
    fn three_components_stay_in_ball() {
        let r = 0.8;
        let e = c1_norm_over_ball_with(
            &exprs(&["u1 + u2 + u3", "0", "0"]),
            r,
            &BallScan { samples: 20_000, ..BallScan::default() },
        )
        .unwrap();
        // max (z1 + z2 + z3) = √3 r, each partial is 1.
        let exact = 3f64.sqrt() * r + 3.0;
        assert!(e.value <= exact + 1e-12);
        assert!(exact - e.value < 1e-6);
    }

    #[test]
    fn domain_error_inside_ball() {
        let err = c1_norm_over_ball(&exprs(&["log(u1)"]), 1.0).unwrap_err();
        assert!(matches!(err, NormError::Eval(_)));
    }

    #[test]
    fn rejects_bad_radius_and_components() {
        assert_eq!(c1_norm_over_ball(&exprs(&["u1"]), 0.0), Err(NormError::Radius(0.0)));
        assert_eq!(
            c1_norm_over_ball(&exprs(&["u2"]), 1.0),
            Err(NormError::Components { count: 1, used: 2 })
        );
    }

    #[test]
    fn halton_and_ball_map() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert_eq!(primes(5), [2, 3, 5, 7, 11]);
        let mut z = [1.0, 1.0];
        cube_to_ball(&mut z, 2.0);
        assert!((norm(&z) - 2.0).abs() < 1e-15);
    }
}
