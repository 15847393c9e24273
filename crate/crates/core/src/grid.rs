//! Uniform truncated discretization of the real line.

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::{EvalError, Expr, Point};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("half width must be positive and finite, got {0}")]
    HalfWidth(f64),
    #[error("number of points must be even and at least 16, got {0}")]
    Points(usize),
    #[error("sampling failed at node {node}: {source}")]
    Sample { node: usize, source: EvalError },
    #[error("grid functions live on different grids")]
    Mismatch,
    #[error("vector grid function needs at least one component")]
    Empty,
}

/// Nodes `x_i = -L + i h`, `i = 0..n-1`, with `h = 2L / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GridSpec {
    half_width: f64,
    points: usize,
}

impl GridSpec {
    /// Grid on `[-L, L]` with `n` nodes; `n` must be even and at least 16.
    pub fn new(half_width: f64, points: usize) -> Result<Self, GridError> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(GridError::HalfWidth(half_width));
        }
        if points < 16 || !points.is_multiple_of(2) {
            return Err(GridError::Points(points));
        }
        Ok(GridSpec { half_width, points })
    }

    /// The lattice of node differences `x_i - x_j`: `2n - 1` nodes
    /// `z_k = (k - (n - 1)) h` on `[-2L, 2L]` with the same spacing. It
    /// contains `0` as its middle node. Convolution kernels live here.
    pub fn lag_grid(&self) -> GridSpec {
        GridSpec {
            half_width: 2.0 * self.half_width,
            points: 2 * self.points - 1,
        }
    }

    /// Same interval, `factor` times finer: `factor * (n - 1) + 1` nodes.
    /// Every original node is also a node of the refined grid.
    pub fn refined(&self, factor: usize) -> GridSpec {
        GridSpec {
            half_width: self.half_width,
            points: factor * (self.points - 1) + 1,
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    /// Node `i`; symmetric by construction, `x_0 = -L` and `x_{n-1} = L`
    /// exactly.
    pub fn node(&self, i: usize) -> f64 {
        let last = (self.points - 1) as f64;
        let offset = 2.0 * i as f64 - last;
        offset / last * self.half_width
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.node(i))
    }
}

/// Samples of a real function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    /// # Panics
    /// If `values.len()` differs from the number of grid points.
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.points(), "sample count must match the grid");
        GridFunction { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        GridFunction::new(grid, vec![0.0; grid.points()])
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        GridFunction::new(grid, grid.nodes().map(f).collect())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Whether some sample exceeds `threshold` in absolute value.
    pub fn is_nontrivial(&self, threshold: f64) -> bool {
        self.values.iter().any(|v| v.abs() > threshold)
    }

    fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self, GridError> {
        if self.grid != other.grid {
            return Err(GridError::Mismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(GridFunction::new(self.grid, values))
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self, GridError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self, GridError> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GridFunction) -> Result<Self, GridError> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|v| factor * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Evaluate an expression in `x` at every node.
pub fn sample(e: &Expr, grid: &GridSpec) -> Result<GridFunction, GridError> {
    let values = grid
        .nodes()
        .enumerate()
        .map(|(node, x)| {
            e.eval(&Point::at_x(x))
                .map_err(|source| GridError::Sample { node, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GridFunction::new(*grid, values))
}

/// Second-order finite-difference derivative: central differences inside,
/// one-sided three-point stencils at both ends. Exact up to rounding for
/// polynomials of degree at most two.
///
/// # Panics
/// If the grid has fewer than three nodes.
pub fn derivative(f: &GridFunction) -> GridFunction {
    let v = f.values();
    let n = v.len();
    assert!(n >= 3, "derivative needs at least three nodes");
    let inv = 1.0 / (2.0 * f.grid().spacing());
    let mut out = Vec::with_capacity(n);
    out.push((-3.0 * v[0] + 4.0 * v[1] - v[2]) * inv);
    out.extend(v.windows(3).map(|w| (w[2] - w[0]) * inv));
    out.push((3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) * inv);
    GridFunction::new(*f.grid(), out)
}

/// How much of a function sits near the truncation boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TruncationReport {
    /// `max(|f(x_0)|, |f(x_{n-1})|)`.
    pub boundary_max: f64,
    /// Trapezoid L² mass of the outer 5% of the grid on each side over the
    /// total L² mass; 0 for the zero function.
    pub tail_fraction: f64,
}

impl TruncationReport {
    pub fn within(&self, tolerance: f64) -> bool {
        self.tail_fraction <= tolerance
    }
}

pub fn truncation_diagnostic(f: &GridFunction) -> TruncationReport {
    let v = f.values();
    let n = v.len();
    let boundary_max = v[0].abs().max(v[n - 1].abs());
    // Intervals per side; at least one.
    let width = (n / 20).max(1);
    let squares: Vec<f64> = v.iter().map(|a| a * a).collect();
    let h = f.grid().spacing();
    let total = trapezoid(&squares, h);
    let tail = trapezoid(&squares[..=width], h) + trapezoid(&squares[n - 1 - width..], h);
    let tail_fraction = if total > 0.0 { tail / total } else { 0.0 };
    TruncationReport {
        boundary_max,
        tail_fraction,
    }
}

/// Composite trapezoid rule for uniformly spaced samples.
pub(crate) fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => h * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// `N` grid functions on one grid: the discrete form of a vector function
/// `u = (u_1, ..., u_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorGridFunction {
    components: Vec<GridFunction>,
}

impl VectorGridFunction {
    pub fn new(components: Vec<GridFunction>) -> Result<Self, GridError> {
        let first = components.first().ok_or(GridError::Empty)?;
        if components.iter().any(|c| c.grid() != first.grid()) {
            return Err(GridError::Mismatch);
        }
        Ok(VectorGridFunction { components })
    }

    pub fn zeros(grid: GridSpec, count: usize) -> Self {
        assert!(count >= 1, "at least one component");
        VectorGridFunction {
            components: vec![GridFunction::zeros(grid); count],
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn grid(&self) -> &GridSpec {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[GridFunction] {
        &self.components
    }

    pub fn component(&self, m: usize) -> &GridFunction {
        &self.components[m]
    }

    pub fn into_components(self) -> Vec<GridFunction> {
        self.components
    }

    /// Values of every component at node `i`.
    pub fn node_values(&self, i: usize, out: &mut [f64]) {
        for (slot, c) in out.iter_mut().zip(&self.components) {
            *slot = c.values()[i];
        }
    }

    fn zip_with(
        &self,
        other: &VectorGridFunction,
        f: impl Fn(&GridFunction, &GridFunction) -> Result<GridFunction, GridError>,
    ) -> Result<Self, GridError> {
        if self.len() != other.len() {
            return Err(GridError::Mismatch);
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VectorGridFunction { components })
    }

    pub fn add(&self, other: &VectorGridFunction) -> Result<Self, GridError> {
        self.zip_with(other, GridFunction::add)
    }

    pub fn sub(&self, other: &VectorGridFunction) -> Result<Self, GridError> {
        self.zip_with(other, GridFunction::sub)
    }

    pub fn scale(&self, factor: f64) -> Self {
        VectorGridFunction {
            components: self.components.iter().map(|c| c.scale(factor)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(GridFunction::is_finite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn grid(l: f64, n: usize) -> GridSpec {
        GridSpec::new(l, n).unwrap()
    }

    #[test]
    fn make_grid_spacing() {
        assert_eq!(grid(1.0, 16).spacing(), 2.0 / 15.0);
        assert_eq!(grid(20.0, 4096).spacing(), 40.0 / 4095.0);
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert_eq!(GridSpec::new(-1.0, 16), Err(GridError::HalfWidth(-1.0)));
        assert_eq!(GridSpec::new(0.0, 16), Err(GridError::HalfWidth(0.0)));
        assert!(GridSpec::new(f64::NAN, 16).is_err());
        assert_eq!(GridSpec::new(1.0, 17), Err(GridError::Points(17)));
        assert_eq!(GridSpec::new(1.0, 14), Err(GridError::Points(14)));
    }

    #[test]
    fn nodes_are_symmetric_with_exact_endpoints() {
        let g = grid(3.7, 64);
        assert_eq!(g.node(0), -3.7);
        assert_eq!(g.node(63), 3.7);
        for i in 0..64 {
            assert_eq!(g.node(i), -g.node(63 - i));
            assert!((g.node(i) - (-3.7 + i as f64 * g.spacing())).abs() < 1e-14);
        }
    }

    #[test]
    fn lag_grid_contains_node_differences() {
        let g = grid(2.0, 16);
        let lag = g.lag_grid();
        assert_eq!(lag.points(), 31);
        assert_eq!(lag.spacing(), g.spacing());
        assert_eq!(lag.node(15), 0.0);
        for i in 0..16 {
            for j in 0..16 {
                let k = i + 15 - j;
                assert!((lag.node(k) - (g.node(i) - g.node(j))).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sample_examples() {
        let g = grid(1.0, 16);
        let zero = sample(&parse("0").unwrap(), &g).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        let x = sample(&parse("x").unwrap(), &g).unwrap();
        assert_eq!(x.values()[0], -1.0);
        assert_eq!(x.values()[15], 1.0);
        let g = grid(20.0, 4096);
        let gauss = sample(&parse("exp(-x^2)").unwrap(), &g).unwrap();
        for i in 2000..2096 {
            let xi = g.node(i);
            assert!((gauss.values()[i] - (-xi * xi).exp()).abs() <= 1e-15);
        }
    }

    #[test]
    fn sample_reports_failing_node() {
        let g = grid(1.0, 16);
        let err = sample(&parse("log(x)").unwrap(), &g).unwrap_err();
        assert!(matches!(err, GridError::Sample { node: 0, .. }));
        let err = sample(&parse("u1").unwrap(), &g).unwrap_err();
        assert!(matches!(err, GridError::Sample { node: 0, source: EvalError::Unbound(_) }));
    }

    #[test]
    fn derivative_of_constant_and_line() {
        let g = grid(5.0, 32);
        let c = GridFunction::from_fn(g, |_| 3.0);
        assert!(derivative(&c).values().iter().all(|&v| v == 0.0));
        let line = sample(&parse("x").unwrap(), &g).unwrap();
        for v in derivative(&line).values() {
            assert!((v - 1.0).abs() <= 1e-12);
        }
        let affine = GridFunction::from_fn(g, |x| 2.5 - 0.75 * x);
        for v in derivative(&affine).values() {
            assert!((v + 0.75).abs() <= 1e-12);
        }
    }

    #[test]
    fn derivative_second_order_convergence() {
        // Oracle: analytic cos(x) against the stencil on two resolutions.
        let error = |n: usize| {
            let g = grid(10.0, n);
            let d = derivative(&GridFunction::from_fn(g, f64::sin));
            d.values()
                .iter()
                .zip(g.nodes())
                .map(|(v, x)| (v - x.cos()).abs())
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (error(1024), error(2048));
        let h = 20.0 / 2047.0;
        assert!(fine <= h * h, "fine error {fine}");
        let order = (coarse / fine).log2();
        assert!((order - 2.0).abs() < 0.1, "observed order {order}");
    }

    #[test]
    fn truncation_examples() {
        let g = grid(20.0, 4096);
        let zero = truncation_diagnostic(&GridFunction::zeros(g));
        assert_eq!((zero.boundary_max, zero.tail_fraction), (0.0, 0.0));
        let gauss = truncation_diagnostic(&GridFunction::from_fn(g, |x| (-x * x).exp()));
        assert!(gauss.boundary_max < 1e-170);
        assert!(gauss.tail_fraction < 1e-250);
        // Oracle: a constant has trapezoid tail mass 2 * width * h over 2L.
        let one = truncation_diagnostic(&GridFunction::from_fn(g, |_| 1.0));
        assert!((one.tail_fraction - 2.0 * 204.0 / 4095.0).abs() < 1e-12);
        assert!((one.tail_fraction - 0.1).abs() < 1e-3);
    }

    #[test]
    fn trapezoid_is_exact_for_lines() {
        let g = grid(1.0, 16);
        let f = GridFunction::from_fn(g, |x| 3.0 * x + 1.0);
        assert!((trapezoid(f.values(), g.spacing()) - 2.0).abs() < 1e-14);
    }

    proptest::proptest! {
        #[test]
        fn derivative_is_linear(
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            c1 in -4.0f64..4.0,
            c2 in -4.0f64..4.0,
            w in 0.3f64..2.0,
        ) {
            let g = grid(8.0, 128);
            let f = GridFunction::from_fn(g, |x| (-((x - c1) / w).powi(2)).exp());
            let h = GridFunction::from_fn(g, |x| (x - c2).sin() / (1.0 + x * x));
            let combo = f.scale(a).add(&h.scale(b)).unwrap();
            let lhs = derivative(&combo);
            let rhs = derivative(&f).scale(a).add(&derivative(&h).scale(b)).unwrap();
            let scale = lhs.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (p, q) in lhs.values().iter().zip(rhs.values()) {
                proptest::prop_assert!((p - q).abs() <= 1e-13 * scale);
            }
        }

        #[test]
        fn derivative_exact_on_lines(slope in -100.0f64..100.0, offset in -100.0f64..100.0) {
            let g = grid(3.0, 64);
            let d = derivative(&GridFunction::from_fn(g, |x| slope * x + offset));
            for v in d.values() {
                proptest::prop_assert!((v - slope).abs() <= 1e-12 * (1.0 + slope.abs() + offset.abs()));
            }
        }
    }

    #[test]
    fn vector_function_requires_one_grid() {
        let a = GridFunction::zeros(grid(1.0, 16));
        let b = GridFunction::zeros(grid(2.0, 16));
        assert_eq!(VectorGridFunction::new(alloc::vec![a.clone(), b]), Err(GridError::Mismatch));
        assert_eq!(VectorGridFunction::new(alloc::vec![]), Err(GridError::Empty));
        assert_eq!(VectorGridFunction::new(alloc::vec![a.clone(), a]).unwrap().len(), 2);
    }
}
