//! Trapezoid-quadrature norms on grid functions, the embedding and algebra
//! checks built from them, and the C¹ norm of a nonlinearity over a ball.

mod ball;

use alloc::string::String;
use core::fmt::Write as _;

use crate::expr::EvalError;
use crate::grid::{derivative, trapezoid, truncation_diagnostic, GridError, GridFunction, TruncationReport, VectorGridFunction};

pub use ball::{c1_norm_over_ball, c1_norm_over_ball_with, BallScan, C1Estimate};

/// `sqrt(5/2)`: an admissible algebra constant for `H¹(ℝ)` with the norm
/// `‖φ‖² = ‖φ‖₂² + ‖φ'‖₂²`. From `‖φ‖_∞ ≤ ‖φ‖_{H¹}/√2`,
/// `‖fg‖₂ ≤ ‖f‖_∞‖g‖₂` and `‖(fg)'‖₂ ≤ ‖g‖_∞‖f'‖₂ + ‖f‖_∞‖g'‖₂`, so
/// `‖fg‖²_{H¹} ≤ ½‖f‖²‖g‖² + ½(2‖f‖‖g‖)² = (5/2)‖f‖²‖g‖²` in `H¹` norms.
pub const ALGEBRA_CONSTANT: f64 = 1.581_138_830_084_189_8;

/// Sharp constant of `‖φ‖_∞ ≤ C‖φ‖_{H¹}` in one dimension, `1/√2`.
pub const EMBEDDING_CONSTANT: f64 = core::f64::consts::FRAC_1_SQRT_2;

/// Default bound on [`TruncationReport::tail_fraction`] for an input to be
/// treated as decayed.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NormError {
    #[error("norm of the zero function is zero; ratio undefined")]
    ZeroFunction,
    #[error("ball radius must be positive and finite, got {0}")]
    Radius(f64),
    #[error("nonlinearity has {count} components but uses u{used}")]
    Components { count: usize, used: u32 },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("nonlinearity undefined in the ball: {0}")]
    Eval(#[from] EvalError),
}

fn l2_of(values: &[f64], h: f64) -> f64 {
    let squares: alloc::vec::Vec<f64> = values.iter().map(|v| v * v).collect();
    libm::sqrt(trapezoid(&squares, h))
}

fn l1_of(values: &[f64], h: f64) -> f64 {
    let abs: alloc::vec::Vec<f64> = values.iter().map(|v| v.abs()).collect();
    trapezoid(&abs, h)
}

pub fn norm_l2(f: &GridFunction) -> f64 {
    l2_of(f.values(), f.grid().spacing())
}

pub fn norm_l1(f: &GridFunction) -> f64 {
    l1_of(f.values(), f.grid().spacing())
}

/// Node maximum of `|f|`.
pub fn norm_linf(f: &GridFunction) -> f64 {
    f.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn norm_h1(f: &GridFunction) -> f64 {
    libm::hypot(norm_l2(f), norm_l2(&derivative(f)))
}

/// `sqrt(Σ_m ‖u_m‖₂² + ‖u_m'‖₂²)`.
pub fn norm_h1_vector(u: &VectorGridFunction) -> f64 {
    let sum: f64 = u
        .components()
        .iter()
        .map(|c| {
            let (a, b) = (norm_l2(c), norm_l2(&derivative(c)));
            a * a + b * b
        })
        .sum();
    libm::sqrt(sum)
}

/// `‖K‖₁ + ‖K'‖₁`.
pub fn norm_w11(k: &GridFunction) -> f64 {
    norm_l1(k) + norm_l1(&derivative(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L1,
    L2,
    Linf,
    H1,
    W11,
}

/// A selection of norms of one grid function.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct NormReport {
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub linf: Option<f64>,
    pub h1: Option<f64>,
    pub w11: Option<f64>,
}

impl NormReport {
    pub fn compute(f: &GridFunction, kinds: &[NormKind]) -> Self {
        let mut report = NormReport::default();
        for kind in kinds {
            match kind {
                NormKind::L1 => report.l1 = Some(norm_l1(f)),
                NormKind::L2 => report.l2 = Some(norm_l2(f)),
                NormKind::Linf => report.linf = Some(norm_linf(f)),
                NormKind::H1 => report.h1 = Some(norm_h1(f)),
                NormKind::W11 => report.w11 = Some(norm_w11(f)),
            }
        }
        report
    }

    pub fn full(f: &GridFunction) -> Self {
        use NormKind::*;
        NormReport::compute(f, &[L1, L2, Linf, H1, W11])
    }

    fn entries(&self) -> [(&'static str, Option<f64>); 5] {
        [
            ("l1", self.l1),
            ("l2", self.l2),
            ("linf", self.linf),
            ("h1", self.h1),
            ("w11", self.w11),
        ]
    }

    /// `key = value` lines for the requested norms, each key prefixed.
    pub fn to_key_value(&self, prefix: &str) -> String {
        let mut out = String::new();
        for (key, value) in self.entries() {
            if let Some(v) = value {
                let _ = writeln!(out, "{prefix}{key} = {v:e}");
            }
        }
        out
    }
}

/// Ratio `‖f‖_∞ / ‖f‖_{H¹}` and whether the input decays enough on the
/// truncated grid for the ratio to say anything about `ℝ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingRatio {
    pub ratio: f64,
    pub certified: bool,
    pub truncation: TruncationReport,
}

pub fn embedding_ratio(f: &GridFunction) -> Result<EmbeddingRatio, NormError> {
    let h1 = norm_h1(f);
    if h1 == 0.0 {
        return Err(NormError::ZeroFunction);
    }
    let truncation = truncation_diagnostic(f);
    Ok(EmbeddingRatio {
        ratio: norm_linf(f) / h1,
        certified: truncation.within(DEFAULT_TAIL_TOLERANCE),
        truncation,
    })
}

/// `‖fg‖_{H¹} - c_a ‖f‖_{H¹} ‖g‖_{H¹}`; non-positive when the algebra
/// inequality holds with constant `c_a`.
pub fn algebra_defect(f: &GridFunction, g: &GridFunction, c_a: f64) -> Result<f64, NormError> {
    let product = f.mul(g)?;
    Ok(norm_h1(&product) - c_a * norm_h1(f) * norm_h1(g))
}
