//! `∫ K(x - y) f(y) dy` on the grid nodes.
//!
//! Kernels are sampled on the lag grid ([`GridSpec::lag_grid`]), which holds
//! every node difference `x_i - x_j`; the convolution at node `x_i` is then
//! `h Σ_j K(x_i - x_j) f(x_j)` with no interpolation. The FFT path
//! zero-pads to a power of two `P >= 2n - 1`; that is the smallest length for
//! which the circular product has no wraparound in the output slice.

mod fft;

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::grid::{derivative, GridFunction, GridSpec};
use crate::norms::{norm_l1, norm_l2};
use fft::Fft;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConvolveError {
    #[error("grid mismatch: kernel must be sampled on the lag grid of the function's grid")]
    GridMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Wrap {
    Linear,
    Circular,
}

/// Reusable FFT workspace for one grid.
#[derive(Debug, Clone)]
pub struct ConvolutionPlan {
    grid: GridSpec,
    fft: Fft,
    wrap: Wrap,
}

/// A kernel transformed once for repeated application.
#[derive(Debug, Clone)]
pub struct PreparedKernel {
    grid: GridSpec,
    data: KernelData,
}

#[derive(Debug, Clone)]
enum KernelData {
    Spectrum(Vec<Complex64>),
    Periodic(Vec<f64>),
}

impl ConvolutionPlan {
    pub fn new(grid: GridSpec) -> Self {
        let padded = (2 * grid.points() - 1).next_power_of_two();
        ConvolutionPlan {
            grid,
            fft: Fft::new(padded),
            wrap: Wrap::Linear,
        }
    }

    /// Fault injection: circular convolution on the grid's own period, with
    /// the kernel folded modulo `n`. Wrong on purpose; used to check that
    /// the verification suite notices wraparound.
    #[doc(hidden)]
    pub fn circular(grid: GridSpec) -> Self {
        ConvolutionPlan {
            wrap: Wrap::Circular,
            ..ConvolutionPlan::new(grid)
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn padded_len(&self) -> usize {
        self.fft.len()
    }

    fn check_kernel(&self, kernel: &GridFunction) -> Result<(), ConvolveError> {
        if *kernel.grid() == self.grid.lag_grid() {
            Ok(())
        } else {
            Err(ConvolveError::GridMismatch)
        }
    }

    pub fn prepare(&self, kernel: &GridFunction) -> Result<PreparedKernel, ConvolveError> {
        self.check_kernel(kernel)?;
        let n = self.grid.points();
        let data = match self.wrap {
            Wrap::Linear => {
                let mut buffer = vec![Complex64::new(0.0, 0.0); self.fft.len()];
                for (slot, &v) in buffer.iter_mut().zip(kernel.values()) {
                    *slot = Complex64::new(v, 0.0);
                }
                self.fft.forward(&mut buffer);
                KernelData::Spectrum(buffer)
            }
            Wrap::Circular => {
                let mut folded = vec![0.0; n];
                for (k, &v) in kernel.values().iter().enumerate() {
                    // Lag index k is the offset k - (n - 1).
                    folded[(k + 1) % n] += v;
                }
                KernelData::Periodic(folded)
            }
        };
        Ok(PreparedKernel {
            grid: self.grid,
            data,
        })
    }

    pub fn apply(&self, kernel: &PreparedKernel, f: &GridFunction) -> Result<GridFunction, ConvolveError> {
        if kernel.grid != self.grid || *f.grid() != self.grid {
            return Err(ConvolveError::GridMismatch);
        }
        let n = self.grid.points();
        let h = self.grid.spacing();
        let values = match &kernel.data {
            KernelData::Spectrum(spectrum) => {
                let mut buffer = vec![Complex64::new(0.0, 0.0); self.fft.len()];
                for (slot, &v) in buffer.iter_mut().zip(f.values()) {
                    *slot = Complex64::new(v, 0.0);
                }
                self.fft.forward(&mut buffer);
                for (b, k) in buffer.iter_mut().zip(spectrum) {
                    *b *= k;
                }
                self.fft.inverse(&mut buffer);
                buffer[n - 1..2 * n - 1].iter().map(|c| h * c.re).collect()
            }
            KernelData::Periodic(folded) => (0..n)
                .map(|i| {
                    let sum: f64 = f
                        .values()
                        .iter()
                        .enumerate()
                        .map(|(j, &fj)| folded[(i + n - j) % n] * fj)
                        .sum();
                    h * sum
                })
                .collect(),
        };
        Ok(GridFunction::new(self.grid, values))
    }

    pub fn convolve(&self, kernel: &GridFunction, f: &GridFunction) -> Result<GridFunction, ConvolveError> {
        let prepared = self.prepare(kernel)?;
        self.apply(&prepared, f)
    }
}

/// `h * Σ_j K(x_i - x_j) f(x_j)` by zero-padded FFT. `kernel` lives on
/// `f.grid().lag_grid()`.
pub fn convolve_fft(kernel: &GridFunction, f: &GridFunction) -> Result<GridFunction, ConvolveError> {
    ConvolutionPlan::new(*f.grid()).convolve(kernel, f)
}

/// The same quantity by O(n²) direct summation with trapezoid weights.
pub fn convolve_direct(kernel: &GridFunction, f: &GridFunction) -> Result<GridFunction, ConvolveError> {
    let grid = *f.grid();
    if *kernel.grid() != grid.lag_grid() {
        return Err(ConvolveError::GridMismatch);
    }
    let n = grid.points();
    let h = grid.spacing();
    let k = kernel.values();
    let fv = f.values();
    let values = (0..n)
        .map(|i| {
            let mut sum = 0.0;
            for (j, &fj) in fv.iter().enumerate() {
                let weight = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
                sum += weight * k[i + n - 1 - j] * fj;
            }
            h * sum
        })
        .collect();
    Ok(GridFunction::new(grid, values))
}

/// Margins of Young's inequality `‖K*f‖₂ ≤ ‖K‖₁‖f‖₂` and of its derivative
/// form `‖(K*f)'‖₂ ≤ ‖K'‖₁‖f‖₂`. Defects are `lhs - bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct YoungDefect {
    pub l2_defect: f64,
    pub deriv_defect: f64,
    pub l2_bound: f64,
    pub deriv_bound: f64,
}

pub fn young_defect(kernel: &GridFunction, f: &GridFunction) -> Result<YoungDefect, ConvolveError> {
    young_defect_with(&ConvolutionPlan::new(*f.grid()), kernel, f)
}

pub fn young_defect_with(
    plan: &ConvolutionPlan,
    kernel: &GridFunction,
    f: &GridFunction,
) -> Result<YoungDefect, ConvolveError> {
    let conv = plan.convolve(kernel, f)?;
    let f_l2 = norm_l2(f);
    let l2_bound = norm_l1(kernel) * f_l2;
    let deriv_bound = norm_l1(&derivative(kernel)) * f_l2;
    Ok(YoungDefect {
        l2_defect: norm_l2(&conv) - l2_bound,
        deriv_defect: norm_l2(&derivative(&conv)) - deriv_bound,
        l2_bound,
        deriv_bound,
    })
}
