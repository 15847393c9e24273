//! Solver and hypothesis certifier for systems of quadratic integral
//! equations on the real line,
//!
//! ```text
//! u_m(x) = u0_m(x) + V_m(x) u_m(x) * ∫ K_m(x - y) g_m(u(y)) dy,   m = 1..N,
//! ```
//!
//! discretized on a uniform truncated grid. The crate is `no_std` and only
//! needs `alloc`; file formats and the command line live in the `quadint`
//! crate.

#![cfg_attr(not(test), no_std)]
// Negated comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod expr;
pub mod grid;
pub mod convolve;
pub mod norms;
pub mod problem;
pub mod sensitivity;
pub mod solver;
