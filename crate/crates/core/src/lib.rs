//! Truncated mean-curvature problems with critical growth on boxes.
//!
//! The crate discretizes
//!
//! ```text
//! -div(a(|∇u|²) ∇u) = λ|u|^{q-2}u + |u|^{2*-2}u   in Ω,   u = 0 on ∂Ω
//! ```
//!
//! with a bounded truncation `a` of `1/sqrt(1+t)`, computes the admissible
//! λ range, searches for multiple pairs of critical points of the truncated
//! energy and checks that they solve the untruncated problem.

// negated comparisons deliberately reject NaN; index loops mirror the math
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod config;
pub mod descent;
pub mod energy;
pub mod error;
pub mod grid;
pub mod solver;
pub mod thresholds;
pub mod truncation;
pub mod verify;

pub use error::{Error, Result};
