//! Construction, validation and analysis of triorthogonal binary
//! matrices and the magic state distillation protocols they induce.
//!
//! The crate is organized around the pipeline:
//!
//! - [`gf2`] — bit-packed exact linear algebra over F2;
//! - [`ortho`] — triorthogonality validation and built-in code families;
//! - [`analysis`] — weight enumerators, success/output error rates,
//!   power series, distances and thresholds (exact arithmetic inside,
//!   floats only at evaluation);
//! - [`clifford`] — the diagonal Clifford correction that completes the
//!   transversal T gate, with an exhaustive phase-identity verifier;
//! - [`search`] — the linear-system search for new triorthogonal
//!   matrices with few columns;
//! - [`simulate`] — a seeded Monte Carlo oracle for the distillation
//!   subroutine;
//! - [`planner`] — concatenated protocol cost evaluation and
//!   optimization.

pub mod analysis;
pub mod clifford;
pub mod gf2;
pub mod ortho;
pub mod planner;
pub mod poly;
pub mod search;
pub mod simulate;
pub(crate) mod rng;

/// Exact-rational polynomial: power series with integer-exact leading
/// coefficients.
pub type RationalPoly = poly::Polynomial<num_rational::BigRational>;

/// Double-precision polynomial for externally configured rate functions.
pub type FloatPoly = poly::Polynomial<f64>;
