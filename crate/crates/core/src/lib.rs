//! Numerical toolkit for linear and non-linear small-divisor problems on the
//! n-torus, at truncated-Fourier scale.
//!
//! The pieces fit together as follows:
//!
//! - [`weights`] — weight functions grading regularity (smooth, Gevrey,
//!   analytic, log-power), their Young conjugates, and the scalar constants
//!   (δ, c, ρ, υ, ν, ι) that control every threshold downstream.
//! - [`fourier`] — truncated Fourier series on `T^n` with weighted norms,
//!   grid–spectrum transforms, products, derivatives, and composition /
//!   pullback of torus maps.
//! - [`arithmetic`] — small-divisor scans, continued fractions (exact for
//!   quadratic irrationals, big-integer throughout), Liouville-type builders
//!   and the divergence counterexample source.
//! - [`cohomology`] — the exact solver for `X_ω g = f − c` with certified
//!   norm-loss margins.
//! - [`smoothing`] — Gevrey→analytic approximation sequences and the
//!   telescoping-limit certificate.
//! - [`kam`] — the analytic KAM solver with modifying term and the full
//!   Gevrey linearization driver, emitting versioned certificates.

pub mod arithmetic;
pub mod cohomology;
pub mod error;
pub mod fixtures;
pub mod fourier;
pub mod kam;
pub mod linalg;
pub mod real;
pub mod smoothing;
pub mod weights;

pub use error::CoreError;
pub use real::Real;

/// Weight over `f64`, the scalar type used by the spectral stack.
pub type Weight64 = weights::Weight<f64>;
/// Weight over `f32`.
pub type Weight32 = weights::Weight<f32>;
/// KAM threshold constants over `f64`.
pub type GevreyConstants64 = weights::GevreyConstants<f64>;

/// Golden ratio `(1+√5)/2`, the workhorse Diophantine test frequency.
pub const GOLDEN_RATIO: f64 = 1.618033988749894848204586834365638118_f64;
