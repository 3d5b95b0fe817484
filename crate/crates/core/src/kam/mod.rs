//! Analytic KAM solver with modifying term and the Gevrey linearization
//! driver.
//!
//! The conjugacy convention throughout is the pullback
//! (Φ*Y)(x) = (DΦ(x))⁻¹ Y(Φ(x)); a solution of the linearization problem is a
//! pair (λ, Φ) with Φ*(X − Θ*λ) = X_ω, Θ*λ(x) = (DΘ(x))⁻¹λ. Newton steps
//! solve the linearized (cohomological) equation and compose; the outer
//! driver feeds analytic truncations of a Gevrey perturbation through stages
//! of shrinking widths and assembles certificates.

mod driver;
mod newton;
mod oracle;

pub use driver::{gevrey_linearize, GevreyKamCertificate, StageRecord};
pub use newton::{analytic_kam_solve, kam_threshold_margin, newton_step, KamStepResult};
pub use oracle::{conjugacy_residual, reparametrized_oracle, ModifyingMode, OracleSolution};

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// Parameters of the KAM machinery.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KamConfig {
    /// Gevrey exponent, 0 < a < 1.
    pub a: f64,
    /// Source regularity r₀ > r.
    pub r0: f64,
    /// Working regularity.
    pub r: f64,
    /// Arithmetic parameter τ > τ₀.
    pub tau: f64,
    /// Arithmetic parameter of the frequency class.
    pub tau0: f64,
    /// Superlinear speed 1 < κ < 2.
    pub kappa: f64,
    /// Hard mode cap for all working spectra.
    pub k_max: i64,
    /// Grid oversampling factor for compositions (≥ 2).
    pub oversample: usize,
    /// Inner residual tolerance (l1 of the perturbation).
    pub tol_residual: f64,
    pub max_inner: usize,
    pub max_outer: usize,
    /// Approximation constant (measured default 1).
    pub c2: f64,
    /// KAM constant (measured default 1).
    pub c4: f64,
    /// Strict mode aborts on hypothesis violations instead of recording them.
    pub strict: bool,
    /// Cutoff for the γ_τ₀⁻¹ scan that defines α.
    pub alpha_scan_cutoff: i64,
}

impl KamConfig {
    pub fn new(a: f64, r0: f64, r: f64, tau: f64, tau0: f64, kappa: f64) -> Result<Self> {
        if !(r0 > r && r > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "need r0 > r > 0, got r0={r0}, r={r}"
            )));
        }
        if !(tau > tau0 && tau0 > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "need τ > τ₀ > 0, got τ={tau}, τ₀={tau0}"
            )));
        }
        if !(1.0 < kappa && kappa < 2.0) {
            return Err(CoreError::InvalidParameter(format!(
                "need 1 < κ < 2, got {kappa}"
            )));
        }
        if !(0.0 < a && a < 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "need 0 < a < 1, got {a}"
            )));
        }
        Ok(KamConfig {
            a,
            r0,
            r,
            tau,
            tau0,
            kappa,
            k_max: 48,
            oversample: 4,
            tol_residual: 1e-12,
            max_inner: 24,
            max_outer: 16,
            c2: 1.0,
            c4: 1.0,
            strict: false,
            alpha_scan_cutoff: 128,
        })
    }

    /// Composition/sampling resolution for working cutoff K.
    pub fn grid_resolution(&self, k_work: i64) -> usize {
        (self.oversample.max(2)) * (2 * k_work as usize + 2)
    }

    /// Working cutoff for a field of support cutoff K.
    pub fn working_cutoff(&self, k_input: i64) -> i64 {
        (2 * k_input + 8).min(self.k_max).max(k_input.min(self.k_max))
    }
}
