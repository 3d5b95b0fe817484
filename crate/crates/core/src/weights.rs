//! Weight functions, Young conjugates, and the scalar constants behind every
//! threshold in the KAM machinery.
//!
//! A weight is a continuous non-decreasing φ with φ(0) = 0 and
//! ln(1+t) = O(φ(t)). Four families are supported:
//!
//! - smooth      φ₀(t) = ln(1+t)
//! - Gevrey      φ_a(t) = t^a / a,  0 < a ≤ 1
//! - analytic    φ₁(t) = t
//! - log-power   ψ_b(t) = t · (ln(1+t))^{-b},  b ≥ 1
//!
//! The Gevrey Young conjugate has the closed form φ_a*(ξ) = 1/(b ξ^b)
//! = φ_b(1/ξ) with conjugate exponent b = a/(1−a); the grid-search
//! [`young_conjugate_numeric`] is kept as an independent oracle for it.

use crate::error::{CoreError, Result};
use crate::real::Real;
use serde::{Deserialize, Serialize};

/// Weight family tag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum WeightFamily {
    Smooth,
    Gevrey,
    Analytic,
    LogPower,
}

/// A normalized weight function.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Weight<T: Real> {
    family: WeightFamily,
    /// Gevrey exponent, present for the Gevrey family.
    a: Option<T>,
    /// Exponent of ψ_b, present for the log-power family.
    b_pow: Option<T>,
}

impl<T: Real> Weight<T> {
    pub fn smooth() -> Self {
        Weight {
            family: WeightFamily::Smooth,
            a: None,
            b_pow: None,
        }
    }

    pub fn analytic() -> Self {
        Weight {
            family: WeightFamily::Analytic,
            a: None,
            b_pow: None,
        }
    }

    /// Gevrey weight φ_a, 0 < a ≤ 1 (a = 1 coincides with the analytic weight).
    pub fn gevrey(a: T) -> Result<Self> {
        if !(a > T::zero() && a <= T::one()) {
            return Err(CoreError::InvalidParameter(format!(
                "Gevrey exponent a must lie in (0,1], got {a:?}"
            )));
        }
        Ok(Weight {
            family: WeightFamily::Gevrey,
            a: Some(a),
            b_pow: None,
        })
    }

    /// Log-power weight ψ_b, 1 ≤ b ≤ 3 (b = 1 is the quasi-analytic ψ₁).
    /// Implemented as t·(ln(e+t))^{-b}: same equivalence class as
    /// t·(ln(1+t))^{-b} but satisfying the weight axioms (ψ(0) = 0,
    /// non-decreasing) exactly, which the literal form violates near t ≈ 1.
    pub fn log_power(b_pow: T) -> Result<Self> {
        if !(b_pow >= T::one() && b_pow <= T::from_f64c(3.0)) {
            return Err(CoreError::InvalidParameter(format!(
                "log-power exponent must satisfy 1 ≤ b ≤ 3, got {b_pow:?}"
            )));
        }
        Ok(Weight {
            family: WeightFamily::LogPower,
            a: None,
            b_pow: Some(b_pow),
        })
    }

    pub fn family(&self) -> WeightFamily {
        self.family
    }

    pub fn gevrey_exponent(&self) -> Option<T> {
        self.a
    }

    /// φ(t) for t ≥ 0.
    pub fn eval(&self, t: T) -> T {
        debug_assert!(t >= T::zero());
        match self.family {
            WeightFamily::Smooth => t.ln_1p(),
            WeightFamily::Gevrey => {
                let a = self.a.unwrap();
                if t == T::zero() {
                    T::zero()
                } else {
                    t.powf(a) / a
                }
            }
            WeightFamily::Analytic => t,
            WeightFamily::LogPower => {
                let b = self.b_pow.unwrap();
                t * (T::E() + t).ln().powf(-b)
            }
        }
    }
}

/// Evaluate a weight; free-function form used by callers that hold the
/// parameters rather than the struct.
pub fn weight_eval<T: Real>(w: &Weight<T>, t: T) -> T {
    w.eval(t)
}

/// Conjugate exponent b = a/(1−a) of a Gevrey exponent a ∈ (0,1).
pub fn conjugate_exponent<T: Real>(a: T) -> Result<T> {
    if !(a > T::zero() && a < T::one()) {
        return Err(CoreError::InvalidParameter(format!(
            "conjugate exponent needs a in (0,1), got {a:?}"
        )));
    }
    Ok(a / (T::one() - a))
}

/// Closed-form Young conjugate of the Gevrey weight:
/// φ_a*(ξ) = 1/(b ξ^b) = φ_b(1/ξ).
pub fn young_conjugate_gevrey<T: Real>(a: T, xi: T) -> Result<T> {
    if xi <= T::zero() {
        return Err(CoreError::InvalidParameter(format!(
            "Young conjugate needs ξ > 0, got {xi:?}"
        )));
    }
    let b = conjugate_exponent(a)?;
    Ok(T::one() / (b * xi.powf(b)))
}

/// Result of a grid supremum search.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridSup<T> {
    pub value: T,
    pub argmax: T,
    /// Set when the maximizer landed within one grid cell of the search
    /// boundary, i.e. the search was truncated.
    pub truncated: bool,
}

/// Grid supremum of t ↦ g(t) over [0, t_max] on a two-pass refined grid:
/// a log-spaced sweep (plus t = 0) followed by a dense linear zoom around the
/// coarse maximizer.
fn grid_sup<T: Real>(g: impl Fn(T) -> T, t_max: T, points: usize) -> GridSup<T> {
    let n = points.max(64);
    let mut best_t = T::zero();
    let mut best = g(T::zero());
    // log sweep from t_max*1e-9 to t_max
    let lo = t_max * T::from_f64c(1e-9);
    let ratio = (t_max / lo).powf(T::one() / T::from_usize(n - 1).unwrap());
    let mut t = lo;
    for _ in 0..n {
        let v = g(t);
        if v > best {
            best = v;
            best_t = t;
        }
        t = t * ratio;
    }
    // linear zoom: one coarse cell on each side of the maximizer
    let cell = best_t * (ratio - T::one());
    let left = (best_t - cell).max(T::zero());
    let right = (best_t + cell).min(t_max);
    let m = n;
    let step = (right - left) / T::from_usize(m).unwrap();
    let mut t = left;
    for _ in 0..=m {
        let v = g(t);
        if v > best {
            best = v;
            best_t = t;
        }
        t = t + step;
    }
    let truncated = best_t >= t_max - step - cell;
    GridSup {
        value: best,
        argmax: best_t,
        truncated,
    }
}

/// Brute-force Young conjugate sup_{t ∈ [0,t_max]} {φ(t) − ξ t}; the
/// independent oracle for [`young_conjugate_gevrey`].
pub fn young_conjugate_numeric<T: Real>(
    w: &Weight<T>,
    xi: T,
    t_max: T,
    grid_points: usize,
) -> Result<GridSup<T>> {
    if xi <= T::zero() || t_max <= T::zero() {
        return Err(CoreError::InvalidParameter(
            "young_conjugate_numeric needs ξ > 0 and t_max > 0".into(),
        ));
    }
    Ok(grid_sup(|t| w.eval(t) - xi * t, t_max, grid_points))
}

/// Scaled conjugate r·φ_a*(ξ/r) = sup_t {r φ_a(t) − ξ t}.
pub fn scaled_conjugate<T: Real>(a: T, r: T, xi: T) -> Result<T> {
    if r <= T::zero() {
        return Err(CoreError::InvalidParameter(format!(
            "scaled conjugate needs r > 0, got {r:?}"
        )));
    }
    Ok(r * young_conjugate_gevrey(a, xi / r)?)
}

/// r φ_b(ξ) with b the conjugate exponent of a; the exponent that appears in
/// every approximation/threshold bound. Equals `scaled_conjugate(a, r, r/ξ·r)`
/// reparametrized: r φ_b(x) = r x^b / b.
pub fn r_phi_b<T: Real>(a: T, r: T, x: T) -> Result<T> {
    let b = conjugate_exponent(a)?;
    Ok(r * x.powf(b) / b)
}

/// Threshold constants of the Gevrey KAM theorem.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GevreyConstants<T> {
    pub a: T,
    /// Conjugate exponent b = a/(1−a).
    pub b: T,
    pub kappa: T,
    /// δ(a,κ) = (κ−1)(κ^{1−a}−1)^{−1/(1−a)}.
    pub delta: T,
    /// c(a,κ) = 32^b δ.
    pub c: T,
    pub r: T,
    pub tau: T,
    /// ρ = r − cτ.
    pub rho: T,
    /// υ = 8^{−b} ρ.
    pub upsilon: T,
    /// ν = υ/2.
    pub nu: T,
    /// ι = 8^{−b} (2r)^{−1} υ.
    pub iota: T,
    /// Whether the regularity hypothesis r > cτ holds; gates certificate
    /// claims, not execution.
    pub hypothesis_holds: bool,
}

/// Populate the derived constants for parameters (a, κ, r, τ).
pub fn kam_constants<T: Real>(a: T, kappa: T, r: T, tau: T) -> Result<GevreyConstants<T>> {
    if !(a > T::zero() && a < T::one()) {
        return Err(CoreError::InvalidParameter(format!(
            "need 0 < a < 1, got {a:?}"
        )));
    }
    let two = T::from_f64c(2.0);
    if !(kappa > T::one() && kappa < two) {
        return Err(CoreError::InvalidParameter(format!(
            "need 1 < κ < 2, got {kappa:?}"
        )));
    }
    if r <= T::zero() || tau <= T::zero() {
        return Err(CoreError::InvalidParameter(
            "need r > 0 and τ > 0".into(),
        ));
    }
    let one = T::one();
    let b = a / (one - a);
    let exp1m = one - a;
    let delta = (kappa - one) * (kappa.powf(exp1m) - one).powf(-one / exp1m);
    let c = T::from_f64c(32.0).powf(b) * delta;
    let rho = r - c * tau;
    let eighth = T::from_f64c(8.0).powf(-b);
    let upsilon = eighth * rho;
    let nu = upsilon / two;
    let iota = eighth * upsilon / (two * r);
    Ok(GevreyConstants {
        a,
        b,
        kappa,
        delta,
        c,
        r,
        tau,
        rho,
        upsilon,
        nu,
        iota,
        hypothesis_holds: rho > T::zero(),
    })
}

/// Grid supremum of Γ(σ) = sup_t (1+t) e^{τ₀ φ_a(t) − σ t}, returned as
/// (value, log value) since the supremum overflows long before its log does.
pub fn gamma_majorant<T: Real>(
    sigma: T,
    tau0: T,
    a: T,
    t_max: T,
    grid_points: usize,
) -> Result<GridSup<T>> {
    if sigma <= T::zero() || tau0 < T::zero() {
        return Err(CoreError::InvalidParameter(
            "gamma_majorant needs σ > 0 and τ₀ ≥ 0".into(),
        ));
    }
    let w = Weight::gevrey(a)?;
    let sup = grid_sup(
        |t| t.ln_1p() + tau0 * w.eval(t) - sigma * t,
        t_max,
        grid_points,
    );
    Ok(GridSup {
        value: sup.value, // this is ln Γ(σ)
        argmax: sup.argmax,
        truncated: sup.truncated,
    })
}

/// Default search horizon for the Γ supremum: several decades past the
/// pure-Gevrey maximizer (τ₀/σ)^{1/(1−a)}.
pub fn gamma_t_max<T: Real>(sigma: T, tau0: T, a: T) -> T {
    let base = if tau0 > T::zero() {
        (tau0 / sigma).powf(T::one() / (T::one() - a))
    } else {
        T::one() / sigma
    };
    (base + T::one() / sigma + T::one()) * T::from_f64c(1e3)
}

/// Outcome of the finite Ψ product of Γ majorants on the Pöschel
/// geometric sequence σ_j = σ(κ^{1−a}−1)κ^{−(1−a)(j+1)}.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PsiProduct<T> {
    /// ln Π_{j≤J} Γ(σ_j)^{κ_j}.
    pub log_value: T,
    /// Stage count, chosen so κ_J < 1e-8.
    pub stages: usize,
    /// Σ σ_j ≤ σ (sanity: the sequence sums to σ).
    pub sigma_sum: T,
    pub truncated_search: bool,
}

/// Finite product Π Γ(σ_j)^{κ_j} with κ_j = (κ−1)κ^{−(j+1)}, evaluated in log
/// domain with [`gamma_majorant`]; the tail is cut once κ_J < 1e-8.
pub fn psi_product<T: Real>(sigma: T, a: T, kappa: T, tau0: T, grid_points: usize) -> Result<PsiProduct<T>> {
    if sigma <= T::zero() {
        return Err(CoreError::InvalidParameter("psi_product needs σ > 0".into()));
    }
    let one = T::one();
    let tiny = T::from_f64c(1e-8);
    let mut stages = 0usize;
    while (kappa - one) * kappa.powf(-T::from_usize(stages + 1).unwrap()) >= tiny {
        stages += 1;
        if stages > 10_000 {
            return Err(CoreError::InvalidParameter("κ too close to 1".into()));
        }
    }
    let exp1m = one - a;
    let mut log_value = T::zero();
    let mut sigma_sum = T::zero();
    let mut truncated = false;
    for j in 0..=stages {
        let jp1 = T::from_usize(j + 1).unwrap();
        let sj = sigma * (kappa.powf(exp1m) - one) * kappa.powf(-exp1m * jp1);
        let kj = (kappa - one) * kappa.powf(-jp1);
        let g = gamma_majorant(sj, tau0, a, gamma_t_max(sj, tau0, a), grid_points)?;
        log_value = log_value + kj * g.value;
        sigma_sum = sigma_sum + sj;
        truncated |= g.truncated;
    }
    Ok(PsiProduct {
        log_value,
        stages,
        sigma_sum,
        truncated_search: truncated,
    })
}

/// Largest σ̄ such that (1+t) ≤ e^{(τ−τ₀)φ_a(t)} holds at the Γ maximizer for
/// every σ ≤ σ̄ — the scale below which the polynomial prefactor of Γ is
/// absorbed and Γ(σ) ≤ e^{τ φ_b(τ/σ)} is certified. Found by scan + bisection.
pub fn s_star<T: Real>(a: T, tau: T, tau0: T, grid_points: usize) -> Result<T> {
    if !(tau > tau0 && tau0 > T::zero()) {
        return Err(CoreError::InvalidParameter(
            "s_star needs τ > τ₀ > 0".into(),
        ));
    }
    let w = Weight::gevrey(a)?;
    let holds = |sigma: T| -> Result<bool> {
        let g = gamma_majorant(sigma, tau0, a, gamma_t_max(sigma, tau0, a), grid_points)?;
        let t = g.argmax;
        Ok(t.ln_1p() <= (tau - tau0) * w.eval(t))
    };
    // coarse descending scan to bracket the transition
    let mut hi: Option<T> = None; // smallest failing σ seen
    let mut lo: Option<T> = None; // largest σ below which everything held
    let decade = T::from_f64c(10.0f64.powf(0.25));
    let mut sigma = T::one();
    for _ in 0..80 {
        if holds(sigma)? {
            // require all finer scales to hold too before accepting
            let mut all = true;
            let mut s = sigma;
            for _ in 0..24 {
                s = s / decade;
                if !holds(s)? {
                    all = false;
                    break;
                }
            }
            if all {
                lo = Some(sigma);
                break;
            }
        } else if hi.is_none() {
            hi = Some(sigma);
        }
        sigma = sigma / decade;
    }
    let lo = lo.ok_or_else(|| {
        CoreError::InvalidParameter("s_star: no absorbing scale found in range".into())
    })?;
    let mut hi = hi.unwrap_or(lo * T::from_f64c(10.0));
    let mut lo = lo;
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Quasi-analyticity verdict for a weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuasiAnalyticity {
    /// ∫₁^∞ φ(t)/t² dt < ∞: non-quasi-analytic.
    NonQuasiAnalytic,
    /// The integral diverges: quasi-analytic.
    QuasiAnalytic,
}

/// Numerical cross-check data for the quasi-analyticity integral.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NqReport<T> {
    pub verdict: QuasiAnalyticity,
    /// ∫₁^H φ(t)/t² dt at the configured horizon.
    pub partial_integral: T,
    /// Same integral at horizon √H; a stalling ratio indicates convergence.
    pub partial_at_sqrt_horizon: T,
    pub horizon: T,
}

/// Non-quasi-analyticity test: decided in closed form per family, with a
/// numerical partial integral up to `horizon` reported alongside.
pub fn non_quasi_analytic_check<T: Real>(w: &Weight<T>, horizon: T) -> NqReport<T> {
    let verdict = match w.family {
        WeightFamily::Smooth => QuasiAnalyticity::NonQuasiAnalytic,
        WeightFamily::Gevrey => {
            if w.a.unwrap() < T::one() {
                QuasiAnalyticity::NonQuasiAnalytic
            } else {
                QuasiAnalyticity::QuasiAnalytic
            }
        }
        WeightFamily::Analytic => QuasiAnalyticity::QuasiAnalytic,
        WeightFamily::LogPower => {
            if w.b_pow.unwrap() > T::one() {
                QuasiAnalyticity::NonQuasiAnalytic
            } else {
                QuasiAnalyticity::QuasiAnalytic
            }
        }
    };
    let integral = |h: T| -> T {
        // log-spaced Simpson-ish midpoint sum of φ(t)/t² over [1, h]
        let n = 4000;
        let ln_h = h.ln();
        let step = ln_h / T::from_usize(n).unwrap();
        let mut acc = T::zero();
        let mut u = step / T::from_f64c(2.0);
        for _ in 0..n {
            let t = u.exp();
            // substitution t = e^u: dt = t du, integrand φ(t)/t² · t du
            acc = acc + w.eval(t) / t * step;
            u = u + step;
        }
        acc
    };
    NqReport {
        verdict,
        partial_integral: integral(horizon),
        partial_at_sqrt_horizon: integral(horizon.sqrt()),
        horizon,
    }
}
