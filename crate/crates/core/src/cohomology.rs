//! Exact solver for the cohomological equation X_ω g = f − c on finite
//! Fourier support, scalar and vector-valued, with the norm-loss certificate
//! ‖g‖_{r−τ} ≤ γ_τ⁻¹(ω)‖f‖_r.
//!
//! Division by near-zero divisors is never regularized: on finite support the
//! solver is exact and simply reports the worst divisor it used — divergence
//! under shrinking divisors is a feature under test, not a failure.

use crate::arithmetic::Frequency;
use crate::error::{CoreError, Result};
use crate::fourier::{SpectralScalar, SpectralVectorField};
use crate::weights::Weight;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Solution of X_ω g = f − c with g normalized by g₀ = 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CohomSolution {
    /// The average c = f₀.
    pub mean: f64,
    pub g: SpectralScalar,
    /// Smallest |k·ω| encountered on the support (∞ when f has no
    /// non-constant modes).
    pub worst_divisor: f64,
    pub worst_k: Option<Vec<i64>>,
    /// Relative l1 residual of X_ω g + c − f (≈ 1e-16; exact construction).
    pub residual_rel: f64,
}

/// Vector-valued solution: componentwise scalar solves.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CohomVectorSolution {
    pub lambda: Vec<f64>,
    pub g: SpectralVectorField,
    pub worst_divisor: f64,
    pub residual_rel: f64,
}

/// Solve X_ω g = f − c: c = f₀, g_k = f_k/(i2π k·ω), g₀ = 0.
pub fn solve_scalar(f: &SpectralScalar, omega: &Frequency) -> Result<CohomSolution> {
    if f.dim() != omega.dim() {
        return Err(CoreError::DimensionMismatch("solve_scalar".into()));
    }
    let om = omega.components();
    let mut g = SpectralScalar::zero(f.dim(), f.cutoff());
    let mut worst = f64::INFINITY;
    let mut worst_k = None;
    for (k, c) in f.iter() {
        if k.is_zero() {
            continue;
        }
        let dot = k.dot(om);
        if dot == 0.0 {
            return Err(CoreError::Resonance { k: k.0.clone() });
        }
        if dot.abs() < worst {
            worst = dot.abs();
            worst_k = Some(k.0.clone());
        }
        let denom = Complex64::new(0.0, 2.0 * std::f64::consts::PI * dot);
        g.set_pair(k.0.clone(), c / denom)?;
    }
    let mean = f.mean();
    // residual: X_ω g + c − f, relative to ‖f‖_l1
    let deriv = g.directional_derivative(om)?;
    let mut recon = deriv;
    recon.set_mean(recon.mean() + mean);
    let resid = recon.sub(f)?.l1_norm(0.0);
    let denom = f.l1_norm(0.0).max(f64::MIN_POSITIVE);
    Ok(CohomSolution {
        mean,
        g,
        worst_divisor: worst,
        worst_k,
        residual_rel: (resid / denom).max(0.0),
    })
}

/// Componentwise vector solve; λ collects the component averages.
pub fn solve_vector(
    field: &SpectralVectorField,
    omega: &Frequency,
) -> Result<CohomVectorSolution> {
    let mut lambda = Vec::with_capacity(field.dim());
    let mut comps = Vec::with_capacity(field.dim());
    let mut worst = f64::INFINITY;
    let mut resid = 0.0f64;
    for c in field.components() {
        let sol = solve_scalar(c, omega)?;
        lambda.push(sol.mean);
        worst = worst.min(sol.worst_divisor);
        resid = resid.max(sol.residual_rel);
        comps.push(sol.g);
    }
    Ok(CohomVectorSolution {
        lambda,
        g: SpectralVectorField::new(comps)?,
        worst_divisor: worst,
        residual_rel: resid,
    })
}

/// Margin report for the norm-loss bound ‖g‖_{r−τ} ≤ γ_τ⁻¹(ω)‖f‖_r.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormLossReport {
    pub lhs: f64,
    pub rhs: f64,
    /// lhs/rhs; at most 1 whenever γ was computed at a cutoff covering supp f.
    pub ratio: f64,
    pub gamma_inv: f64,
    pub r: f64,
    pub tau: f64,
}

/// Verify the loss bound with γ_τ⁻¹ computed at cutoff `scan_cutoff`
/// (must cover the support of f).
pub fn verify_norm_loss(
    f: &SpectralScalar,
    omega: &Frequency,
    weight: &Weight<f64>,
    r: f64,
    tau: f64,
    scan_cutoff: i64,
) -> Result<NormLossReport> {
    if scan_cutoff < f.cutoff() {
        return Err(CoreError::InvalidParameter(format!(
            "scan cutoff {scan_cutoff} below support cutoff {}",
            f.cutoff()
        )));
    }
    let a = weight
        .gevrey_exponent()
        .ok_or_else(|| CoreError::InvalidParameter("norm-loss scan needs a Gevrey weight".into()))?;
    let scan = crate::arithmetic::small_divisor_scan(omega, scan_cutoff, tau, a)?;
    let sol = solve_scalar(f, omega)?;
    let lhs = sol.g.weighted_norm(weight, r - tau);
    let rhs = scan.gamma_inv * f.weighted_norm(weight, r);
    Ok(NormLossReport {
        lhs,
        rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        gamma_inv: scan.gamma_inv,
        r,
        tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::Frequency;
    use crate::fourier::MultiIndex;
    use crate::GOLDEN_RATIO;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn golden() -> Frequency {
        Frequency::golden(30)
    }

    #[test]
    fn constant_input() {
        let f = SpectralScalar::constant(2, 2, 3.0);
        let sol = solve_scalar(&f, &golden()).unwrap();
        assert_eq!(sol.mean, 3.0);
        assert_eq!(sol.g.support_len(), 0);
        assert_eq!(sol.residual_rel, 0.0);
    }

    #[test]
    fn single_cosine_amplitude() {
        // f = cos(2π(x₁−x₂)), ω = (1, φ): |g_{(1,−1)}| = 0.5/(2π(φ−1))
        let f = SpectralScalar::cosine(2, 1, vec![1, -1], 1.0).unwrap();
        let sol = solve_scalar(&f, &golden()).unwrap();
        assert_eq!(sol.mean, 0.0);
        let got = sol.g.coeff(&MultiIndex(vec![1, -1])).norm();
        let expect = 0.5 / (2.0 * std::f64::consts::PI * (GOLDEN_RATIO - 1.0));
        assert_relative_eq!(got, expect, epsilon = 1e-15);
        assert_relative_eq!(expect, 0.1287589, max_relative = 2e-6); // 7-digit print of the closed form
        assert!(sol.residual_rel < 1e-14);
        // spectral identity coefficientwise
        let deriv = sol.g.directional_derivative(golden().components()).unwrap();
        let diff = deriv.coeff(&MultiIndex(vec![1, -1])) - f.coeff(&MultiIndex(vec![1, -1]));
        assert!(diff.norm() < 1e-16);
    }

    #[test]
    fn resonance_error_names_mode() {
        let f = SpectralScalar::cosine(2, 2, vec![2, -1], 1.0).unwrap();
        let om = Frequency::numeric(vec![1.0, 2.0]).unwrap();
        match solve_scalar(&f, &om) {
            Err(CoreError::Resonance { k }) => {
                assert!(k == vec![2, -1] || k == vec![-2, 1])
            }
            other => panic!("expected resonance, got {other:?}"),
        }
    }

    #[test]
    fn linearity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let om = golden();
        for _ in 0..10 {
            let mut f1 = SpectralScalar::zero(2, 4);
            let mut f2 = SpectralScalar::zero(2, 4);
            for _ in 0..6 {
                f1.set_pair(
                    vec![rng.gen_range(-4..=4), rng.gen_range(-4..=4)],
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
                .unwrap();
                f2.set_pair(
                    vec![rng.gen_range(-4..=4), rng.gen_range(-4..=4)],
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
                .unwrap();
            }
            let (al, be) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let combo = f1.scale(al).add(&f2.scale(be)).unwrap();
            let s_combo = solve_scalar(&combo, &om).unwrap();
            let s1 = solve_scalar(&f1, &om).unwrap();
            let s2 = solve_scalar(&f2, &om).unwrap();
            let lin = s1.g.scale(al).add(&s2.g.scale(be)).unwrap();
            assert!(s_combo.g.sub(&lin).unwrap().l1_norm(0.0) < 1e-12);
            assert_relative_eq!(s_combo.mean, al * s1.mean + be * s2.mean, epsilon = 1e-12);
        }
    }

    #[test]
    fn vector_solve_scalar_times_omega() {
        // F = f·ω → G = g·ω, λ = f₀·ω
        let f = SpectralScalar::from_entries(
            2,
            3,
            [
                (vec![0, 0], Complex64::new(0.4, 0.0)),
                (vec![2, 1], Complex64::new(0.1, -0.3)),
            ],
        )
        .unwrap();
        let om = golden();
        let field = SpectralVectorField::from_scalar_times_vector(&f, om.components()).unwrap();
        let sol = solve_vector(&field, &om).unwrap();
        let scalar = solve_scalar(&f, &om).unwrap();
        for i in 0..2 {
            assert_relative_eq!(sol.lambda[i], 0.4 * om.components()[i], epsilon = 1e-14);
            let want = scalar.g.scale(om.components()[i]);
            assert!(sol.g.component(i).sub(&want).unwrap().l1_norm(0.0) < 1e-13);
        }
        // zero field → zero solution
        let z = SpectralVectorField::zero(2, 2);
        let zs = solve_vector(&z, &om).unwrap();
        assert!(zs.lambda.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn norm_loss_bound_random_envelopes() {
        let om = golden();
        let w = Weight::gevrey(0.5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let (r, tau, k) = (1.0, 1.0, 16i64);
        for _ in 0..20 {
            let mut f = SpectralScalar::zero(2, k);
            for _ in 0..20 {
                let kx = rng.gen_range(-k..=k);
                let ky = rng.gen_range(-k..=k);
                if (kx, ky) == (0, 0) {
                    continue;
                }
                let norm = (kx.abs().max(ky.abs())) as f64;
                let env = (-r * w.eval(norm)).exp();
                let phase = rng.gen_range(0.0..std::f64::consts::TAU);
                let amp = rng.gen_range(0.0..1.0) * env;
                f.set_pair(vec![kx, ky], Complex64::from_polar(amp, phase))
                    .unwrap();
            }
            let rep = verify_norm_loss(&f, &om, &w, r, tau, k).unwrap();
            assert!(rep.ratio <= 1.0 + 1e-12, "ratio {}", rep.ratio);
        }
    }

    #[test]
    fn norm_loss_sharpness_at_argmax() {
        // f concentrated on the argmax mode of γ_τ⁻¹ attains the bound
        let om = golden();
        let w = Weight::gevrey(0.5).unwrap();
        let scan = crate::arithmetic::small_divisor_scan(&om, 16, 1.0, 0.5).unwrap();
        let f = SpectralScalar::from_entries(
            2,
            16,
            [(scan.gamma_argmax.clone(), Complex64::new(0.3, 0.0))],
        )
        .unwrap();
        let rep = verify_norm_loss(&f, &om, &w, 1.0, 1.0, 16).unwrap();
        assert!(rep.ratio >= 0.999, "sharpness ratio {}", rep.ratio);
        assert!(rep.ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn constant_gives_zero_loss_ratio() {
        let om = golden();
        let w = Weight::gevrey(0.5).unwrap();
        let f = SpectralScalar::constant(2, 2, 2.5);
        let rep = verify_norm_loss(&f, &om, &w, 1.0, 1.0, 8).unwrap();
        assert_eq!(rep.lhs, 0.0);
    }
}
