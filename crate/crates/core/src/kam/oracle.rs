//! Reparametrized-field oracle and the measured conjugacy residual.
//!
//! For X = (1/f)X_ω the conjugacy problem is solvable in closed form through
//! the cohomological equation: with μ the unique solution of
//! ∫ f/(1−μf) dx = 1 and g̃ the normalized solution of X_ω g̃ = f/(1−μf) − 1,
//! the pair λ = μω, Φ = (Id + g̃ω)⁻¹ satisfies Φ*(X − λ) = X_ω exactly.
//! When f has unit mean, μ = 0 and g̃ coincides with the solution for f
//! itself. λ = (1−c)ω is the leading-order form of μω around c = 1.

use super::KamConfig;
use crate::arithmetic::Frequency;
use crate::cohomology;
use crate::error::{CoreError, Result};
use crate::fourier::grid::{self, GridScalar};
use crate::fourier::map::{normalize_mean_displacement, TorusMap};
use crate::fourier::{SpectralScalar, SpectralVectorField};
use crate::linalg;
use serde::{Deserialize, Serialize};

/// How the modifying term enters the conjugacy identity.
#[derive(Clone, Debug)]
pub enum ModifyingMode {
    /// Λ = λ constant.
    Constant,
    /// Λ = Θ*λ = (DΘ)⁻¹λ.
    Pullback(TorusMap),
}

/// Grid sup-norm of (DΦ(x))⁻¹(ω + F(Φ(x)) − Λ(Φ(x))) − ω.
pub fn conjugacy_residual(
    field: &SpectralVectorField,
    omega: &Frequency,
    lambda: &[f64],
    phi: &TorusMap,
    mode: ModifyingMode,
    resolution: usize,
) -> Result<f64> {
    if !phi.is_certified_invertible() {
        return Err(CoreError::NonInvertibleJacobian {
            estimate: phi.jacobian_defect_bound(),
        });
    }
    let n = phi.dim();
    let om = omega.components();
    let shifted = phi.eval_on_grid(resolution)?;
    let f_shift: Vec<Vec<f64>> = (0..n)
        .map(|i| field.component(i).eval_at(&shifted))
        .collect();
    let lam_shift: Vec<Vec<f64>> = match &mode {
        ModifyingMode::Constant => (0..n).map(|i| vec![lambda[i]; shifted.len()]).collect(),
        ModifyingMode::Pullback(theta) => {
            let jac = theta.jacobian_at(&shifted)?;
            let mut vals = vec![vec![0.0; shifted.len()]; n];
            for (p, j) in jac.iter().enumerate() {
                let sol = linalg::solve_dense(j.clone(), lambda.to_vec())?;
                for i in 0..n {
                    vals[i][p] = sol[i];
                }
            }
            vals
        }
    };
    let jac_phi = phi.jacobian_on_grid(resolution)?;
    let mut worst = 0.0f64;
    for p in 0..shifted.len() {
        let rhs: Vec<f64> = (0..n)
            .map(|i| om[i] + f_shift[i][p] - lam_shift[i][p])
            .collect();
        let sol = linalg::solve_dense(jac_phi[p].clone(), rhs)?;
        for i in 0..n {
            worst = worst.max((sol[i] - om[i]).abs());
        }
    }
    Ok(worst)
}

/// Exact solution data for a reparametrized constant field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleSolution {
    /// Modifying constant λ = μω.
    pub lambda: Vec<f64>,
    /// μ: exact root of ∫ f/(1−μf) dx = 1; equals 1−c to leading order.
    pub mu: f64,
    /// Mean c = ∫f dx.
    pub mean: f64,
    /// The conjugacy Φ (pullback convention), mean-displacement normalized.
    #[serde(skip)]
    pub phi: Option<TorusMap>,
    /// The straightening scalar g̃: Φ⁻¹ = Id + g̃ω exactly.
    pub straightening: SpectralScalar,
    /// The perturbation P = (1/f − 1)ω whose solution this pair is.
    pub perturbation: SpectralVectorField,
    /// Measured grid conjugacy residual of (λ, Φ) against X_ω + P.
    pub residual: f64,
    /// Map-inversion certificate.
    pub inversion_residual: f64,
}

/// Solve the reparametrized problem X = (1/f)X_ω exactly.
pub fn reparametrized_oracle(
    f: &SpectralScalar,
    omega: &Frequency,
    cfg: &KamConfig,
) -> Result<OracleSolution> {
    let n = f.dim();
    if n != omega.dim() {
        return Err(CoreError::DimensionMismatch("reparametrized_oracle".into()));
    }
    let k_work = cfg.working_cutoff(f.cutoff());
    let resolution = cfg.grid_resolution(k_work);
    let fg = grid::to_grid(f, resolution)?;
    let min_f = fg.values().iter().cloned().fold(f64::INFINITY, f64::min);
    if min_f <= 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "f vanishes on the grid (min {min_f})"
        )));
    }
    let mean = f.mean();

    // Newton for μ: m(μ) = mean(f/(1−μf)) − 1 = 0, m' = mean(f²/(1−μf)²) > 0
    let mut mu = 1.0 - mean;
    for _ in 0..60 {
        let mut m = 0.0;
        let mut dm = 0.0;
        let mut ok = true;
        for &v in fg.values() {
            let d = 1.0 - mu * v;
            if d <= 0.0 {
                ok = false;
                break;
            }
            m += v / d;
            dm += v * v / (d * d);
        }
        if !ok {
            mu *= 0.5;
            continue;
        }
        let len = fg.values().len() as f64;
        let step = (m / len - 1.0) / (dm / len);
        mu -= step;
        if step.abs() < 1e-16 * (1.0 + mu.abs()) {
            break;
        }
    }

    // f̃ = f/(1−μf), mean exactly 1 by construction of μ
    let ftilde_vals: Vec<f64> = fg.values().iter().map(|&v| v / (1.0 - mu * v)).collect();
    let ftilde = grid::from_grid(
        &GridScalar::new(n, resolution, ftilde_vals)?,
        k_work,
    )?;
    let sol = cohomology::solve_scalar(&ftilde, omega)?;
    let straightening = sol.g.clone();
    let psi = TorusMap::from_displacement(SpectralVectorField::from_scalar_times_vector(
        &straightening,
        omega.components(),
    )?)?;
    let (phi_raw, inversion_residual) = psi.inverse(k_work, resolution)?;
    let phi = normalize_mean_displacement(&phi_raw, k_work, resolution)?;

    // P = (1/f − 1)ω
    let p_vals: Vec<f64> = fg.values().iter().map(|&v| 1.0 / v - 1.0).collect();
    let p_scalar = grid::from_grid(&GridScalar::new(n, resolution, p_vals)?, k_work)?;
    let perturbation =
        SpectralVectorField::from_scalar_times_vector(&p_scalar, omega.components())?;

    let lambda: Vec<f64> = omega.components().iter().map(|&w| mu * w).collect();
    let residual = conjugacy_residual(
        &perturbation,
        omega,
        &lambda,
        &phi,
        ModifyingMode::Constant,
        resolution,
    )?;
    Ok(OracleSolution {
        lambda,
        mu,
        mean,
        phi: Some(phi),
        straightening,
        perturbation,
        residual,
        inversion_residual,
    })
}
