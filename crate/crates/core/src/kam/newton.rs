//! One quadratic step of the conjugacy scheme and the inner analytic solver.

use super::KamConfig;
use crate::arithmetic::Frequency;
use crate::cohomology;
use crate::error::{CoreError, Result};
use crate::fourier::map::TorusMap;
use crate::fourier::SpectralVectorField;
use crate::linalg;
use crate::weights::{kam_constants, r_phi_b};
use serde::{Deserialize, Serialize};

/// Left-hand side of the applicability threshold
/// C₄ α⁻¹ e^{δτφ_b(τ/σ)} |F|_s ≤ 1 (strip norm bounded by its l1 form);
/// ≤ 1 means the sufficient condition holds. Execution never gates on it.
pub fn kam_threshold_margin(
    alpha: f64,
    f_l1_at_s: f64,
    s: f64,
    sigma: f64,
    cfg: &KamConfig,
) -> Result<f64> {
    if !(sigma > 0.0 && 4.0 * sigma < s) {
        return Err(CoreError::InvalidParameter(format!(
            "need 0 < 4σ < s, got σ={sigma}, s={s}"
        )));
    }
    let consts = kam_constants(cfg.a, cfg.kappa, cfg.r, cfg.tau)?;
    let ln_margin = cfg.c4.ln() - alpha.ln()
        + consts.delta * r_phi_b(cfg.a, cfg.tau, cfg.tau / sigma)?
        + f_l1_at_s.max(f64::MIN_POSITIVE).ln();
    Ok(ln_margin.exp())
}

/// Output of one Newton step.
#[derive(Clone, Debug)]
pub struct NewtonStep {
    pub lambda_inc: Vec<f64>,
    pub phi_inc: TorusMap,
    pub f_next: SpectralVectorField,
    /// Discarded-tail l1 mass of the pulled-back remainder.
    pub tail: f64,
    /// Mean defect removed exactly before the cohomological solve.
    pub mean_defect: f64,
    pub worst_divisor: f64,
}

/// One quadratic step: solve the modifying-term average equation through
/// `theta_eff`, solve the cohomological equation, and pull the field back
/// under Id + G.
///
/// `theta_eff` is the effective modifying frame (the original Θ composed with
/// the conjugacies accumulated so far).
pub fn newton_step(
    field: &SpectralVectorField,
    omega: &Frequency,
    theta_eff: &TorusMap,
    k_work: i64,
    resolution: usize,
) -> Result<NewtonStep> {
    if theta_eff.jacobian_defect_bound() >= 1.0 {
        return Err(CoreError::NonInvertibleJacobian {
            estimate: theta_eff.jacobian_defect_bound(),
        });
    }
    // λ from mean(F − Θ*λ) = 0: M λ = mean(F), M = mean((DΘ)⁻¹)
    let m = theta_eff.mean_inverse_jacobian(resolution)?;
    let lambda_inc = linalg::solve_dense(m, field.mean())?;
    let theta_lambda = theta_eff.pullback_constant(&lambda_inc, k_work, resolution)?;
    let mut f_hat = field.sub(&theta_lambda)?;
    let mut mean_defect = 0.0f64;
    for c in f_hat.components_mut() {
        mean_defect = mean_defect.max(c.mean().abs());
        c.set_mean(0.0);
    }
    let sol = cohomology::solve_vector(&f_hat, omega)?;
    let phi_inc = TorusMap::from_displacement(sol.g)?;
    // F_next = (DΦ)⁻¹[F̂(Φ(x)) − X_ω G(x)] with X_ω G = F̂ exactly
    let (f_next, tail) = phi_inc.pullback_perturbation(&f_hat, omega.components(), k_work, resolution)?;
    Ok(NewtonStep {
        lambda_inc,
        phi_inc,
        f_next,
        tail,
        mean_defect,
        worst_divisor: sol.worst_divisor,
    })
}

/// Result of the inner analytic solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KamStepResult {
    pub lambda: Vec<f64>,
    #[serde(skip)]
    pub phi: Option<TorusMap>,
    /// l1 residual per inner iteration (first entry: the input field).
    pub residual_history: Vec<f64>,
    pub converged: bool,
    /// Widths: (s, σ, s − 4σ) and the geometric inner sequence σ_m.
    pub width_s: f64,
    pub width_sigma: f64,
    pub width_s_minus_4sigma: f64,
    pub inner_sigmas: Vec<f64>,
    /// |λ| (max-norm).
    pub lambda_norm: f64,
    /// l1 bound of |Φ − Id| at width s − 4σ.
    pub phi_disp_bound: f64,
    /// l1 bound of |DΦ − Id| at width s − 4σ.
    pub dphi_defect_bound: f64,
    /// Threshold margin (≤ 1 means the sufficient condition held).
    pub threshold_margin: f64,
    /// |λ| / (C₄|F|_s): ≤ 1 is the first conclusion estimate.
    pub lambda_estimate_ratio: f64,
    /// max{|Φ−Id|,|DΦ−Id|}_{s−4σ} / (C₄α⁻¹|F|_s e^{δτφ_b(τ/σ)}).
    pub phi_estimate_ratio: f64,
    /// Grid sup of the conjugacy residual of the returned pair.
    pub conjugacy_residual: f64,
    /// Measured convergence order (None when fewer than 2 decaying steps).
    pub measured_order: Option<f64>,
    /// Max discarded-tail mass over the inner steps.
    pub max_tail: f64,
}

/// Measured order from a residual history: the consecutive-ratio estimate
/// over supra-floor entries, or ln r₁/ln r₀ when only two remain.
pub fn measured_order(history: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<f64> = history.iter().copied().filter(|&r| r > floor).collect();
    if pts.len() >= 3 {
        let mut best: Option<f64> = None;
        for w in pts.windows(3) {
            let denom = (w[1] / w[0]).ln();
            if denom < 0.0 {
                let ord = (w[2] / w[1]).ln() / denom;
                best = Some(best.map_or(ord, |b: f64| b.max(ord)));
            }
        }
        best
    } else if pts.len() == 2 && pts[0] < 1.0 && pts[1] < pts[0] {
        Some(pts[1].ln() / pts[0].ln())
    } else {
        None
    }
}

/// Iterate Newton steps at fixed widths until the l1 residual reaches
/// `cfg.tol_residual` or the budget runs out, composing the conjugacy and
/// accumulating λ through the effective frame Θ ∘ Φ_total.
pub fn analytic_kam_solve(
    field: &SpectralVectorField,
    omega: &Frequency,
    theta: &TorusMap,
    s: f64,
    sigma: f64,
    cfg: &KamConfig,
    alpha: f64,
) -> Result<KamStepResult> {
    if !(sigma > 0.0 && 4.0 * sigma < s) {
        return Err(CoreError::InvalidParameter(format!(
            "width ordering violated: need 0 < 4σ < s, got σ={sigma}, s={s}"
        )));
    }
    let n = field.dim();
    let k_work = cfg.working_cutoff(field.cutoff().max(theta.cutoff()));
    let resolution = cfg.grid_resolution(k_work);
    let consts = kam_constants(cfg.a, cfg.kappa, cfg.r, cfg.tau)?;
    let f_l1_s = field.l1_norm(s);
    let threshold_margin = kam_threshold_margin(alpha, f_l1_s, s, sigma, cfg)?;
    if cfg.strict && threshold_margin > 1.0 {
        return Err(CoreError::ThresholdViolated(format!(
            "strict mode: threshold margin {threshold_margin:.3e} > 1"
        )));
    }

    // inner width-loss ledger (bookkeeping for reported norms)
    let exp1m = 1.0 - cfg.a;
    let inner_sigmas: Vec<f64> = (0..cfg.max_inner)
        .map(|m| sigma * (cfg.kappa.powf(exp1m) - 1.0) * cfg.kappa.powf(-exp1m * (m as f64 + 1.0)))
        .collect();

    let omega_abs = omega
        .components()
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let floor = 64.0 * f64::EPSILON * (1.0 + omega_abs + field.l1_norm(0.0));

    let mut phi_total = TorusMap::identity(n, k_work);
    let mut lambda = vec![0.0f64; n];
    let mut current = field.clone();
    let mut history = Vec::new();
    let mut converged = false;
    let mut max_tail = 0.0f64;
    let mut growth_streak = 0usize;
    for _m in 0..cfg.max_inner {
        let resid = current.l1_norm(0.0);
        history.push(resid);
        if resid <= cfg.tol_residual {
            converged = true;
            break;
        }
        if history.len() >= 2 {
            let prev = history[history.len() - 2];
            if resid > prev {
                growth_streak += 1;
                if growth_streak >= 3 {
                    return Err(CoreError::Divergence {
                        iterations: history.len(),
                        history,
                    });
                }
            } else {
                growth_streak = 0;
            }
        }
        let (theta_eff, _) = theta.compose(&phi_total, k_work, resolution)?;
        let step = newton_step(&current, omega, &theta_eff, k_work, resolution)?;
        let (next_total, comp_tail) = phi_total.compose(&step.phi_inc, k_work, resolution)?;
        phi_total = next_total;
        for i in 0..n {
            lambda[i] += step.lambda_inc[i];
        }
        current = step.f_next;
        max_tail = max_tail.max(step.tail.max(comp_tail));
    }
    if !converged {
        let resid = current.l1_norm(0.0);
        if resid <= cfg.tol_residual {
            converged = true;
        }
        history.push(resid);
    }

    let s4 = s - 4.0 * sigma;
    let lambda_norm = lambda.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let phi_disp_bound = phi_total.displacement_bound(s4);
    let dphi_defect_bound = phi_total.jacobian_defect_bound_at(s4);
    let estimate_scale =
        cfg.c4 / alpha * f_l1_s * (consts.delta * r_phi_b(cfg.a, cfg.tau, cfg.tau / sigma)?).exp();
    let conj_res = super::oracle::conjugacy_residual(
        field,
        omega,
        &lambda,
        &phi_total,
        if theta.displacement_bound(0.0) == 0.0 {
            super::oracle::ModifyingMode::Constant
        } else {
            super::oracle::ModifyingMode::Pullback(theta.clone())
        },
        resolution,
    )?;
    Ok(KamStepResult {
        lambda,
        residual_history: history.clone(),
        converged,
        width_s: s,
        width_sigma: sigma,
        width_s_minus_4sigma: s4,
        inner_sigmas,
        lambda_norm,
        phi_disp_bound,
        dphi_defect_bound,
        threshold_margin,
        lambda_estimate_ratio: if f_l1_s > 0.0 {
            lambda_norm / (cfg.c4 * f_l1_s)
        } else {
            0.0
        },
        phi_estimate_ratio: if estimate_scale > 0.0 {
            phi_disp_bound.max(dphi_defect_bound) / estimate_scale
        } else {
            0.0
        },
        conjugacy_residual: conj_res,
        measured_order: measured_order(&history, floor),
        max_tail,
        phi: Some(phi_total),
    })
}
