//! Torus maps `Φ = Id + displacement`, their Jacobians, composition,
//! inversion, and the pullback operations the KAM scheme is built on.

use super::grid::{self, GridScalar};
use super::{SpectralScalar, SpectralVectorField};
use crate::error::{CoreError, Result};
use crate::linalg;

use serde::{Deserialize, Serialize};

/// Diffeomorphism of `T^n` of the form x ↦ x + D(x) (mod 1) with periodic
/// displacement D. Carries a sup-estimate of |DΦ − Id| certifying
/// invertibility when < 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorusMap {
    displacement: SpectralVectorField,
    /// Upper bound for the operator max-norm of DΦ − Id over the real torus
    /// (row sums of componentwise l1 norms of the displacement Jacobian).
    jacobian_defect_bound: f64,
}

impl TorusMap {
    pub fn identity(n: usize, cutoff: i64) -> Self {
        TorusMap {
            displacement: SpectralVectorField::zero(n, cutoff),
            jacobian_defect_bound: 0.0,
        }
    }

    pub fn from_displacement(displacement: SpectralVectorField) -> Result<Self> {
        let bound = displacement_jacobian_bound(&displacement)?;
        Ok(TorusMap {
            displacement,
            jacobian_defect_bound: bound,
        })
    }

    pub fn dim(&self) -> usize {
        self.displacement.dim()
    }

    pub fn cutoff(&self) -> i64 {
        self.displacement.cutoff()
    }

    pub fn displacement(&self) -> &SpectralVectorField {
        &self.displacement
    }

    /// |DΦ − Id| sup-estimate (l1-certified upper bound).
    pub fn jacobian_defect_bound(&self) -> f64 {
        self.jacobian_defect_bound
    }

    pub fn is_certified_invertible(&self) -> bool {
        self.jacobian_defect_bound < 1.0
    }

    /// Sup-estimate of |Φ − Id| (max over components of the l1 bound),
    /// at analytic width s.
    pub fn displacement_bound(&self, s: f64) -> f64 {
        self.displacement.l1_norm(s)
    }

    /// |DΦ − Id| l1 bound at analytic width s.
    pub fn jacobian_defect_bound_at(&self, s: f64) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut row = 0.0;
            for l in 0..n {
                row += self
                    .displacement
                    .component(i)
                    .partial_derivative(l)
                    .expect("axis in range")
                    .l1_norm(s);
            }
            worst = worst.max(row);
        }
        worst
    }

    /// Evaluate Φ on the uniform N^n grid (FFT path); returns shifted points
    /// in grid order.
    pub fn eval_on_grid(&self, resolution: usize) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        let pts = grid::grid_points(n, resolution);
        let comps: Vec<Vec<f64>> = self
            .displacement
            .components()
            .iter()
            .map(|c| c.grid_values(resolution))
            .collect::<Result<Vec<_>>>()?;
        Ok(pts
            .into_iter()
            .enumerate()
            .map(|(p, x)| (0..n).map(|i| x[i] + comps[i][p]).collect())
            .collect())
    }

    /// Jacobian matrices DΦ at the uniform grid points (FFT path).
    pub fn jacobian_on_grid(&self, resolution: usize) -> Result<Vec<Vec<Vec<f64>>>> {
        let n = self.dim();
        let total = resolution.pow(n as u32);
        let mut parts = Vec::with_capacity(n * n);
        for i in 0..n {
            for l in 0..n {
                parts.push(
                    self.displacement
                        .component(i)
                        .partial_derivative(l)?
                        .grid_values(resolution)?,
                );
            }
        }
        Ok((0..total)
            .map(|p| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|l| parts[i * n + l][p] + if i == l { 1.0 } else { 0.0 })
                            .collect()
                    })
                    .collect()
            })
            .collect())
    }

    /// Evaluate Φ at the given points.
    pub fn eval(&self, points: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = self.dim();
        let comps: Vec<Vec<f64>> = (0..n)
            .map(|i| self.displacement.component(i).eval_at(points))
            .collect();
        points
            .iter()
            .enumerate()
            .map(|(p, x)| (0..n).map(|i| x[i] + comps[i][p]).collect())
            .collect()
    }

    /// Jacobian matrices DΦ(x) at the given points (row-major n×n each).
    pub fn jacobian_at(&self, points: &[Vec<f64>]) -> Result<Vec<Vec<Vec<f64>>>> {
        let n = self.dim();
        let mut parts = Vec::with_capacity(n * n);
        for i in 0..n {
            for l in 0..n {
                parts.push(
                    self.displacement
                        .component(i)
                        .partial_derivative(l)?
                        .eval_at(points),
                );
            }
        }
        Ok((0..points.len())
            .map(|p| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|l| parts[i * n + l][p] + if i == l { 1.0 } else { 0.0 })
                            .collect()
                    })
                    .collect()
            })
            .collect())
    }

    /// Composition self ∘ other, sampled on a grid and truncated at `cutoff`.
    /// Returns the map and the discarded-tail l1 mass certificate.
    pub fn compose(&self, other: &TorusMap, cutoff: i64, resolution: usize) -> Result<(TorusMap, f64)> {
        if self.dim() != other.dim() {
            return Err(CoreError::DimensionMismatch("compose".into()));
        }
        let n = self.dim();
        let pts = grid::grid_points(n, resolution);
        let shifted = other.eval_on_grid(resolution)?;
        let mut comps = Vec::with_capacity(n);
        let mut tail = 0.0f64;
        for i in 0..n {
            let outer = self.displacement.component(i).eval_at(&shifted);
            let vals: Vec<f64> = outer
                .iter()
                .enumerate()
                .map(|(p, &o)| o + (shifted[p][i] - pts[p][i]))
                .collect();
            let g = GridScalar::new(n, resolution, vals)?;
            tail = tail.max(grid::tail_mass_beyond(&g, cutoff));
            comps.push(grid::from_grid(&g, cutoff)?);
        }
        let map = TorusMap::from_displacement(SpectralVectorField::new(comps)?)?;
        Ok((map, tail))
    }

    /// Inverse map, certified by |DΦ−Id| < 1, computed by the fixed-point
    /// iteration x ← y − D(x) on a grid. Returns the map and the measured
    /// sup of |Φ(Φ⁻¹(y)) − y| over the grid.
    pub fn inverse(&self, cutoff: i64, resolution: usize) -> Result<(TorusMap, f64)> {
        if !self.is_certified_invertible() {
            return Err(CoreError::NonInvertibleJacobian {
                estimate: self.jacobian_defect_bound,
            });
        }
        let n = self.dim();
        let pts = grid::grid_points(n, resolution);
        let mut x: Vec<Vec<f64>> = pts.clone();
        // contraction rate = jacobian defect bound < 1
        let iters = {
            let q = self.jacobian_defect_bound.clamp(1e-6, 0.999_999);
            ((f64::EPSILON.ln() - 3.0) / q.ln()).ceil().max(4.0) as usize
        };
        for _ in 0..iters.min(400) {
            let d: Vec<Vec<f64>> = {
                let n_ = n;
                let comps: Vec<Vec<f64>> = (0..n_)
                    .map(|i| self.displacement.component(i).eval_at(&x))
                    .collect();
                (0..x.len())
                    .map(|p| (0..n_).map(|i| comps[i][p]).collect())
                    .collect()
            };
            for (p, xp) in x.iter_mut().enumerate() {
                for i in 0..n {
                    xp[i] = pts[p][i] - d[p][i];
                }
            }
        }
        let mut comps = Vec::with_capacity(n);
        for i in 0..n {
            let vals: Vec<f64> = x.iter().zip(&pts).map(|(xp, p)| xp[i] - p[i]).collect();
            comps.push(grid::from_grid(
                &GridScalar::new(n, resolution, vals)?,
                cutoff,
            )?);
        }
        let inv = TorusMap::from_displacement(SpectralVectorField::new(comps)?)?;
        // certificate: residual of Φ(Φ⁻¹(y)) − y on the grid
        let round = self.eval(&inv.eval(&pts));
        let mut resid = 0.0f64;
        for (p, y) in round.iter().zip(&pts) {
            for i in 0..n {
                let mut d = p[i] - y[i];
                d -= d.round();
                resid = resid.max(d.abs());
            }
        }
        Ok((inv, resid))
    }

    /// Pullback of the perturbation of X = X_ω + V: returns the spectral
    /// field of (DΦ(x))⁻¹ (ω + V(Φ(x))) − ω, computed stably as
    /// (DΦ)⁻¹ [V∘Φ − DD·ω] where DD is the displacement Jacobian.
    pub fn pullback_perturbation(
        &self,
        v: &SpectralVectorField,
        omega: &[f64],
        cutoff: i64,
        resolution: usize,
    ) -> Result<(SpectralVectorField, f64)> {
        let n = self.dim();
        if v.dim() != n || omega.len() != n {
            return Err(CoreError::DimensionMismatch("pullback_perturbation".into()));
        }
        if !self.is_certified_invertible() {
            return Err(CoreError::NonInvertibleJacobian {
                estimate: self.jacobian_defect_bound,
            });
        }
        let pts = grid::grid_points(n, resolution);
        let shifted = self.eval_on_grid(resolution)?;
        let v_shift: Vec<Vec<f64>> = (0..n)
            .map(|i| v.component(i).eval_at(&shifted))
            .collect();
        // DD·ω = X_ω D, exact in spectrum
        let dd_omega: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                self.displacement
                    .component(i)
                    .directional_derivative(omega)
                    .expect("dims checked")
                    .grid_values(resolution)
                    .expect("alias-free resolution")
            })
            .collect();
        let jac = self.jacobian_on_grid(resolution)?;
        let _ = &pts;
        let mut out_vals = vec![vec![0.0; pts.len()]; n];
        for p in 0..pts.len() {
            let rhs: Vec<f64> = (0..n).map(|i| v_shift[i][p] - dd_omega[i][p]).collect();
            let sol = linalg::solve_dense(jac[p].clone(), rhs)?;
            for i in 0..n {
                out_vals[i][p] = sol[i];
            }
        }
        let mut comps = Vec::with_capacity(n);
        let mut tail = 0.0f64;
        for vals in out_vals {
            let g = GridScalar::new(n, resolution, vals)?;
            tail = tail.max(grid::tail_mass_beyond(&g, cutoff));
            comps.push(grid::from_grid(&g, cutoff)?);
        }
        Ok((SpectralVectorField::new(comps)?, tail))
    }

    /// Plain linear pullback of a (small) vector field: (DΦ)⁻¹ (V ∘ Φ).
    /// This is Φ*V for V alone, without the constant part of a full field.
    pub fn pullback_linear(
        &self,
        v: &SpectralVectorField,
        cutoff: i64,
        resolution: usize,
    ) -> Result<(SpectralVectorField, f64)> {
        let n = self.dim();
        if v.dim() != n {
            return Err(CoreError::DimensionMismatch("pullback_linear".into()));
        }
        let shifted = self.eval_on_grid(resolution)?;
        let v_shift: Vec<Vec<f64>> = (0..n)
            .map(|i| v.component(i).eval_at(&shifted))
            .collect();
        let jac = self.jacobian_on_grid(resolution)?;
        let mut out_vals = vec![vec![0.0; shifted.len()]; n];
        for p in 0..shifted.len() {
            let rhs: Vec<f64> = (0..n).map(|i| v_shift[i][p]).collect();
            let sol = linalg::solve_dense(jac[p].clone(), rhs)?;
            for i in 0..n {
                out_vals[i][p] = sol[i];
            }
        }
        let mut comps = Vec::with_capacity(n);
        let mut tail = 0.0f64;
        for vals in out_vals {
            let g = GridScalar::new(n, resolution, vals)?;
            tail = tail.max(grid::tail_mass_beyond(&g, cutoff));
            comps.push(grid::from_grid(&g, cutoff)?);
        }
        Ok((SpectralVectorField::new(comps)?, tail))
    }

    /// Pullback of a constant vector λ through this map used as a modifying
    /// frame: the field Θ*λ(x) = (DΘ(x))⁻¹ λ.
    pub fn pullback_constant(
        &self,
        lambda: &[f64],
        cutoff: i64,
        resolution: usize,
    ) -> Result<SpectralVectorField> {
        let n = self.dim();
        let jac = self.jacobian_on_grid(resolution)?;
        let mut out_vals = vec![vec![0.0; jac.len()]; n];
        for p in 0..jac.len() {
            let sol = linalg::solve_dense(jac[p].clone(), lambda.to_vec())?;
            for i in 0..n {
                out_vals[i][p] = sol[i];
            }
        }
        let comps = out_vals
            .into_iter()
            .map(|vals| grid::from_grid(&GridScalar::new(n, resolution, vals)?, cutoff))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralVectorField::new(comps)?)
    }

    /// Mean over the torus of (DΘ)⁻¹, the n×n matrix governing the modifying
    /// term's average equation.
    pub fn mean_inverse_jacobian(&self, resolution: usize) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        let jac = self.jacobian_on_grid(resolution)?;
        let mut acc = vec![vec![0.0; n]; n];
        for j in &jac {
            let inv = linalg::invert_dense(j)?;
            for i in 0..n {
                for l in 0..n {
                    acc[i][l] += inv[i][l];
                }
            }
        }
        let m = jac.len() as f64;
        for row in &mut acc {
            for v in row {
                *v /= m;
            }
        }
        Ok(acc)
    }
}

fn displacement_jacobian_bound(d: &SpectralVectorField) -> Result<f64> {
    let n = d.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut row = 0.0;
        for l in 0..n {
            row += d.component(i).partial_derivative(l)?.l1_norm(0.0);
        }
        worst = worst.max(row);
    }
    Ok(worst)
}

/// Normalize a conjugacy representative: replace Φ by Φ ∘ T_v with the
/// translation v chosen so the displacement has zero mean.
pub fn normalize_mean_displacement(
    map: &TorusMap,
    cutoff: i64,
    resolution: usize,
) -> Result<TorusMap> {
    let n = map.dim();
    let mean = map.displacement.mean();
    if mean.iter().all(|&m| m.abs() < 1e-15) {
        return Ok(map.clone());
    }
    let v: Vec<f64> = mean.iter().map(|&m| -m).collect();
    let mut shift_comps = Vec::with_capacity(n);
    for &vi in &v {
        shift_comps.push(SpectralScalar::constant(n, 0, vi));
    }
    let shift = TorusMap::from_displacement(SpectralVectorField::new(shift_comps)?)?;
    let (normalized, _) = map.compose(&shift, cutoff, resolution)?;
    Ok(normalized)
}

/// Sup-distance between two maps measured as displacement difference on a grid.
pub fn map_distance(a: &TorusMap, b: &TorusMap, resolution: usize) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(CoreError::DimensionMismatch("map_distance".into()));
    }
    let n = a.dim();
    let resolution = resolution
        .max(grid::alias_free_resolution(a.cutoff()))
        .max(grid::alias_free_resolution(b.cutoff()));
    let ea = a.eval_on_grid(resolution)?;
    let eb = b.eval_on_grid(resolution)?;
    let mut worst = 0.0f64;
    for (pa, pb) in ea.iter().zip(&eb) {
        for i in 0..n {
            let mut d = pa[i] - pb[i];
            d -= d.round();
            worst = worst.max(d.abs());
        }
    }
    Ok(worst)
}
