//! Seed-deterministic test fixtures: random Gevrey-enveloped spectra and the
//! reparametrized perturbation family.

use crate::error::Result;
use crate::fourier::grid::{self, GridScalar};
use crate::fourier::{SpectralScalar, SpectralVectorField};
use crate::weights::Weight;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random spectrum under the envelope |f_k| ≤ amplitude·e^{-r φ_a(|k|)},
/// Hermitian by construction, k = 0 excluded.
pub fn random_gevrey_scalar(
    n: usize,
    cutoff: i64,
    r: f64,
    a: f64,
    amplitude: f64,
    seed: u64,
) -> Result<SpectralScalar> {
    let w = Weight::gevrey(a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralScalar::zero(n, cutoff);
    let mut idx = vec![-cutoff; n];
    'outer: loop {
        let lead = idx.iter().find(|&&v| v != 0).copied();
        if lead.map_or(false, |v| v > 0) {
            let norm = idx.iter().map(|v| v.abs()).max().unwrap() as f64;
            let env = amplitude * (-r * w.eval(norm)).exp();
            let mag = rng.gen_range(0.5..1.0) * env;
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            f.set_pair(idx.clone(), Complex64::from_polar(mag, phase))?;
        }
        let mut axis = n - 1;
        loop {
            idx[axis] += 1;
            if idx[axis] <= cutoff {
                break;
            }
            idx[axis] = -cutoff;
            if axis == 0 {
                break 'outer;
            }
            axis -= 1;
        }
    }
    Ok(f)
}

/// Random Gevrey vector field rescaled so that ‖F‖_{r} (weighted norm at the
/// given r) equals `epsilon0` exactly.
pub fn random_gevrey_field(
    n: usize,
    cutoff: i64,
    r: f64,
    a: f64,
    epsilon0: f64,
    seed: u64,
) -> Result<SpectralVectorField> {
    let w = Weight::gevrey(a)?;
    let comps = (0..n)
        .map(|i| random_gevrey_scalar(n, cutoff, r, a, 1.0, seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let field = SpectralVectorField::new(comps)?;
    let norm = field.weighted_norm(&w, r);
    Ok(field.map(|c| c.scale(epsilon0 / norm)))
}

/// The perturbation P = (1/f − 1)ω of a reparametrized constant field.
pub fn reparametrized_perturbation(
    f: &SpectralScalar,
    omega: &[f64],
    cutoff: i64,
    resolution: usize,
) -> Result<SpectralVectorField> {
    let g = grid::to_grid(f, resolution)?;
    let vals: Vec<f64> = g.values().iter().map(|&v| 1.0 / v - 1.0).collect();
    let scalar = grid::from_grid(&GridScalar::new(f.dim(), resolution, vals)?, cutoff)?;
    SpectralVectorField::from_scalar_times_vector(&scalar, omega)
}
