//! Uniform-grid sampling of spectra and the FFT-backed transform pair.

use super::SpectralScalar;
use crate::error::{CoreError, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Real samples of a function on the uniform grid (j₁/N, …, j_n/N),
/// row-major with the last axis fastest.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridScalar {
    n: usize,
    resolution: usize,
    values: Vec<f64>,
}

impl GridScalar {
    pub fn new(n: usize, resolution: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != resolution.pow(n as u32) {
            return Err(CoreError::DimensionMismatch(format!(
                "grid needs {}^{} values, got {}",
                resolution,
                n,
                values.len()
            )));
        }
        Ok(GridScalar {
            n,
            resolution,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pointwise(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.n != other.n || self.resolution != other.resolution {
            return Err(CoreError::DimensionMismatch("grid pointwise".into()));
        }
        Ok(GridScalar {
            n: self.n,
            resolution: self.resolution,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    /// Grid points as coordinate rows, in value order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        grid_points(self.n, self.resolution)
    }
}

/// Smallest alias-free resolution for cutoff K (N ≥ 2K+2).
pub fn alias_free_resolution(cutoff: i64) -> usize {
    (2 * cutoff.max(0) as usize + 2).max(4)
}

/// Uniform grid points of `T^n` at the given resolution, row-major, last axis
/// fastest; coordinates in [0,1).
pub fn grid_points(n: usize, resolution: usize) -> Vec<Vec<f64>> {
    let total = resolution.pow(n as u32);
    let mut pts = Vec::with_capacity(total);
    for flat in 0..total {
        let mut p = vec![0.0; n];
        let mut rem = flat;
        for axis in (0..n).rev() {
            p[axis] = (rem % resolution) as f64 / resolution as f64;
            rem /= resolution;
        }
        pts.push(p);
    }
    pts
}

fn fft_all_axes(data: &mut [Complex64], n: usize, res: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(res)
    } else {
        planner.plan_fft_forward(res)
    };
    let total = data.len();
    let mut line = vec![Complex64::new(0.0, 0.0); res];
    // transform along each axis in turn
    for axis in (0..n).rev() {
        // stride of the axis in the row-major layout (last axis fastest)
        let stride = res.pow((n - 1 - axis) as u32);
        let lines = total / res;
        for l in 0..lines {
            // base index of this line: interleave the non-axis counters
            let block = stride * res;
            let base = (l / stride) * block + (l % stride);
            for i in 0..res {
                line[i] = data[base + i * stride];
            }
            fft.process(&mut line);
            for i in 0..res {
                data[base + i * stride] = line[i];
            }
        }
    }
}

/// Sample a spectrum on the uniform N^n grid: f(x_j) = Σ f_k e^{2πi k·x_j}.
/// Requires N ≥ 2K+2 so the embedding k ↦ k mod N is injective on the support.
pub fn to_grid(f: &SpectralScalar, resolution: usize) -> Result<GridScalar> {
    let k = f.cutoff();
    if (resolution as i64) < 2 * k + 2 {
        return Err(CoreError::Aliasing {
            n: resolution,
            k,
        });
    }
    let n = f.dim();
    let total = resolution.pow(n as u32);
    let mut data = vec![Complex64::new(0.0, 0.0); total];
    for (idx, c) in f.iter() {
        let mut flat = 0usize;
        for &ki in &idx.0 {
            let wrapped = ki.rem_euclid(resolution as i64) as usize;
            flat = flat * resolution + wrapped;
        }
        data[flat] += c;
    }
    fft_all_axes(&mut data, n, resolution, true);
    let values = data.iter().map(|c| c.re).collect();
    GridScalar::new(n, resolution, values)
}

/// Recover the spectrum up to cutoff K from grid samples; exact (up to
/// round-off) when the sampled function is a trig polynomial of cutoff
/// ≤ (N−2)/2. Output is Hermitian-cleaned.
pub fn from_grid(g: &GridScalar, cutoff: i64) -> Result<SpectralScalar> {
    let res = g.resolution;
    if cutoff > (res as i64 - 2) / 2 {
        return Err(CoreError::Aliasing { n: res, k: cutoff });
    }
    let n = g.n;
    let mut data: Vec<Complex64> = g.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_all_axes(&mut data, n, res, false);
    let scale = 1.0 / res.pow(n as u32) as f64;
    let mut entries = Vec::new();
    let mut idx = vec![-cutoff; n];
    'outer: loop {
        let mut flat = 0usize;
        for &ki in idx.iter() {
            flat = flat * res + ki.rem_euclid(res as i64) as usize;
        }
        let c = data[flat] * scale;
        if c.norm() > 1e-18 {
            entries.push((idx.clone(), c));
        }
        // odometer over [-K, K]^n, last axis fastest
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
    SpectralScalar::from_entries(n, cutoff, entries)
}

/// Forward transform retaining everything up to the Nyquist box, used to
/// certify discarded tails: returns the l1 mass of modes with |k| > cutoff.
pub fn tail_mass_beyond(g: &GridScalar, cutoff: i64) -> f64 {
    let res = g.resolution;
    let n = g.n;
    let mut data: Vec<Complex64> = g.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_all_axes(&mut data, n, res, false);
    let scale = 1.0 / res.pow(n as u32) as f64;
    let half = (res as i64) / 2;
    let mut mass = 0.0;
    for (flat, c) in data.iter().enumerate() {
        // unwrap the index to the symmetric range
        let mut rem = flat;
        let mut maxabs = 0i64;
        for axis in (0..n).rev() {
            let _ = axis;
            let w = (rem % res) as i64;
            rem /= res;
            let k = if w > half { w - res as i64 } else { w };
            maxabs = maxabs.max(k.abs());
        }
        if maxabs > cutoff {
            mass += c.norm() * scale;
        }
    }
    mass
}
