//! Truncated Fourier series on `T^n`: spectra, weighted norms, calculus, and
//! the grid machinery behind products, compositions and pullbacks.
//!
//! A [`SpectralScalar`] is a finitely supported Hermitian-symmetric map from
//! integer frequency vectors to complex amplitudes, i.e. a real trigonometric
//! polynomial `f(x) = Σ f_k e^{2πi k·x}` with `conj(f_k) = f_{-k}` and
//! `|k|_∞ ≤ K`. All norms use the max-norm on frequencies.

pub mod grid;
pub mod map;

use crate::error::{CoreError, Result};
use crate::weights::Weight;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Integer frequency vector; `|k|` is the max-norm.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Max-norm |k| = max_i |k_i|.
    pub fn max_norm(&self) -> i64 {
        self.0.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    pub fn neg(&self) -> Self {
        MultiIndex(self.0.iter().map(|v| -v).collect())
    }

    /// Euclidean inner product k·ω.
    pub fn dot(&self, omega: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(omega)
            .map(|(&k, &w)| k as f64 * w)
            .sum()
    }
}

/// Finitely supported real Fourier series on `T^n`.
///
/// Serializes as `{n, K, entries: [{k: [..], re, im}, ...]}` with entries in
/// lexicographic k-order.
#[derive(Clone, Debug)]
pub struct SpectralScalar {
    n: usize,
    cutoff: i64,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct SpectralEntry {
    k: Vec<i64>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SpectralRepr {
    n: usize,
    #[serde(rename = "K")]
    cutoff: i64,
    entries: Vec<SpectralEntry>,
}

impl Serialize for SpectralScalar {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        SpectralRepr {
            n: self.n,
            cutoff: self.cutoff,
            entries: self
                .coeffs
                .iter()
                .map(|(k, c)| SpectralEntry {
                    k: k.0.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for SpectralScalar {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = SpectralRepr::deserialize(de)?;
        SpectralScalar::from_entries(
            repr.n,
            repr.cutoff,
            repr.entries
                .into_iter()
                .map(|e| (e.k, Complex64::new(e.re, e.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}

const DROP_TOL: f64 = 1e-300;

impl SpectralScalar {
    pub fn zero(n: usize, cutoff: i64) -> Self {
        SpectralScalar {
            n,
            cutoff,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, cutoff: i64, value: f64) -> Self {
        let mut s = Self::zero(n, cutoff);
        if value != 0.0 {
            s.coeffs.insert(MultiIndex::zero(n), Complex64::new(value, 0.0));
        }
        s
    }

    /// Build from (k, amplitude) entries. Missing mirrors are filled in by
    /// conjugation; when both ±k are given they are Hermitian-averaged.
    pub fn from_entries(
        n: usize,
        cutoff: i64,
        entries: impl IntoIterator<Item = (Vec<i64>, Complex64)>,
    ) -> Result<Self> {
        let mut raw: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (k, c) in entries {
            if k.len() != n {
                return Err(CoreError::DimensionMismatch(format!(
                    "entry index length {} ≠ n = {n}",
                    k.len()
                )));
            }
            let k = MultiIndex(k);
            if k.max_norm() > cutoff {
                return Err(CoreError::InvalidParameter(format!(
                    "mode {:?} exceeds cutoff {cutoff}",
                    k.0
                )));
            }
            *raw.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        let mut s = Self::zero(n, cutoff);
        for (k, c) in &raw {
            if s.coeffs.contains_key(k) {
                continue;
            }
            let mirror = raw.get(&k.neg());
            let sym = match mirror {
                Some(m) => (c + m.conj()) * 0.5,
                None => *c,
            };
            if k.is_zero() {
                s.coeffs.insert(k.clone(), Complex64::new(sym.re, 0.0));
            } else {
                s.coeffs.insert(k.clone(), sym);
                s.coeffs.insert(k.neg(), sym.conj());
            }
        }
        s.prune();
        Ok(s)
    }

    /// Real cosine mode: amplitude·cos(2π k·x), stored as amplitude/2 at ±k.
    pub fn cosine(n: usize, cutoff: i64, k: Vec<i64>, amplitude: f64) -> Result<Self> {
        Self::from_entries(n, cutoff, [(k, Complex64::new(amplitude / 2.0, 0.0))])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, k: &MultiIndex) -> Complex64 {
        self.coeffs
            .get(k)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    /// Mean value = coefficient at k = 0.
    pub fn mean(&self) -> f64 {
        self.coeff(&MultiIndex::zero(self.n)).re
    }

    pub fn set_mean(&mut self, value: f64) {
        let k0 = MultiIndex::zero(self.n);
        if value == 0.0 {
            self.coeffs.remove(&k0);
        } else {
            self.coeffs.insert(k0, Complex64::new(value, 0.0));
        }
    }

    /// Insert amplitude c at k and conj(c) at −k.
    pub fn set_pair(&mut self, k: Vec<i64>, c: Complex64) -> Result<()> {
        let k = MultiIndex(k);
        if k.dim() != self.n {
            return Err(CoreError::DimensionMismatch("set_pair index".into()));
        }
        if k.max_norm() > self.cutoff {
            return Err(CoreError::InvalidParameter(format!(
                "mode {:?} exceeds cutoff {}",
                k.0, self.cutoff
            )));
        }
        if k.is_zero() {
            self.coeffs.insert(k, Complex64::new(c.re, 0.0));
        } else {
            self.coeffs.insert(k.neg(), c.conj());
            self.coeffs.insert(k, c);
        }
        Ok(())
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, c| c.norm() > DROP_TOL);
    }

    /// Largest Hermitian-symmetry defect max_k |c_k − conj(c_{-k})|.
    pub fn hermitian_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| (c - self.coeff(&k.neg()).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(CoreError::DimensionMismatch("add".into()));
        }
        let mut out = self.clone();
        out.cutoff = self.cutoff.max(other.cutoff);
        for (k, c) in &other.coeffs {
            *out.coeffs.entry(k.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= factor;
        }
        out.prune();
        out
    }

    /// Restrict the support to |k| ≤ new_cutoff; returns the truncation and
    /// the plain l1 mass of what was discarded.
    pub fn truncate(&self, new_cutoff: i64) -> (Self, f64) {
        let mut out = Self::zero(self.n, new_cutoff);
        let mut lost = 0.0;
        for (k, c) in &self.coeffs {
            if k.max_norm() <= new_cutoff {
                out.coeffs.insert(k.clone(), *c);
            } else {
                lost += c.norm();
            }
        }
        (out, lost)
    }

    /// Derivative along ω: coefficient at k becomes i·2π(k·ω)·f_k.
    /// The k = 0 coefficient of the result is always 0.
    pub fn directional_derivative(&self, omega: &[f64]) -> Result<Self> {
        if omega.len() != self.n {
            return Err(CoreError::DimensionMismatch("directional_derivative".into()));
        }
        let mut out = Self::zero(self.n, self.cutoff);
        for (k, c) in &self.coeffs {
            if k.is_zero() {
                continue;
            }
            let factor = Complex64::new(0.0, 2.0 * std::f64::consts::PI * k.dot(omega));
            let v = c * factor;
            if v.norm() > DROP_TOL {
                out.coeffs.insert(k.clone(), v);
            }
        }
        Ok(out)
    }

    /// Partial derivative ∂/∂x_axis.
    pub fn partial_derivative(&self, axis: usize) -> Result<Self> {
        if axis >= self.n {
            return Err(CoreError::DimensionMismatch("partial_derivative axis".into()));
        }
        let mut e = vec![0.0; self.n];
        e[axis] = 1.0;
        self.directional_derivative(&e)
    }

    /// Weighted l∞ norm ‖f‖_r = max_k |f_k| e^{r φ(|k|)} (exact over support).
    pub fn weighted_norm(&self, w: &Weight<f64>, r: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| c.norm() * (r * w.eval(k.max_norm() as f64)).exp())
            .fold(0.0, f64::max)
    }

    /// Fourier l1 norm with analytic width s: Σ_k |f_k| e^{s|k|}.
    pub fn l1_norm(&self, s: f64) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .map(|(k, c)| c.norm() * (s * k.max_norm() as f64).exp())
            .sum();
        sum + 0.0 // normalizes the empty sum's -0.0
    }

    /// Certified upper bound for the strip sup-norm |f|_s, via the l1 chain.
    pub fn strip_sup_bound(&self, s: f64) -> f64 {
        self.l1_norm(s)
    }

    /// Measured sup over the real torus, sampled on an alias-free grid.
    pub fn grid_sup(&self) -> Result<f64> {
        let res = grid::alias_free_resolution(self.cutoff);
        let g = grid::to_grid(self, res)?;
        Ok(g.values().iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// Evaluate at arbitrary torus points (each row one point, coordinates in
    /// units of the period). Returns the real values. Uses the Hermitian
    /// half-support: f(x) = c₀ + 2·Re Σ_{k in half} c_k e^{2πik·x}.
    ///
    /// For uniform grids prefer [`grid::to_grid`], which goes through the FFT.
    pub fn eval_at(&self, points: &[Vec<f64>]) -> Vec<f64> {
        // half-support: first nonzero component positive
        let half: Vec<(&MultiIndex, &Complex64)> = self
            .coeffs
            .iter()
            .filter(|(k, _)| k.0.iter().find(|&&v| v != 0).map_or(false, |&v| v > 0))
            .collect();
        let mean = self.mean();
        let k = self.cutoff.max(0) as usize;
        let width = 2 * k + 1;
        let mut powers = vec![Complex64::new(1.0, 0.0); self.n * width];
        let mut out = Vec::with_capacity(points.len());
        for p in points {
            // powers[axis][k + K] = e^{2πi k p_axis}, built by recurrence
            for axis in 0..self.n {
                let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * p[axis]);
                let row = &mut powers[axis * width..(axis + 1) * width];
                row[k] = Complex64::new(1.0, 0.0);
                for j in 1..=k {
                    row[k + j] = row[k + j - 1] * z;
                    row[k - j] = row[k - j + 1] * z.conj();
                }
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (idx, c) in &half {
                let mut term = **c;
                for (axis, &ki) in idx.0.iter().enumerate() {
                    term *= powers[axis * width + (ki + k as i64) as usize];
                }
                acc += term;
            }
            out.push(mean + 2.0 * acc.re);
        }
        out
    }

    /// Values on the uniform N^n grid via the FFT (row-major, last axis
    /// fastest) — the fast path for uniform sampling.
    pub fn grid_values(&self, resolution: usize) -> crate::error::Result<Vec<f64>> {
        Ok(grid::to_grid(self, resolution)?.values().to_vec())
    }
}

/// n-tuple of spectral scalars sharing dimension and cutoff.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralVectorField {
    components: Vec<SpectralScalar>,
}

impl SpectralVectorField {
    pub fn new(components: Vec<SpectralScalar>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(CoreError::DimensionMismatch("empty vector field".into()));
        }
        for c in &components {
            if c.dim() != n {
                return Err(CoreError::DimensionMismatch(
                    "component count must equal torus dimension".into(),
                ));
            }
        }
        Ok(SpectralVectorField { components })
    }

    pub fn zero(n: usize, cutoff: i64) -> Self {
        SpectralVectorField {
            components: (0..n).map(|_| SpectralScalar::zero(n, cutoff)).collect(),
        }
    }

    /// f·ω for a scalar f and constant vector ω.
    pub fn from_scalar_times_vector(f: &SpectralScalar, omega: &[f64]) -> Result<Self> {
        if omega.len() != f.dim() {
            return Err(CoreError::DimensionMismatch("from_scalar_times_vector".into()));
        }
        Ok(SpectralVectorField {
            components: omega.iter().map(|&w| f.scale(w)).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn cutoff(&self) -> i64 {
        self.components.iter().map(|c| c.cutoff()).max().unwrap_or(0)
    }

    pub fn component(&self, i: usize) -> &SpectralScalar {
        &self.components[i]
    }

    pub fn components(&self) -> &[SpectralScalar] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [SpectralScalar] {
        &mut self.components
    }

    pub fn map(&self, f: impl Fn(&SpectralScalar) -> SpectralScalar) -> Self {
        SpectralVectorField {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn try_map(
        &self,
        f: impl Fn(&SpectralScalar) -> Result<SpectralScalar>,
    ) -> Result<Self> {
        Ok(SpectralVectorField {
            components: self
                .components
                .iter()
                .map(f)
                .collect::<Result<Vec<_>>>()?,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralVectorField { components })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.map(|c| c.scale(-1.0)))
    }

    /// Componentwise mean vector.
    pub fn mean(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.mean()).collect()
    }

    /// ‖F‖_r = max over components.
    pub fn weighted_norm(&self, w: &Weight<f64>, r: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weighted_norm(w, r))
            .fold(0.0, f64::max)
    }

    /// l1-at-width norm, max over components.
    pub fn l1_norm(&self, s: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.l1_norm(s))
            .fold(0.0, f64::max)
    }

    pub fn truncate(&self, new_cutoff: i64) -> (Self, f64) {
        let mut lost = 0.0;
        let components = self
            .components
            .iter()
            .map(|c| {
                let (t, l) = c.truncate(new_cutoff);
                lost = f64::max(lost, l);
                t
            })
            .collect();
        (SpectralVectorField { components }, lost)
    }
}

/// Pointwise product, computed on an alias-free grid (resolution
/// ≥ 2(K_f+K_g)+2) and truncated at K_f+K_g; exact for trig polynomials.
pub fn multiply(f: &SpectralScalar, g: &SpectralScalar) -> Result<SpectralScalar> {
    if f.dim() != g.dim() {
        return Err(CoreError::DimensionMismatch("multiply".into()));
    }
    let k_out = f.cutoff() + g.cutoff();
    let res = grid::alias_free_resolution(k_out);
    let fg = grid::to_grid(f, res)?;
    let gg = grid::to_grid(g, res)?;
    let prod = fg.pointwise(&gg, |a, b| a * b)?;
    grid::from_grid(&prod, k_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::Weight;
    use crate::GOLDEN_RATIO;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn golden_omega() -> Vec<f64> {
        vec![1.0, GOLDEN_RATIO]
    }

    #[test]
    fn hermitian_autocompletion() {
        let f = SpectralScalar::from_entries(2, 3, [(vec![1, -1], Complex64::new(0.3, 0.4))])
            .unwrap();
        assert_eq!(f.support_len(), 2);
        assert_relative_eq!(f.coeff(&MultiIndex(vec![-1, 1])).re, 0.3);
        assert_relative_eq!(f.coeff(&MultiIndex(vec![-1, 1])).im, -0.4);
        assert!(f.hermitian_defect() < 1e-15);
    }

    #[test]
    fn multiply_identity_and_square() {
        let one = SpectralScalar::constant(2, 0, 1.0);
        let f = SpectralScalar::cosine(2, 4, vec![1, 2], 0.7).unwrap();
        let p = multiply(&f, &one).unwrap();
        assert!(p.sub(&f).unwrap().l1_norm(0.0) < 1e-13);

        // ((e_k + e_{-k})/2)^2 has modes 0, ±2k with amplitudes 1/2, 1/4
        let c = SpectralScalar::cosine(2, 1, vec![1, 0], 1.0).unwrap();
        let sq = multiply(&c, &c).unwrap();
        assert_relative_eq!(sq.mean(), 0.5, epsilon = 1e-13);
        assert_relative_eq!(
            sq.coeff(&MultiIndex(vec![2, 0])).re,
            0.25,
            epsilon = 1e-13
        );
        assert!(sq.coeff(&MultiIndex(vec![1, 0])).norm() < 1e-13);
    }

    #[test]
    fn directional_derivative_values() {
        // constant → 0
        let c = SpectralScalar::constant(2, 0, 3.0);
        assert_eq!(
            c.directional_derivative(&golden_omega())
                .unwrap()
                .support_len(),
            0
        );
        // single mode k0=(1,-1), ω=(1,φ), amplitude 1/2 → magnitude π|1−φ|
        let f =
            SpectralScalar::from_entries(2, 1, [(vec![1, -1], Complex64::new(0.5, 0.0))]).unwrap();
        let d = f.directional_derivative(&golden_omega()).unwrap();
        let got = d.coeff(&MultiIndex(vec![1, -1])).norm();
        let expect = std::f64::consts::PI * (GOLDEN_RATIO - 1.0);
        assert_relative_eq!(got, expect, max_relative = 1e-12);
        assert_relative_eq!(expect, 1.9416110, max_relative = 1e-6);
        // zero mean always
        assert_eq!(d.mean(), 0.0);
    }

    #[test]
    fn weighted_norm_single_mode() {
        // |k|=4, amplitude 0.1, Gevrey a=0.5, r=1 → 0.1 e^4
        let f = SpectralScalar::from_entries(2, 4, [(vec![4, 0], Complex64::new(0.1, 0.0))])
            .unwrap();
        let w = Weight::gevrey(0.5).unwrap();
        assert_relative_eq!(
            f.weighted_norm(&w, 1.0),
            0.1 * 4.0f64.exp(),
            max_relative = 1e-12
        );
        assert_relative_eq!(0.1 * 4.0f64.exp(), 5.459815, max_relative = 1e-6);
        // monotone in r
        assert!(f.weighted_norm(&w, 0.5) <= f.weighted_norm(&w, 1.0));
        // zero series → 0
        assert_eq!(SpectralScalar::zero(2, 4).weighted_norm(&w, 1.0), 0.0);
    }

    #[test]
    fn l1_norm_and_sup_chain() {
        // single mode |k| = m, amplitude A → l1 = 2A e^{sm}
        let f = SpectralScalar::from_entries(2, 3, [(vec![3, 1], Complex64::new(0.2, 0.0))])
            .unwrap();
        assert_relative_eq!(f.l1_norm(0.5), 2.0 * 0.2 * (0.5 * 3.0f64).exp());
        assert_eq!(SpectralScalar::zero(2, 3).l1_norm(1.0), 0.0);
    }

    #[test]
    fn eval_matches_grid() {
        let f = SpectralScalar::from_entries(
            2,
            3,
            [
                (vec![1, 0], Complex64::new(0.3, -0.1)),
                (vec![2, -3], Complex64::new(0.05, 0.2)),
                (vec![0, 0], Complex64::new(0.7, 0.0)),
            ],
        )
        .unwrap();
        let res = grid::alias_free_resolution(3);
        let g = grid::to_grid(&f, res).unwrap();
        let pts: Vec<Vec<f64>> = (0..res)
            .flat_map(|i| (0..res).map(move |j| vec![i as f64 / res as f64, j as f64 / res as f64]))
            .collect();
        let vals = f.eval_at(&pts);
        for (a, b) in vals.iter().zip(g.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn roundtrip_grid_spectrum(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let k = 8i64;
            let mut f = SpectralScalar::zero(2, k);
            for _ in 0..12 {
                let kx = rng.gen_range(-k..=k);
                let ky = rng.gen_range(-k..=k);
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                f.set_pair(vec![kx, ky], c).unwrap();
            }
            let n = 18; // ≥ 2K+2
            let g = grid::to_grid(&f, n).unwrap();
            let back = grid::from_grid(&g, k).unwrap();
            let err = back.sub(&f).unwrap().l1_norm(0.0);
            prop_assert!(err <= 1e-12, "roundtrip error {err}");
            prop_assert!(back.hermitian_defect() < 1e-12);
        }

        #[test]
        fn multiply_matches_pointwise(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut f = SpectralScalar::zero(2, 3);
            let mut g = SpectralScalar::zero(2, 2);
            for _ in 0..5 {
                f.set_pair(vec![rng.gen_range(-3..=3), rng.gen_range(-3..=3)],
                           Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap();
                g.set_pair(vec![rng.gen_range(-2..=2), rng.gen_range(-2..=2)],
                           Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap();
            }
            let p = multiply(&f, &g).unwrap();
            let res = grid::alias_free_resolution(p.cutoff());
            let pf = grid::to_grid(&f, res).unwrap();
            let pg = grid::to_grid(&g, res).unwrap();
            let pp = grid::to_grid(&p, res).unwrap();
            for ((a, b), c) in pf.values().iter().zip(pg.values()).zip(pp.values()) {
                prop_assert!((a * b - c).abs() < 1e-12);
            }
        }

        #[test]
        fn norm_inequality_chain(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut f = SpectralScalar::zero(2, 6);
            for _ in 0..8 {
                f.set_pair(vec![rng.gen_range(-6..=6), rng.gen_range(-6..=6)],
                           Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap();
            }
            let s = 0.3;
            let sup0 = f.grid_sup().unwrap();
            prop_assert!(sup0 <= f.l1_norm(0.0) + 1e-12);
            prop_assert!(f.l1_norm(0.0) <= f.l1_norm(s) + 1e-12);
        }
    }

    #[test]
    fn parseval_mean_consistency() {
        let f = SpectralScalar::from_entries(
            2,
            5,
            [
                (vec![0, 0], Complex64::new(1.25, 0.0)),
                (vec![3, 2], Complex64::new(0.4, 0.1)),
            ],
        )
        .unwrap();
        let g = grid::to_grid(&f, 16).unwrap();
        let mean: f64 = g.values().iter().sum::<f64>() / g.values().len() as f64;
        assert_relative_eq!(mean, 1.25, epsilon = 1e-12);
    }

    #[test]
    fn vector_field_norm_is_component_max() {
        let f = SpectralScalar::cosine(2, 2, vec![1, 0], 0.5).unwrap();
        let v = SpectralVectorField::from_scalar_times_vector(&f, &[1.0, 3.0]).unwrap();
        let w = Weight::gevrey(0.5).unwrap();
        assert_relative_eq!(
            v.weighted_norm(&w, 1.0),
            3.0 * f.weighted_norm(&w, 1.0),
            max_relative = 1e-13
        );
    }
}
