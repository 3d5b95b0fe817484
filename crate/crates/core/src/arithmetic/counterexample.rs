//! Divergence counterexample source: spectra supported on witness modes where
//! the divisor is exponentially small relative to the weight, so the
//! cohomological solution blows up at a certified rate.
//!
//! A witness for τ is a mode k with |2πk·ω|^{-1} ≥ e^{τφ(|k|)}. The source
//! carries f_{k_j} = (i·2πk_j·ω)|2πk_j·ω|^{-1/2}, so that
//! |f_{k_j}| = |2πk_j·ω|^{1/2} ≤ e^{-(τ_j/2)φ(|k_j|)} while the solved
//! g_{k_j} = |2πk_j·ω|^{-1/2} ≥ e^{(τ_j/2)φ(|k_j|)}. Because |g| overflows
//! f64 long before the construction stops being meaningful, every witness
//! carries certified log-domain data; the f64 spectrum is materialized only
//! for the representable part.

use super::cf::big_ln;
use super::Frequency;
use crate::error::{CoreError, Result};
use crate::fourier::{MultiIndex, SpectralScalar};
use crate::weights::Weight;
use num_complex::Complex64;

use serde::{Deserialize, Serialize};

/// One witness mode with certified logarithmic data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    /// Index j into the requested τ sequence.
    pub tau_index: usize,
    pub tau: f64,
    /// The mode, when it fits i64 components.
    pub k: Option<Vec<i64>>,
    /// |k| (max-norm) as f64.
    pub k_norm: f64,
    /// φ(|k|).
    pub phi_k: f64,
    /// Certified interval for ln |2πk·ω|⁻¹ (lo ≤ truth ≤ hi). For scan-based
    /// witnesses the interval is a point.
    pub ln_inv_divisor: (f64, f64),
    /// ln |f_k| interval = −(1/2)·ln|2πk·ω|⁻¹ reversed.
    pub ln_f: (f64, f64),
    /// ln |g_k| interval = +(1/2)·ln|2πk·ω|⁻¹.
    pub ln_g: (f64, f64),
}

/// The counterexample source.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CounterexampleSource {
    pub witnesses: Vec<Witness>,
    /// τ indices for which no witness existed below the cutoff.
    pub skipped: Vec<usize>,
    /// f materialized on the i64-representable witnesses.
    pub spectrum: Option<SpectralScalar>,
}

/// Build the source for the given τ sequence, searching |k| ≤ K.
///
/// With an exact continued-fraction presentation of ω = (1, α) the witnesses
/// are taken at the convergent pairs (p_n, −q_n) with certified divisor
/// intervals; otherwise a direct scan is used (n arbitrary, K modest).
pub fn counterexample_source(
    omega: &Frequency,
    weight: &Weight<f64>,
    tau_seq: &[f64],
    cutoff_hint: f64,
) -> Result<CounterexampleSource> {
    if tau_seq.is_empty() {
        return Err(CoreError::InvalidParameter("empty τ sequence".into()));
    }
    let mut witnesses = Vec::new();
    let mut skipped = Vec::new();

    if let Some(rec) = omega.exact_record() {
        // convergent-based witnesses with certified intervals
        let mut prev_q = 0.0f64;
        for (j, &tau) in tau_seq.iter().enumerate() {
            let mut found = false;
            for n in 1..rec.q.len().saturating_sub(1) {
                let qf = big_ln(&rec.q[n]).exp();
                if qf <= prev_q || qf > cutoff_hint {
                    continue;
                }
                // ln|2π k·ω|⁻¹ = −ln 2π − ln|q_n α − p_n| ∈ −ln2π + (−hi, −lo)
                let (lo_div, hi_div) = rec.ln_divisor_interval(n)?;
                let two_pi = (2.0 * std::f64::consts::PI).ln();
                let inv_lo = -two_pi - hi_div;
                let inv_hi = -two_pi - lo_div;
                let phi_k = weight.eval(qf);
                // certified witness: even the lower bound clears the bar
                if inv_lo >= tau * phi_k {
                    let k = rec
                        .convergent_i64(n)
                        .map(|(p, q)| vec![p, -q]);
                    witnesses.push(Witness {
                        tau_index: j,
                        tau,
                        k,
                        k_norm: qf,
                        phi_k,
                        ln_inv_divisor: (inv_lo, inv_hi),
                        ln_f: (-0.5 * inv_hi, -0.5 * inv_lo),
                        ln_g: (0.5 * inv_lo, 0.5 * inv_hi),
                    });
                    prev_q = qf;
                    found = true;
                    break;
                }
            }
            if !found {
                skipped.push(j);
            }
        }
    } else {
        // direct scan; requires modest K and n
        let k_max = cutoff_hint as i64;
        if k_max < 1 || k_max > 4096 {
            return Err(CoreError::InvalidParameter(
                "direct witness scan needs 1 ≤ K ≤ 4096".into(),
            ));
        }
        let om = omega.components();
        let n = om.len();
        let mut prev_norm = 0i64;
        for (j, &tau) in tau_seq.iter().enumerate() {
            let mut best: Option<(i64, Vec<i64>, f64)> = None;
            let mut idx = vec![-k_max; n];
            'outer: loop {
                if let Some(first) = idx.iter().find(|&&v| v != 0) {
                    if *first > 0 {
                        let k = MultiIndex(idx.clone());
                        let nk = k.max_norm();
                        if nk > prev_norm {
                            let div = (2.0 * std::f64::consts::PI * k.dot(om)).abs();
                            if div == 0.0 {
                                return Err(CoreError::Resonance { k: idx });
                            }
                            let ln_inv = -div.ln();
                            if ln_inv >= tau * weight.eval(nk as f64) {
                                let better = match &best {
                                    Some((bn, _, _)) => nk < *bn,
                                    None => true,
                                };
                                if better {
                                    best = Some((nk, idx.clone(), ln_inv));
                                }
                            }
                        }
                    }
                }
                let mut axis = n - 1;
                loop {
                    idx[axis] += 1;
                    if idx[axis] <= k_max {
                        break;
                    }
                    idx[axis] = -k_max;
                    if axis == 0 {
                        break 'outer;
                    }
                    axis -= 1;
                }
            }
            match best {
                Some((nk, k, ln_inv)) => {
                    let phi_k = weight.eval(nk as f64);
                    witnesses.push(Witness {
                        tau_index: j,
                        tau,
                        k: Some(k),
                        k_norm: nk as f64,
                        phi_k,
                        ln_inv_divisor: (ln_inv, ln_inv),
                        ln_f: (-0.5 * ln_inv, -0.5 * ln_inv),
                        ln_g: (0.5 * ln_inv, 0.5 * ln_inv),
                    });
                    prev_norm = nk;
                }
                None => skipped.push(j),
            }
        }
    }

    if witnesses.is_empty() {
        return Err(CoreError::EmptySupport {
            cutoff: cutoff_hint as i64,
        });
    }

    // materialize the representable part of f
    let spectrum = materialize(omega, &witnesses);
    Ok(CounterexampleSource {
        witnesses,
        skipped,
        spectrum,
    })
}

fn materialize(omega: &Frequency, witnesses: &[Witness]) -> Option<SpectralScalar> {
    let n = omega.dim();
    let mut cutoff = 0i64;
    let mut entries = Vec::new();
    for w in witnesses {
        let k = w.k.clone()?;
        cutoff = cutoff.max(k.iter().map(|v| v.abs()).max().unwrap_or(0));
        // f_k = (i 2π k·ω)|2πk·ω|^{-1/2}: phase i·sign(k·ω), magnitude |2πk·ω|^{1/2}
        let mid = 0.5 * (w.ln_f.0 + w.ln_f.1);
        if !(-700.0..700.0).contains(&mid) {
            return None;
        }
        let mag = mid.exp();
        let sign = {
            let dot = MultiIndex(k.clone()).dot(omega.components());
            if dot >= 0.0 {
                1.0
            } else {
                -1.0
            }
        };
        entries.push((k, Complex64::new(0.0, sign * mag)));
    }
    SpectralScalar::from_entries(n, cutoff, entries).ok()
}

/// Witness ladder pinned at prescribed convergent indices: witness j sits at
/// the convergent pair (p_n, −q_n) for n = `indices[j]`, with the largest
/// certainly-admissible τ_j = margin·(ln q_{n+1} − ln 2π − ln 2)/φ(q_n)
/// (the ln 2 absorbs the divisor interval width). Errors if any τ_j is not
/// positive, i.e. the convergent carries no witness at all.
pub fn convergent_witness_ladder(
    omega: &Frequency,
    weight: &Weight<f64>,
    indices: &[usize],
    margin: f64,
) -> Result<CounterexampleSource> {
    let rec = omega.exact_record().ok_or_else(|| {
        CoreError::InvalidParameter("ladder needs an exact continued-fraction frequency".into())
    })?;
    if !(0.0 < margin && margin <= 1.0) {
        return Err(CoreError::InvalidParameter("margin must lie in (0,1]".into()));
    }
    let two_pi = (2.0 * std::f64::consts::PI).ln();
    let mut witnesses = Vec::new();
    for (j, &n) in indices.iter().enumerate() {
        let (lo_div, hi_div) = rec.ln_divisor_interval(n)?;
        let inv_lo = -two_pi - hi_div;
        let inv_hi = -two_pi - lo_div;
        let qf = big_ln(&rec.q[n]).exp();
        let phi_k = weight.eval(qf);
        let tau = margin * inv_lo / phi_k;
        if tau <= 0.0 {
            return Err(CoreError::EmptySupport { cutoff: n as i64 });
        }
        debug_assert!(inv_lo >= tau * phi_k);
        witnesses.push(Witness {
            tau_index: j,
            tau,
            k: rec.convergent_i64(n).map(|(p, q)| vec![p, -q]),
            k_norm: qf,
            phi_k,
            ln_inv_divisor: (inv_lo, inv_hi),
            ln_f: (-0.5 * inv_hi, -0.5 * inv_lo),
            ln_g: (0.5 * inv_lo, 0.5 * inv_hi),
        });
    }
    let spectrum = materialize(omega, &witnesses);
    Ok(CounterexampleSource {
        witnesses,
        skipped: vec![],
        spectrum,
    })
}

/// One row of the divergence ladder: the log of ‖g‖_r restricted to witnesses
/// with |k| ≤ K, as a certified interval.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub cutoff: f64,
    pub ln_norm_lo: f64,
    pub ln_norm_hi: f64,
    pub witnesses_included: usize,
}

/// Growth ladder of ln ‖g‖_r over a set of cutoffs, computed entirely from
/// the witness log-data (robust far beyond f64 range).
pub fn divergence_table(
    source: &CounterexampleSource,
    weight: &Weight<f64>,
    r: f64,
    cutoffs: &[f64],
) -> Vec<DivergenceRow> {
    cutoffs
        .iter()
        .map(|&k_cut| {
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut count = 0;
            for w in &source.witnesses {
                if w.k_norm <= k_cut {
                    count += 1;
                    let wgt = r * weight.eval(w.k_norm);
                    lo = lo.max(w.ln_g.0 + wgt);
                    hi = hi.max(w.ln_g.1 + wgt);
                }
            }
            DivergenceRow {
                cutoff: k_cut,
                ln_norm_lo: lo,
                ln_norm_hi: hi,
                witnesses_included: count,
            }
        })
        .collect()
}

/// Per-witness check of the two displayed coefficient inequalities:
/// |f_{k_j}| ≤ e^{-(τ_j/2)φ(|k_j|)} and |g_{k_j}| ≥ e^{(τ_j/2)φ(|k_j|)},
/// in log domain. Returns the worst margins (≥ 0 means satisfied).
pub fn witness_inequality_margins(source: &CounterexampleSource) -> (f64, f64) {
    let mut f_margin = f64::INFINITY;
    let mut g_margin = f64::INFINITY;
    for w in &source.witnesses {
        let bar = 0.5 * w.tau * w.phi_k;
        f_margin = f_margin.min(-bar - w.ln_f.1);
        g_margin = g_margin.min(w.ln_g.0 - bar);
    }
    (f_margin, g_margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::cf::{liouville_builder, pow2_of_q_growth};
    use crate::arithmetic::Frequency;

    #[test]
    fn diophantine_frequency_has_no_witnesses() {
        // golden ω, large fixed τ, small K → empty support error
        let om = Frequency::golden(20);
        let w = Weight::gevrey(0.5).unwrap();
        let err = counterexample_source(&om, &w, &[5.0, 6.0], 50.0);
        assert!(matches!(err, Err(CoreError::EmptySupport { .. })));
    }

    #[test]
    fn capped_tower_produces_certified_witnesses() {
        let rec = liouville_builder(pow2_of_q_growth(12), 9, 1 << 14).unwrap();
        let om = Frequency::from_record(rec);
        let w = Weight::gevrey(0.5).unwrap();
        // τ_j smaller than the admissible bar at each convergent
        let taus = vec![1e-4, 1e-4, 1e-4, 1e-4];
        let src = counterexample_source(&om, &w, &taus, 1e19).unwrap();
        assert!(src.skipped.is_empty(), "skipped: {:?}", src.skipped);
        let (fm, gm) = witness_inequality_margins(&src);
        assert!(fm >= 0.0 && gm >= 0.0, "margins {fm} {gm}");
        // norms strictly increase along the ladder
        let cutoffs: Vec<f64> = src.witnesses.iter().map(|w| w.k_norm).collect();
        let table = divergence_table(&src, &w, 0.1, &cutoffs);
        for pair in table.windows(2) {
            assert!(pair[1].ln_norm_lo > pair[0].ln_norm_hi);
        }
    }

    #[test]
    fn scan_witnesses_on_liouville_like_numeric() {
        // builder with moderate growth so divisors at convergents are scannable
        let rec = liouville_builder(
            |q, n| {
                let _ = q;
                num_bigint::BigUint::from(1u64 << (2 * n as u32 + 1).min(8))
            },
            6,
            64,
        )
        .unwrap();
        let alpha = rec.alpha;
        let om = Frequency::numeric(vec![1.0, alpha]).unwrap();
        let w = Weight::gevrey(0.5).unwrap();
        let src = counterexample_source(&om, &w, &[0.05, 0.05], 300.0).unwrap();
        assert!(!src.witnesses.is_empty());
        assert!(src.spectrum.is_some());
        let spec = src.spectrum.as_ref().unwrap();
        // |f| values match the witness logs
        for wit in &src.witnesses {
            let k = MultiIndex(wit.k.clone().unwrap());
            let c = spec.coeff(&k);
            let mid = 0.5 * (wit.ln_f.0 + wit.ln_f.1);
            assert!((c.norm().ln() - mid).abs() < 1e-9);
        }
    }

    #[test]
    fn lemma3_fixed_tau_same_structure() {
        // fixed τ > 0 variant gives the same structure as the τ_j → ∞ form
        let rec = liouville_builder(pow2_of_q_growth(12), 9, 1 << 14).unwrap();
        let om = Frequency::from_record(rec);
        let w = Weight::gevrey(0.5).unwrap();
        let fixed = counterexample_source(&om, &w, &[2e-4; 4], 1e19).unwrap();
        assert!(fixed.witnesses.len() >= 3);
        let norms: Vec<f64> = fixed.witnesses.iter().map(|w| w.k_norm).collect();
        assert!(norms.windows(2).all(|p| p[1] > p[0]));
    }
}
