//! Small-divisor measurements and arithmetic-class diagnostics: direct scans
//! over frequency boxes, continued fractions for n = 2, Liouville-type
//! builders, and the divergence counterexample source.

pub mod cf;
pub mod classify;
pub mod counterexample;

pub use cf::{
    big_ln, continued_fraction_numeric, continued_fraction_surd, liouville_builder,
    pow2_of_q_growth, ContinuedFractionRecord, QuadraticSurd,
};
pub use classify::{classify, ClassificationReport, Evidence};
pub use counterexample::{
    convergent_witness_ladder, counterexample_source, divergence_table, CounterexampleSource,
    Witness,
};

use crate::error::{CoreError, Result};
use crate::fourier::MultiIndex;
use crate::weights::Weight;
use serde::{Deserialize, Serialize};

/// A frequency vector ω ∈ R^n, optionally carrying an exact continued-fraction
/// presentation of α for the n = 2 case ω = (1, α) or ω = (1, 1+α).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Frequency {
    omega: Vec<f64>,
    exact: Option<ContinuedFractionRecord>,
}

impl Frequency {
    pub fn numeric(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(CoreError::DimensionMismatch("empty frequency".into()));
        }
        Ok(Frequency { omega, exact: None })
    }

    /// ω = (1, α) with α ∈ (0,1) presented by an exact record; the numeric
    /// value is taken from the record.
    pub fn from_record(record: ContinuedFractionRecord) -> Self {
        Frequency {
            omega: vec![1.0, record.alpha],
            exact: Some(record),
        }
    }

    /// ω = (1, φ) with the golden ratio, carrying the exact expansion of φ−1.
    pub fn golden(terms: usize) -> Self {
        let rec = continued_fraction_surd(&QuadraticSurd::golden_fractional(), terms)
            .expect("golden surd is valid");
        Frequency {
            omega: vec![1.0, 1.0 + rec.alpha],
            exact: Some(rec),
        }
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.omega
    }

    pub fn exact_record(&self) -> Option<&ContinuedFractionRecord> {
        self.exact.as_ref()
    }
}

/// Result of the exhaustive divisor scan over 0 < |k| ≤ K.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DivisorScan {
    pub cutoff: i64,
    pub tau: f64,
    pub a: f64,
    /// Minimizing k of |k·ω| (lexicographically smallest of the ± pair).
    pub worst_k: Vec<i64>,
    pub min_divisor: f64,
    /// γ_τ^{-1}(ω) restricted to the box: sup |2πk·ω|^{-1} e^{-τφ_a(|k|)}.
    pub gamma_inv: f64,
    /// The mode attaining the sup.
    pub gamma_argmax: Vec<i64>,
    /// α = γ_τ(ω)/2π = 1/(2π γ_τ^{-1}).
    pub alpha: f64,
}

/// Exhaustive scan over the half-box 0 < |k| ≤ K (the other half follows by
/// symmetry). Errors on exact resonance, naming the mode.
pub fn small_divisor_scan(
    omega: &Frequency,
    cutoff: i64,
    tau: f64,
    a: f64,
) -> Result<DivisorScan> {
    if cutoff < 1 {
        return Err(CoreError::InvalidParameter("scan needs K ≥ 1".into()));
    }
    let w = Weight::gevrey(a)?;
    let om = omega.components();
    let n = om.len();
    let mut min_div = f64::INFINITY;
    let mut worst = vec![0i64; n];
    let mut gamma_inv = 0.0f64;
    let mut argmax = vec![0i64; n];
    let mut idx = vec![-cutoff; n];
    'outer: loop {
        // visit only the half with first nonzero component positive
        if let Some(first) = idx.iter().find(|&&v| v != 0) {
            if *first > 0 {
                let k = MultiIndex(idx.clone());
                let dot = k.dot(om);
                let div = dot.abs();
                if div == 0.0 {
                    return Err(CoreError::Resonance { k: idx });
                }
                if div < min_div {
                    min_div = div;
                    worst = idx.clone();
                }
                let v = (-(2.0 * std::f64::consts::PI * div).ln()
                    - tau * w.eval(k.max_norm() as f64))
                .exp();
                if v > gamma_inv {
                    gamma_inv = v;
                    argmax = idx.clone();
                }
            }
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
    let canonical = |k: Vec<i64>| -> Vec<i64> {
        let neg: Vec<i64> = k.iter().map(|v| -v).collect();
        if neg < k {
            neg
        } else {
            k
        }
    };
    Ok(DivisorScan {
        cutoff,
        tau,
        a,
        worst_k: canonical(worst),
        min_divisor: min_div,
        gamma_inv,
        gamma_argmax: canonical(argmax),
        alpha: 1.0 / (2.0 * std::f64::consts::PI * gamma_inv),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GOLDEN_RATIO;
    use approx::assert_relative_eq;
    use num_traits::ToPrimitive;

    #[test]
    fn golden_scan_k21() {
        let om = Frequency::golden(30);
        let scan = small_divisor_scan(&om, 21, 1.0, 0.5).unwrap();
        assert_eq!(scan.worst_k, vec![-21, 13]);
        assert_relative_eq!(
            scan.min_divisor,
            (13.0 * GOLDEN_RATIO - 21.0).abs(),
            max_relative = 1e-10
        );
        assert_relative_eq!(scan.min_divisor, 0.0344418, max_relative = 1e-5);
        assert_relative_eq!(scan.alpha, 1.0 / (2.0 * std::f64::consts::PI * scan.gamma_inv));
    }

    #[test]
    fn resonance_detected() {
        let om = Frequency::numeric(vec![1.0, 2.0]).unwrap();
        match small_divisor_scan(&om, 3, 1.0, 0.5) {
            Err(CoreError::Resonance { k }) => {
                let m = MultiIndex(k);
                assert_eq!(m.dot(&[1.0, 2.0]), 0.0);
            }
            other => panic!("expected resonance, got {other:?}"),
        }
    }

    #[test]
    fn gamma_inv_monotone_in_cutoff() {
        let om = Frequency::golden(40);
        let mut prev = 0.0;
        for k in [16, 32, 64] {
            let scan = small_divisor_scan(&om, k, 0.1, 0.5).unwrap();
            assert!(scan.gamma_inv >= prev);
            prev = scan.gamma_inv;
        }
    }

    #[test]
    fn minimizers_are_convergents() {
        // for ω = (1, α) the minimizing k over |k| ≤ q_N is a convergent pair
        for surd in [
            QuadraticSurd::golden_fractional(),
            QuadraticSurd::sqrt2_minus_one(),
        ] {
            let rec = continued_fraction_surd(&surd, 15).unwrap();
            let om = Frequency::numeric(vec![1.0, rec.alpha]).unwrap();
            for n in 3..7 {
                let q = rec.q[n].to_i64().unwrap();
                let scan = small_divisor_scan(&om, q, 1.0, 0.5).unwrap();
                let hit = rec.q.iter().zip(&rec.p).take(n + 1).any(|(qq, pp)| {
                    let (qq, pp) = (qq.to_i64().unwrap(), pp.to_i64().unwrap());
                    scan.worst_k == vec![-pp, qq] || scan.worst_k == vec![pp, -qq]
                });
                assert!(
                    hit,
                    "minimizer {:?} not a convergent pair at K={q}",
                    scan.worst_k
                );
            }
        }
    }
}
