//! Finite-horizon arithmetic-class diagnostics from a continued-fraction
//! record. Membership in the Diophantine / Rüssmann / Bruno classes (and
//! their Gevrey variants) is an asymptotic property; at a finite horizon the
//! report can only support or refute it, never prove it, and says so.

use super::cf::{big_ln, ContinuedFractionRecord};
use crate::error::{CoreError, Result};
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

/// Finite-horizon verdict for one asymptotic condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evidence {
    Supports,
    Refutes,
    Inconclusive,
}

/// Trend statistics behind a verdict.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trend {
    pub evidence: Evidence,
    /// Mean of the diagnostic over the first third of rows.
    pub early_mean: f64,
    /// Mean over the last third of rows.
    pub late_mean: f64,
    pub last_value: f64,
    pub max_value: f64,
}

/// Partial-sum statistics for summability conditions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SumTrend {
    pub evidence: Evidence,
    pub partial_sum: f64,
    /// Sum of the final quarter of terms (Cauchy-tail proxy).
    pub cauchy_tail: f64,
    pub last_term: f64,
}

/// One Gevrey-parameter diagnostic block.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GevreyBlock {
    pub a: f64,
    /// ln q_{n+1} / q_n^a per row.
    pub ratios: Vec<f64>,
    /// Σ q_n^{-a} ln q_{n+1} partial sums.
    pub partial_sums: Vec<f64>,
    pub russmann_gevrey: Trend,
    pub bruno_gevrey: SumTrend,
}

/// The full classification report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub terms: usize,
    pub horizon_rows: usize,
    /// ln q_{n+1} / ln q_n trend — Diophantine wants this bounded.
    pub diophantine: Trend,
    /// ln q_{n+1} / q_n trend — Rüssmann wants this → 0.
    pub russmann: Trend,
    /// Σ q_n^{-1} ln q_{n+1} — Bruno wants this summable.
    pub bruno: SumTrend,
    pub gevrey: Vec<GevreyBlock>,
    /// Always set: membership is asymptotic; finite horizons only provide
    /// evidence.
    pub caveat: String,
}

fn trend_to_zero(values: &[f64]) -> Trend {
    let n = values.len();
    let third = (n / 3).max(1);
    let early: f64 = values[..third].iter().sum::<f64>() / third as f64;
    let late: f64 =
        values[n - third..].iter().sum::<f64>() / third as f64;
    let last = *values.last().unwrap();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // supports o(·): clearly decaying tail; refutes: tail bounded away from 0
    // and not decreasing
    let evidence = if late < 0.5 * early && last < 0.5 * max {
        Evidence::Supports
    } else if late >= 0.9 * early && late > 1e-3 {
        Evidence::Refutes
    } else {
        Evidence::Inconclusive
    };
    Trend {
        evidence,
        early_mean: early,
        late_mean: late,
        last_value: last,
        max_value: max,
    }
}

fn trend_bounded(values: &[f64]) -> Trend {
    let n = values.len();
    let third = (n / 3).max(1);
    let early: f64 = values[..third].iter().sum::<f64>() / third as f64;
    let late: f64 = values[n - third..].iter().sum::<f64>() / third as f64;
    let last = *values.last().unwrap();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let evidence = if late <= 2.0 * early.max(1.0) {
        Evidence::Supports
    } else if late > 10.0 * early.max(1.0) {
        Evidence::Refutes
    } else {
        Evidence::Inconclusive
    };
    Trend {
        evidence,
        early_mean: early,
        late_mean: late,
        last_value: last,
        max_value: max,
    }
}

fn sum_trend(terms: &[f64]) -> SumTrend {
    let n = terms.len();
    let total: f64 = terms.iter().sum();
    let quarter = (n / 4).max(1);
    let tail: f64 = terms[n - quarter..].iter().sum();
    let last = *terms.last().unwrap();
    let decreasing = terms.windows(2).all(|w| w[1] <= w[0] * 1.2);
    let evidence = if tail < 1e-3 * total.max(1e-9) || (decreasing && tail < 0.05 * total) {
        Evidence::Supports
    } else if !decreasing && last >= terms[0] {
        Evidence::Refutes
    } else {
        Evidence::Inconclusive
    };
    SumTrend {
        evidence,
        partial_sum: total,
        cauchy_tail: tail,
        last_term: last,
    }
}

/// Build the report for the given Gevrey exponents.
pub fn classify(
    record: &ContinuedFractionRecord,
    gevrey_exponents: &[f64],
    horizon: usize,
) -> Result<ClassificationReport> {
    if record.terms() < 5 {
        return Err(CoreError::InvalidParameter(format!(
            "classification needs ≥ 5 partial quotients, have {}",
            record.terms()
        )));
    }
    let rows = &record.rows[..record.rows.len().min(horizon)];
    let dio: Vec<f64> = rows
        .iter()
        .map(|r| r.diophantine_ratio)
        .filter(|v| v.is_finite())
        .collect();
    let rus: Vec<f64> = rows.iter().map(|r| r.russmann_ratio).collect();
    let bruno_terms: Vec<f64> = rows.iter().map(|r| r.bruno_term).collect();
    let mut gevrey = Vec::new();
    for &a in gevrey_exponents {
        if !(0.0 < a && a < 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "Gevrey exponent {a} outside (0,1)"
            )));
        }
        let mut ratios = Vec::new();
        let mut sums = Vec::new();
        let mut acc = 0.0;
        for r in rows {
            // q_n^a via ln: a·ln q_n
            let qa = (a * r.ln_q_n).exp();
            let ratio = r.ln_q_next / qa;
            ratios.push(ratio);
            acc += ratio; // q_n^{-a} ln q_{n+1}
            sums.push(acc);
        }
        gevrey.push(GevreyBlock {
            a,
            russmann_gevrey: trend_to_zero(&ratios),
            bruno_gevrey: sum_trend(&ratios),
            ratios,
            partial_sums: sums,
        });
    }
    Ok(ClassificationReport {
        terms: record.terms(),
        horizon_rows: rows.len(),
        diophantine: trend_bounded(&dio),
        russmann: trend_to_zero(&rus),
        bruno: sum_trend(&bruno_terms),
        gevrey,
        caveat: "finite-horizon evidence only: asymptotic class membership can be \
                 supported or refuted here, never proven"
            .into(),
    })
}

/// Convenience: ln q_n as f64 even when q_n overflows, for table emission.
pub fn ln_q(record: &ContinuedFractionRecord, n: usize) -> f64 {
    big_ln(&record.q[n])
}

/// q_n as f64 when representable.
pub fn q_f64(record: &ContinuedFractionRecord, n: usize) -> Option<f64> {
    record.q[n].to_f64().filter(|v| v.is_finite())
}
