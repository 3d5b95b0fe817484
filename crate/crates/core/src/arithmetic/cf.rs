//! Continued fractions: exact expansions for quadratic irrationals, interval
//! expansions for numeric reals, prescribed-quotient (Liouville-type)
//! builders, and certified small-divisor intervals at the convergents.

use crate::error::{CoreError, Result};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Natural log of a big integer, accurate to ~1e-15 relative.
pub fn big_ln(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 53 {
        return v.to_f64().unwrap().ln();
    }
    let shift = bits - 53;
    let top = (v >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Quadratic surd (p + √d)/q with integer data, d not a perfect square.
/// Supports the exact continued-fraction recurrence.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuadraticSurd {
    pub p: i64,
    pub d: u64,
    pub q: i64,
}

impl QuadraticSurd {
    pub fn new(p: i64, d: u64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(CoreError::InvalidParameter("surd denominator zero".into()));
        }
        let root = (d as f64).sqrt() as u64;
        if root * root == d || (root + 1) * (root + 1) == d {
            return Err(CoreError::InvalidParameter(format!(
                "{d} is a perfect square"
            )));
        }
        Ok(QuadraticSurd { p, d, q })
    }

    /// Fractional part of the golden ratio, φ − 1 = (−1+√5)/2 = [0;1,1,1,…].
    pub fn golden_fractional() -> Self {
        QuadraticSurd { p: -1, d: 5, q: 2 }
    }

    /// √2 − 1 = [0;2,2,2,…].
    pub fn sqrt2_minus_one() -> Self {
        QuadraticSurd { p: -1, d: 2, q: 1 }
    }

    pub fn value(&self) -> f64 {
        (self.p as f64 + (self.d as f64).sqrt()) / self.q as f64
    }

    /// Partial quotients a_1, a_2, … of the fractional value in (0,1), by
    /// the exact (P+√D)/Q integer recurrence (a = ⌊(P+√D)/Q⌋,
    /// P' = aQ − P, Q' = (D − P'²)/Q).
    pub fn partial_quotients(&self, terms: usize) -> Result<Vec<BigUint>> {
        let v = self.value();
        if !(0.0 < v && v < 1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "surd value {v} must lie in (0,1)"
            )));
        }
        if self.p.unsigned_abs() > 1 << 20 || self.q.unsigned_abs() > 1 << 20 || self.d > 1 << 40 {
            return Err(CoreError::InvalidParameter(
                "surd data too large for exact recurrence".into(),
            ));
        }
        let (mut p, mut q, mut d) = (self.p as i128, self.q as i128, self.d as i128);
        // normalize so that Q | D − P²: scale by |Q|
        if (d - p * p).rem_euclid(q.abs()) != 0 || (d - p * p) % q != 0 {
            let s = q.abs();
            p *= s;
            d *= s * s;
            q *= s;
        }
        let isqrt_d = {
            let mut r = (d as f64).sqrt() as i128;
            while (r + 1) * (r + 1) <= d {
                r += 1;
            }
            while r * r > d {
                r -= 1;
            }
            r
        };
        let floor_div = |a: i128, b: i128| -> i128 { a.div_euclid(b) };
        let mut out = Vec::with_capacity(terms);
        for step in 0..=terms {
            // floor((P+√D)/Q): for Q>0 equals floor((P+⌊√D⌋)/Q); for Q<0 use
            // -ceil((P+√D)/(-Q)) = floor((-(P+⌊√D⌋)-1)/(-Q))
            let a = if q > 0 {
                floor_div(p + isqrt_d, q)
            } else {
                floor_div(-(p + isqrt_d) - 1, -q)
            };
            if step > 0 {
                if a < 1 {
                    return Err(CoreError::InvalidParameter(
                        "surd recurrence left the (1,∞) range".into(),
                    ));
                }
                out.push(BigUint::from(a as u128));
            } else if a != 0 {
                return Err(CoreError::InvalidParameter(
                    "surd integer part must be 0".into(),
                ));
            }
            // tail = 1/((P+√D)/Q − a): new P = aQ − P, new Q = (D − P'²)/Q
            let p_next = a * q - p;
            let q_next = (d - p_next * p_next) / q;
            if q_next == 0 {
                return Err(CoreError::InvalidParameter("surd is rational".into()));
            }
            p = p_next;
            q = q_next;
        }
        Ok(out)
    }
}

/// One diagnostic row of a continued-fraction record (a-independent part).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CfRow {
    /// Index n (1-based over quotients; refers to q_n and q_{n+1}).
    pub n: usize,
    pub ln_q_n: f64,
    pub ln_q_next: f64,
    /// ln q_{n+1} / q_n — Rüssmann condition wants this → 0.
    pub russmann_ratio: f64,
    /// ln q_{n+1} / ln q_n — Diophantine condition wants this O(1).
    pub diophantine_ratio: f64,
    /// q_n^{-1} ln q_{n+1} — Bruno condition wants these summable.
    pub bruno_term: f64,
    pub bruno_partial_sum: f64,
}

/// Continued-fraction expansion record with exact big-integer convergents.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuedFractionRecord {
    /// Numeric value of α ∈ (0,1) (approximate for huge-quotient builders).
    pub alpha: f64,
    /// Partial quotients a_1, a_2, …
    pub partial_quotients: Vec<BigUint>,
    /// Convergent denominators q_0 = 1, q_1, … (q_{n+1} = a_{n+1} q_n + q_{n-1}).
    pub q: Vec<BigUint>,
    /// Convergent numerators p_0 = 0, p_1, …
    pub p: Vec<BigUint>,
    pub rows: Vec<CfRow>,
    /// Index of the last trustworthy quotient when precision or the digit
    /// budget ran out; None when all requested terms are exact.
    pub exhausted_at: Option<usize>,
}

impl ContinuedFractionRecord {
    fn from_quotients(quotients: Vec<BigUint>, alpha_hint: Option<f64>, exhausted_at: Option<usize>) -> Self {
        let mut q: Vec<BigUint> = vec![BigUint::one()];
        let mut p: Vec<BigUint> = vec![BigUint::zero()];
        let (mut q_prev, mut p_prev) = (BigUint::zero(), BigUint::one());
        for a in &quotients {
            let q_next = a * q.last().unwrap() + &q_prev;
            let p_next = a * p.last().unwrap() + &p_prev;
            q_prev = q.last().unwrap().clone();
            p_prev = p.last().unwrap().clone();
            q.push(q_next);
            p.push(p_next);
        }
        let alpha = alpha_hint.unwrap_or_else(|| {
            // best available convergent ratio (error < 1/q_m²)
            let m = q.len() - 1;
            if m == 0 {
                0.0
            } else {
                match (p[m].to_f64(), q[m].to_f64()) {
                    (Some(pf), Some(qf)) if pf.is_finite() && qf.is_finite() => pf / qf,
                    _ => (big_ln(&p[m]) - big_ln(&q[m])).exp(),
                }
            }
        });
        let mut rows = Vec::new();
        let mut bruno_sum = 0.0;
        for n in 1..q.len().saturating_sub(1) {
            let ln_q_n = big_ln(&q[n]);
            let ln_q_next = big_ln(&q[n + 1]);
            let q_n = q[n].to_f64().unwrap_or(f64::INFINITY);
            let bruno_term = ln_q_next / q_n;
            bruno_sum += bruno_term;
            rows.push(CfRow {
                n,
                ln_q_n,
                ln_q_next,
                russmann_ratio: ln_q_next / q_n,
                diophantine_ratio: if ln_q_n > 0.0 {
                    ln_q_next / ln_q_n
                } else {
                    f64::NAN
                },
                bruno_term,
                bruno_partial_sum: bruno_sum,
            });
        }
        ContinuedFractionRecord {
            alpha,
            partial_quotients: quotients,
            q,
            p,
            rows,
            exhausted_at,
        }
    }

    pub fn terms(&self) -> usize {
        self.partial_quotients.len()
    }

    /// Certified interval for ln |q_n α − p_n|: the exact identity
    /// |q_n α − p_n| = 1/(q_{n+1} + q_n {tail}) with tail ∈ (0,1) gives
    /// (−ln(q_{n+1}+q_n), −ln q_{n+1}).
    pub fn ln_divisor_interval(&self, n: usize) -> Result<(f64, f64)> {
        if n + 1 >= self.q.len() {
            return Err(CoreError::InvalidParameter(format!(
                "convergent {n} beyond computed horizon"
            )));
        }
        let hi = -big_ln(&self.q[n + 1]);
        let lo = -big_ln(&(&self.q[n + 1] + &self.q[n]));
        Ok((lo, hi))
    }

    /// Convergent (p_n, q_n) as i64 pair when representable.
    pub fn convergent_i64(&self, n: usize) -> Option<(i64, i64)> {
        Some((self.p[n].to_i64()?, self.q[n].to_i64()?))
    }
}

/// Expand a quadratic surd exactly.
pub fn continued_fraction_surd(surd: &QuadraticSurd, terms: usize) -> Result<ContinuedFractionRecord> {
    let quotients = surd.partial_quotients(terms)?;
    Ok(ContinuedFractionRecord::from_quotients(
        quotients,
        Some(surd.value()),
        None,
    ))
}

/// Expand a numeric α ∈ (0,1) by the Gauss map with interval tracking; stops
/// (and flags `exhausted_at`) once f64 precision no longer determines the next
/// quotient.
pub fn continued_fraction_numeric(alpha: f64, terms: usize) -> Result<ContinuedFractionRecord> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "numeric expansion needs α ∈ (0,1), got {alpha}"
        )));
    }
    let eps = 4.0 * f64::EPSILON * alpha.max(1e-3);
    let mut lo = alpha - eps;
    let mut hi = alpha + eps;
    let mut quotients = Vec::new();
    let mut exhausted = None;
    for i in 0..terms {
        if lo <= 0.0 {
            exhausted = Some(i);
            break;
        }
        let a_lo = (1.0 / hi).floor();
        let a_hi = (1.0 / lo).floor();
        if a_lo != a_hi || !a_lo.is_finite() {
            exhausted = Some(i);
            break;
        }
        quotients.push(BigUint::from(a_lo as u64));
        let nlo = 1.0 / hi - a_lo;
        let nhi = 1.0 / lo - a_lo;
        lo = nlo.max(0.0);
        hi = nhi;
        if quotients.len() >= terms {
            break;
        }
    }
    if quotients.is_empty() && terms > 0 {
        return Err(CoreError::PrecisionExhausted { trustworthy: 0 });
    }
    Ok(ContinuedFractionRecord::from_quotients(
        quotients,
        Some(alpha),
        exhausted,
    ))
}

/// The binary-tower growth a_{n+1} = 2^{q_n}, with the shift capped at
/// `bit_cap` so the closure itself never tries to materialize 2^{q} for an
/// astronomically large q (the budget check in [`liouville_builder`] then
/// flags exhaustion).
pub fn pow2_of_q_growth(bit_cap: u64) -> impl Fn(&BigUint, usize) -> BigUint {
    move |q, _| BigUint::one() << q.to_u64().unwrap_or(u64::MAX).min(bit_cap) as usize
}

/// Build α from prescribed partial quotients a_{n+1} = growth(q_n, n).
/// Stops early (flagging `exhausted_at`) when the next quotient would exceed
/// `bit_budget` bits. Returns the record; α is approximated by the last
/// convergent (error < 1/q_last²).
pub fn liouville_builder(
    growth: impl Fn(&BigUint, usize) -> BigUint,
    terms: usize,
    bit_budget: u64,
) -> Result<ContinuedFractionRecord> {
    let mut quotients: Vec<BigUint> = Vec::new();
    let mut q: Vec<BigUint> = vec![BigUint::one()];
    let mut q_prev = BigUint::zero();
    let mut exhausted = None;
    for n in 0..terms {
        let a = growth(q.last().unwrap(), n);
        if a.is_zero() {
            return Err(CoreError::InvalidParameter(
                "growth produced zero partial quotient".into(),
            ));
        }
        if a.bits() > bit_budget {
            exhausted = Some(n);
            break;
        }
        let q_next = &a * q.last().unwrap() + &q_prev;
        q_prev = q.last().unwrap().clone();
        q.push(q_next);
        quotients.push(a);
    }
    Ok(ContinuedFractionRecord::from_quotients(
        quotients, None, exhausted,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_quotients_are_ones_fibonacci_q() {
        let rec =
            continued_fraction_surd(&QuadraticSurd::golden_fractional(), 12).unwrap();
        assert!(rec.partial_quotients.iter().all(|a| a == &BigUint::one()));
        let fib: Vec<u64> = vec![1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233];
        for (i, f) in fib.iter().enumerate() {
            assert_eq!(rec.q[i], BigUint::from(*f));
        }
    }

    #[test]
    fn sqrt2_quotients_are_twos() {
        let rec = continued_fraction_surd(&QuadraticSurd::sqrt2_minus_one(), 8).unwrap();
        assert!(rec
            .partial_quotients
            .iter()
            .all(|a| a == &BigUint::from(2u32)));
        let qs: Vec<u64> = vec![1, 2, 5, 12, 29, 70, 169, 408, 985];
        for (i, v) in qs.iter().enumerate() {
            assert_eq!(rec.q[i], BigUint::from(*v));
        }
    }

    #[test]
    fn empty_record() {
        let rec = continued_fraction_numeric(0.5 + 1e-9, 0).unwrap();
        assert_eq!(rec.terms(), 0);
        assert!(rec.rows.is_empty());
    }

    #[test]
    fn numeric_matches_surd_until_exhaustion() {
        let surd = QuadraticSurd::golden_fractional();
        let exact = continued_fraction_surd(&surd, 30).unwrap();
        let num = continued_fraction_numeric(surd.value(), 30).unwrap();
        let trust = num.exhausted_at.unwrap_or(num.terms());
        assert!(trust >= 15, "trustworthy horizon too short: {trust}");
        for i in 0..trust.min(num.terms()) {
            assert_eq!(num.partial_quotients[i], exact.partial_quotients[i]);
        }
    }

    #[test]
    fn recurrence_and_convergent_quality() {
        let rec = continued_fraction_surd(&QuadraticSurd::golden_fractional(), 20).unwrap();
        // q_{n+1} = a_{n+1} q_n + q_{n-1} exactly
        for n in 1..rec.q.len() - 1 {
            assert_eq!(
                rec.q[n + 1],
                &rec.partial_quotients[n] * &rec.q[n] + &rec.q[n - 1]
            );
        }
        // |α − p_n/q_n| < 1/(q_n q_{n+1})
        let alpha = rec.alpha;
        for n in 1..10 {
            let (p, q) = rec.convergent_i64(n).unwrap();
            let err = (alpha - p as f64 / q as f64).abs();
            let (_, qn1) = rec.convergent_i64(n + 1).unwrap();
            assert!(err < 1.0 / (q as f64 * qn1 as f64));
        }
    }

    #[test]
    fn builder_constant_growth_recovers_classics() {
        // growth ≡ 1 → golden; growth ≡ 2 → √2−1
        let ones = liouville_builder(|_, _| BigUint::one(), 15, 1 << 20).unwrap();
        let golden = continued_fraction_surd(&QuadraticSurd::golden_fractional(), 15).unwrap();
        assert_eq!(ones.q, golden.q);
        let twos = liouville_builder(|_, _| BigUint::from(2u32), 10, 1 << 20).unwrap();
        let s2 = continued_fraction_surd(&QuadraticSurd::sqrt2_minus_one(), 10).unwrap();
        assert_eq!(twos.q, s2.q);
        assert!((twos.alpha - (2.0f64.sqrt() - 1.0)).abs() < 2e-8); // error < 1/(q10 q11)
    }

    #[test]
    fn builder_binary_tower_stops_at_budget() {
        // a_{n+1} = 2^{q_n}: q = 1, 2, 9, 4610, then q_4 = 2^4610·4610+9
        // (4623 bits), then a_5 = 2^{q_4} blows past any budget
        let rec = liouville_builder(pow2_of_q_growth(1 << 20), 10, 10_000).unwrap();
        let expect: Vec<u64> = vec![1, 2, 9, 4610];
        for (i, v) in expect.iter().enumerate() {
            assert_eq!(rec.q[i], BigUint::from(*v));
        }
        assert_eq!(rec.q[4].bits(), 4623);
        assert_eq!(rec.exhausted_at, Some(4));
        // ln q_{n+1}/q_n approaches ln 2 (Rüssmann violation evidence)
        let last = rec.rows.last().unwrap();
        assert!((last.russmann_ratio - std::f64::consts::LN_2).abs() < 0.01);
    }

    #[test]
    fn ln_divisor_interval_brackets_truth() {
        let rec = continued_fraction_surd(&QuadraticSurd::golden_fractional(), 20).unwrap();
        let alpha = rec.alpha;
        for n in 2..10 {
            let (p, q) = rec.convergent_i64(n).unwrap();
            let truth = (q as f64 * alpha - p as f64).abs().ln();
            let (lo, hi) = rec.ln_divisor_interval(n).unwrap();
            assert!(lo <= truth && truth <= hi, "n={n}: {lo} {truth} {hi}");
        }
    }

    #[test]
    fn big_ln_accuracy() {
        let v = BigUint::from(12345678901234567890u64);
        assert!((big_ln(&v) - 12345678901234567890f64.ln()).abs() < 1e-12);
        let big = BigUint::one() << 4000;
        assert!((big_ln(&big) - 4000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }
}
