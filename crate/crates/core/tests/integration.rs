//! Cross-module workflows: schema round-trips, schedule identities of the
//! driver certificate, and strict-mode refusals.

use num_complex::Complex64;
use toruskam::arithmetic::{continued_fraction_surd, Frequency, QuadraticSurd};
use toruskam::fourier::{SpectralScalar, SpectralVectorField};
use toruskam::kam::{gevrey_linearize, reparametrized_oracle, KamConfig};
use toruskam::weights::Weight;

#[test]
fn spectral_json_schema() {
    let f = SpectralScalar::from_entries(
        2,
        3,
        [
            (vec![1, -2], Complex64::new(0.25, -0.125)),
            (vec![0, 0], Complex64::new(1.5, 0.0)),
        ],
    )
    .unwrap();
    let json = serde_json::to_value(&f).unwrap();
    // external schema: {n, K, entries: [{k, re, im}]}
    assert_eq!(json["n"], 2);
    assert_eq!(json["K"], 3);
    let entries = json["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    assert!(entries[0]["k"].is_array());
    assert!(entries[0]["re"].is_number() && entries[0]["im"].is_number());
    let back: SpectralScalar = serde_json::from_value(json).unwrap();
    assert!(back.sub(&f).unwrap().l1_norm(0.0) < 1e-16);
    // hermitian violation in the file is repaired by construction
    let bad = serde_json::json!({
        "n": 2, "K": 1,
        "entries": [{"k": [1, 0], "re": 1.0, "im": 0.5}]
    });
    let fixed: SpectralScalar = serde_json::from_value(bad).unwrap();
    assert!(fixed.hermitian_defect() < 1e-15);
}

#[test]
fn certificate_schedule_identities() {
    // theorem-backed parameters: ρ > 0, so every recorded inequality is live
    let mut cfg = KamConfig::new(0.5, 1.0, 0.5, 1e-4, 5e-5, 1.5).unwrap();
    cfg.k_max = 16;
    let om = Frequency::golden(40);
    let f_scalar = SpectralScalar::cosine(2, 1, vec![1, -1], 2e-9).unwrap();
    let f = SpectralVectorField::from_scalar_times_vector(&f_scalar, om.components()).unwrap();
    let sol = gevrey_linearize(&f, &om, &cfg).unwrap();
    let cert = &sol.certificate;
    assert!(cert.hypothesis_r_gt_c_tau && cert.width_equation_feasible);
    // schedule identities: u_j, s_j, σ_j halve exactly; σ0 = u0/16; s0 = u0/2;
    // s0 − 4σ0 = s1
    let (u0, s0, sig0) = (cert.u0, cert.s0, cert.sigma0);
    assert_eq!(s0, u0 / 2.0);
    assert_eq!(sig0, u0 / 16.0);
    assert_eq!(s0 - 4.0 * sig0, s0 / 2.0);
    for (j, row) in cert.schedule.iter().enumerate() {
        let p = 0.5f64.powi(j as i32);
        assert_eq!(row.0, u0 * p);
        assert_eq!(row.1, s0 * p);
        assert_eq!(row.2, sig0 * p);
    }
    for row in cert.stages.iter().filter(|r| !r.trivial) {
        // per-stage sufficient-condition values ≤ 1 under the hypotheses
        assert!(row.averif_value <= 1.0);
        // domain nesting |Φ − Id| ≤ 2 s_{j+1}
        assert!(row.nesting_ratio <= 1.0, "nesting {}", row.nesting_ratio);
        assert!(row.dphi_defect <= 1.0 / 3.0);
        // the conjugacy increments obey the recorded envelopes here
        assert!(row.lambda_ratio <= 1.0);
        assert!(row.phi_ratio <= 1.0);
    }
    assert!(cert.telescoping.is_some());
}

#[test]
fn oracle_equivalence_sqrt2_frequency() {
    let rec = continued_fraction_surd(&QuadraticSurd::sqrt2_minus_one(), 30).unwrap();
    let om = Frequency::from_record(rec);
    let mut cfg = KamConfig::new(0.5, 1.0, 0.8, 0.2, 0.1, 1.5).unwrap();
    cfg.k_max = 20;
    let f = SpectralScalar::from_entries(
        2,
        1,
        [
            (vec![0, 0], Complex64::new(1.0, 0.0)),
            (vec![1, 1], Complex64::new(0.01, 0.0)),
        ],
    )
    .unwrap();
    let oracle = reparametrized_oracle(&f, &om, &cfg).unwrap();
    assert!(oracle.residual < 1e-11);
    let sol = gevrey_linearize(&oracle.perturbation, &om, &cfg).unwrap();
    let lam_err = sol
        .lambda
        .iter()
        .zip(&oracle.lambda)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(lam_err < 1e-9, "λ mismatch {lam_err}");
    let d = toruskam::fourier::map::map_distance(&sol.phi, oracle.phi.as_ref().unwrap(), 64)
        .unwrap();
    assert!(d < 1e-8, "map distance {d}");
}

#[test]
fn strict_mode_refuses_infeasible_width_equation() {
    let mut cfg = KamConfig::new(0.5, 1.0, 0.8, 0.2, 0.1, 1.5).unwrap();
    cfg.strict = true;
    cfg.k_max = 12;
    let om = Frequency::golden(30);
    // huge perturbation: ε₀/α far above 1/2
    let f_scalar = SpectralScalar::cosine(2, 1, vec![1, -1], 0.2).unwrap();
    let f = SpectralVectorField::from_scalar_times_vector(&f_scalar, om.components()).unwrap();
    let err = gevrey_linearize(&f, &om, &cfg);
    assert!(matches!(
        err,
        Err(toruskam::CoreError::ThresholdViolated(_))
    ));
}

#[test]
fn weighted_norms_follow_field_scaling() {
    // sanity chain across fixtures, weights and fields
    let w = Weight::gevrey(0.5).unwrap();
    let f = toruskam::fixtures::random_gevrey_field(2, 8, 1.0, 0.5, 1e-3, 7).unwrap();
    let scaled = f.map(|c| c.scale(2.0));
    let n1 = f.weighted_norm(&w, 1.0);
    let n2 = scaled.weighted_norm(&w, 1.0);
    assert!((n2 - 2.0 * n1).abs() < 1e-15);
    assert!((n1 - 1e-3).abs() < 1e-18);
}
