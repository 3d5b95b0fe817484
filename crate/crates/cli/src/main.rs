//! Command-line front-end: constants, classify, cohomology, smooth, kam,
//! oracle-check.
//!
//! Exit codes: 0 success, 2 configuration error, 3 arithmetic degeneracy,
//! 4 solver divergence / threshold refusal.

mod config;
mod emit;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use toruskam::arithmetic::{
    classify, continued_fraction_numeric, continued_fraction_surd, divergence_table,
    liouville_builder, pow2_of_q_growth, small_divisor_scan, Frequency, QuadraticSurd,
};
use toruskam::cohomology::{solve_scalar, verify_norm_loss};
use toruskam::error::CoreError;
use toruskam::fourier::SpectralScalar;
use toruskam::kam::{gevrey_linearize, reparametrized_oracle};
use toruskam::smoothing::{approximation_sequence, verify_popov_bounds, SmoothingSchedule};
use toruskam::weights::{kam_constants, Weight};

#[derive(Parser)]
#[command(name = "toruskam", version, about = "Small-divisor toolkit on the n-torus")]
struct Cli {
    /// Structured config file (TOML); required by `kam` and `oracle-check`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for generated fixtures; fully determines random fields.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Abort on hypothesis violations instead of recording them.
    #[arg(long, global = true)]
    strict: bool,
    /// Output directory for certificates, tables and spectra.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker-count hint. Accepted for interface stability; the computation
    /// is single-threaded and deterministic, so results never depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the threshold constants b, δ, c, ρ, υ, ν, ι and the r > cτ verdict.
    Constants {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        tau: f64,
    },
    /// Continued-fraction record, class diagnostics and divisor scan.
    Classify {
        /// Numeric α ∈ (0,1).
        #[arg(long, conflicts_with_all = ["golden", "sqrt2", "liouville"])]
        alpha: Option<f64>,
        /// Golden-ratio fractional part (exact).
        #[arg(long)]
        golden: bool,
        /// √2 − 1 (exact).
        #[arg(long)]
        sqrt2: bool,
        /// Liouville builder spec: `pow2q[:CAP_BITS]` for a_{n+1} = 2^{min(q_n,CAP)}.
        #[arg(long)]
        liouville: Option<String>,
        /// Explicit ω components (commas); runs the divisor scan instead of
        /// continued fractions when n ≠ 2.
        #[arg(long, value_delimiter = ',')]
        omega: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.5)]
        a_exponent: f64,
        #[arg(long, default_value_t = 30)]
        terms: usize,
        /// Divisor-scan cutoff.
        #[arg(long, default_value_t = 64)]
        scan_k: i64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
    },
    /// Solve X_ω g = f − c for a spectral input and report the loss margin.
    Cohomology {
        /// Spectral JSON input ({n, K, entries}).
        #[arg(long, required_unless_present = "lemma2_demo")]
        f: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        omega: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 0.5)]
        a_exponent: f64,
        #[arg(long, default_value_t = 64)]
        scan_k: i64,
        /// Run the divergence fixture (capped binary-tower frequency) and emit
        /// the ‖g‖ growth table instead of solving a file input.
        #[arg(long)]
        lemma2_demo: bool,
    },
    /// Gevrey→analytic smoothing stages and decay table.
    Smooth {
        #[arg(long)]
        f: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        #[arg(long, default_value_t = 0.8)]
        r: f64,
        #[arg(long, default_value_t = 0.5)]
        a_exponent: f64,
        #[arg(long, default_value_t = 0.75)]
        u0: f64,
        #[arg(long, default_value_t = 4)]
        stages: usize,
        #[arg(long, default_value_t = 128)]
        k_max: i64,
    },
    /// Full Gevrey KAM linearization; input from file or generator.
    Kam {
        /// Spectral JSON of a scalar whose multiples along ω form F, or a
        /// vector input via the generator in the config file.
        #[arg(long)]
        f: Option<PathBuf>,
    },
    /// Compare the staged solver against the reparametrized-field oracle.
    OracleCheck {
        /// Spectral JSON of the nowhere-vanishing scalar f.
        #[arg(long)]
        f: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers == 0 {
        eprintln!("error: --workers must be ≥ 1");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(core) = err.downcast_ref::<CoreError>() {
        match core {
            CoreError::Resonance { .. }
            | CoreError::EmptySupport { .. }
            | CoreError::PrecisionExhausted { .. } => 3,
            CoreError::Divergence { .. }
            | CoreError::ThresholdViolated(_)
            | CoreError::NonInvertibleJacobian { .. } => 4,
            _ => 2,
        }
    } else {
        2
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Constants { a, kappa, r, tau } => {
            let c = kam_constants(*a, *kappa, *r, *tau)?;
            let verdict = if c.hypothesis_holds { "PASS" } else { "FAIL" };
            println!("b       = {:.9}", c.b);
            println!("delta   = {:.9}", c.delta);
            println!("c       = {:.9}", c.c);
            println!("rho     = {:.9}", c.rho);
            println!("upsilon = {:.9}", c.upsilon);
            println!("nu      = {:.9}", c.nu);
            println!("iota    = {:.9}", c.iota);
            println!("r > c*tau: {verdict} (r = {r}, c*tau = {:.6})", c.c * tau);
            if let Some(dir) = &cli.out {
                emit::write_json(dir, "constants.json", &c)?;
            }
            Ok(())
        }
        Command::Classify {
            alpha,
            golden,
            sqrt2,
            liouville,
            omega,
            a_exponent,
            terms,
            scan_k,
            tau,
        } => {
            if let Some(om) = omega {
                let freq = Frequency::numeric(om.clone())?;
                let scan = small_divisor_scan(&freq, *scan_k, *tau, *a_exponent)?;
                println!(
                    "scan K={}: min |k·ω| = {:.7e} at k = {:?}; γ⁻¹ = {:.7e} at {:?}; α = {:.7e}",
                    scan.cutoff, scan.min_divisor, scan.worst_k, scan.gamma_inv,
                    scan.gamma_argmax, scan.alpha
                );
                if let Some(dir) = &cli.out {
                    emit::write_json(dir, "scan.json", &scan)?;
                }
                return Ok(());
            }
            let record = if *golden {
                continued_fraction_surd(&QuadraticSurd::golden_fractional(), *terms)?
            } else if *sqrt2 {
                continued_fraction_surd(&QuadraticSurd::sqrt2_minus_one(), *terms)?
            } else if let Some(spec) = liouville {
                let cap = spec
                    .strip_prefix("pow2q")
                    .map(|rest| rest.strip_prefix(':').map(|v| v.parse::<u64>()).transpose())
                    .ok_or_else(|| {
                        CoreError::InvalidParameter(format!("unknown builder spec {spec}"))
                    })??
                    .unwrap_or(1 << 20);
                liouville_builder(pow2_of_q_growth(cap), *terms, cap.max(1 << 14))?
            } else if let Some(al) = alpha {
                continued_fraction_numeric(*al, *terms)?
            } else {
                return Err(CoreError::InvalidParameter(
                    "pick one of --alpha/--golden/--sqrt2/--liouville/--omega".into(),
                )
                .into());
            };
            println!(
                "terms = {}, exhausted_at = {:?}",
                record.terms(),
                record.exhausted_at
            );
            for r in &record.rows {
                println!(
                    "  n={:>2}: ln q_n+1 = {:>12.4}  lnq/q = {:>10.6}  bruno Σ = {:.6}",
                    r.n, r.ln_q_next, r.russmann_ratio, r.bruno_partial_sum
                );
            }
            if record.terms() < 5 {
                println!("(too few quotients for class diagnostics; raw table above)");
                if let Some(dir) = &cli.out {
                    emit::write_cf_table(dir, "cf_table.csv", &record)?;
                }
                return Ok(());
            }
            let report = classify(&record, &[*a_exponent], record.rows.len().max(5))?;
            println!(
                "diophantine: {:?} (late mean {:.4})",
                report.diophantine.evidence, report.diophantine.late_mean
            );
            println!(
                "russmann:    {:?} (late mean {:.4})",
                report.russmann.evidence, report.russmann.late_mean
            );
            println!(
                "bruno:       {:?} (partial sum {:.6}, tail {:.3e})",
                report.bruno.evidence, report.bruno.partial_sum, report.bruno.cauchy_tail
            );
            for g in &report.gevrey {
                println!(
                    "gevrey a={}: ratio {:?}, sum {:?}",
                    g.a, g.russmann_gevrey.evidence, g.bruno_gevrey.evidence
                );
            }
            println!("caveat: {}", report.caveat);
            if let Some(dir) = &cli.out {
                emit::write_json(dir, "classification.json", &report)?;
                emit::write_cf_table(dir, "cf_table.csv", &record)?;
            }
            Ok(())
        }
        Command::Cohomology {
            f,
            omega,
            r,
            tau,
            a_exponent,
            scan_k,
            lemma2_demo,
        } => {
            if *lemma2_demo {
                return lemma2_growth_table(&cli, *a_exponent, *r);
            }
            let spec: SpectralScalar = emit::read_json(f.as_ref().unwrap())?;
            let freq = match omega {
                Some(om) => Frequency::numeric(om.clone())?,
                None => Frequency::golden(40),
            };
            let sol = solve_scalar(&spec, &freq)?;
            println!(
                "c = {:.12}; worst divisor {:.6e} at {:?}; residual {:.3e}",
                sol.mean,
                sol.worst_divisor,
                sol.worst_k,
                sol.residual_rel
            );
            let w = Weight::gevrey(*a_exponent)?;
            let report = verify_norm_loss(&spec, &freq, &w, *r, *tau, (*scan_k).max(spec.cutoff()))?;
            println!(
                "‖g‖_(r−τ) = {:.9e} ≤ γ⁻¹‖f‖_r = {:.9e} (ratio {:.6})",
                report.lhs, report.rhs, report.ratio
            );
            if let Some(dir) = &cli.out {
                emit::write_json(dir, "solution.json", &sol)?;
                emit::write_json(dir, "lemma1_margin.json", &report)?;
                emit::write_spectrum(dir, "g.json", &sol.g)?;
                emit::write_grid_csv(dir, "g_grid.csv", &sol.g, 32)?;
            }
            Ok(())
        }
        Command::Smooth {
            f,
            r0,
            r,
            a_exponent,
            u0,
            stages,
            k_max,
        } => {
            let spec: SpectralScalar = emit::read_json(f)?;
            let schedule = SmoothingSchedule::new(*r0, *r, *a_exponent, *u0, *stages, *k_max)?;
            let seq = approximation_sequence(&spec, &schedule)?;
            let w = Weight::gevrey(*a_exponent)?;
            let report = verify_popov_bounds(&spec, &seq, &w)?;
            println!(
                "stages {}; cutoffs {:?}; clamped from {:?}",
                schedule.stages, schedule.cutoffs, schedule.clamped_from
            );
            println!("measured C2 = {:.6}", report.c2_measured);
            for (j, d) in report.diff_norms.iter().enumerate() {
                println!(
                    "  j={j}: |f_{}−f_{}|_(u_{}) = {:.6e}, envelope ratio {:.4}",
                    j + 1,
                    j,
                    j + 1,
                    d,
                    report.diff_ratios[j]
                );
            }
            if let Some(dir) = &cli.out {
                emit::write_json(dir, "popov_report.json", &report)?;
                emit::write_json(dir, "schedule.json", &schedule)?;
                emit::write_decay_csv(dir, "decay.csv", &schedule, &report)?;
                for (j, stage) in seq.stages.iter().enumerate() {
                    emit::write_spectrum(dir, &format!("stage_{j}.json"), stage)?;
                }
            }
            Ok(())
        }
        Command::Kam { f } => {
            let cfgfile = config::load(&cli)?;
            let mut kam_cfg = cfgfile.kam_config()?;
            kam_cfg.strict = cli.strict || kam_cfg.strict;
            let omega = cfgfile.frequency()?;
            let field = cfgfile.generate_field(f.as_deref(), &omega, cli.seed, &kam_cfg)?;
            let sol = gevrey_linearize(&field, &omega, &kam_cfg)?;
            println!(
                "lambda = {:?}; ‖Φ−Id‖ bound = {:.6e}; final residual = {:.6e}",
                sol.lambda,
                sol.phi.displacement_bound(0.0),
                sol.certificate.final_conjugacy_residual
            );
            println!(
                "r > cτ: {}; width equation feasible: {}; stages: {}",
                if sol.certificate.hypothesis_r_gt_c_tau { "PASS" } else { "FAIL" },
                sol.certificate.width_equation_feasible,
                sol.certificate.stages.len()
            );
            if let Some(dir) = &cli.out {
                emit::write_json(dir, "certificate.json", &sol.certificate)?;
                emit::write_stages_csv(dir, "stages.csv", &sol.certificate)?;
                emit::write_json(dir, "lambda.json", &sol.lambda)?;
                for (i, comp) in sol.phi.displacement().components().iter().enumerate() {
                    emit::write_spectrum(dir, &format!("phi_displacement_{i}.json"), comp)?;
                }
                for (i, comp) in field.components().iter().enumerate() {
                    emit::write_spectrum(dir, &format!("input_{i}.json"), comp)?;
                }
            }
            Ok(())
        }
        Command::OracleCheck { f } => {
            let cfgfile = config::load(&cli)?;
            let mut kam_cfg = cfgfile.kam_config()?;
            kam_cfg.strict = cli.strict || kam_cfg.strict;
            let omega = cfgfile.frequency()?;
            let scalar = match f {
                Some(path) => emit::read_json(path)?,
                None => cfgfile.reparam_scalar()?,
            };
            let oracle = reparametrized_oracle(&scalar, &omega, &kam_cfg)?;
            let sol = gevrey_linearize(&oracle.perturbation, &omega, &kam_cfg)?;
            let lam_err = sol
                .lambda
                .iter()
                .zip(&oracle.lambda)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            let dist = toruskam::fourier::map::map_distance(
                &sol.phi,
                oracle.phi.as_ref().unwrap(),
                96,
            )?;
            println!("oracle residual   = {:.3e}", oracle.residual);
            println!("solver residual   = {:.3e}", sol.certificate.final_conjugacy_residual);
            println!("lambda difference = {:.3e}", lam_err);
            println!("map sup distance  = {:.3e}", dist);
            let ok = lam_err <= 1e-8 && dist <= 1e-6;
            println!("oracle agreement: {}", if ok { "PASS" } else { "FAIL" });
            if let Some(dir) = &cli.out {
                emit::write_json(dir, "certificate.json", &sol.certificate)?;
                emit::write_json(
                    dir,
                    "oracle_comparison.json",
                    &serde_json::json!({
                        "oracle_residual": oracle.residual,
                        "solver_residual": sol.certificate.final_conjugacy_residual,
                        "lambda_difference": lam_err,
                        "map_distance": dist,
                        "pass": ok,
                    }),
                )?;
            }
            if ok {
                Ok(())
            } else {
                Err(CoreError::Divergence {
                    iterations: 0,
                    history: vec![lam_err, dist],
                }
                .into())
            }
        }
    }
}

/// Divergence fixture: capped binary-tower frequency, certified log-domain
/// growth ladder of ‖g‖_{0.1} at the convergent cutoffs.
fn lemma2_growth_table(cli: &Cli, a: f64, r: f64) -> anyhow::Result<()> {
    let record = liouville_builder(pow2_of_q_growth(12), 9, 1 << 14)?;
    let freq = Frequency::from_record(record);
    let w = Weight::gevrey(a)?;
    let src = toruskam::arithmetic::convergent_witness_ladder(&freq, &w, &[4, 5, 6, 7], 0.9)?;
    let cutoffs: Vec<f64> = src.witnesses.iter().map(|w| w.k_norm).collect();
    let table = divergence_table(&src, &w, r, &cutoffs);
    println!("witnesses: {} (skipped {:?})", src.witnesses.len(), src.skipped);
    for row in &table {
        println!(
            "K = {:>22.6e}: ln‖g‖_{r} ∈ [{:.4e}, {:.4e}] ({} witnesses)",
            row.cutoff, row.ln_norm_lo, row.ln_norm_hi, row.witnesses_included
        );
    }
    if let Some(dir) = &cli.out {
        emit::write_json(dir, "divergence_table.json", &table)?;
        emit::write_json(dir, "witnesses.json", &src.witnesses)?;
    }
    Ok(())
}
