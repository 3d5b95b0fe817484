//! JSON/CSV emission helpers. CSV columns are documented per table; JSON is
//! pretty-printed with deterministic field order (struct order / BTreeMap).

use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fs;
use std::path::Path;
use toruskam::arithmetic::ContinuedFractionRecord;
use toruskam::fourier::grid;
use toruskam::fourier::SpectralScalar;
use toruskam::kam::GevreyKamCertificate;
use toruskam::smoothing::{PopovReport, SmoothingSchedule};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn write_spectrum(dir: &Path, name: &str, spec: &SpectralScalar) -> anyhow::Result<()> {
    let sub = dir.join("spectra");
    fs::create_dir_all(&sub)?;
    let path = sub.join(name);
    fs::write(&path, serde_json::to_string_pretty(spec)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Grid samples, one row per grid point: x_1,…,x_n,value.
pub fn write_grid_csv(
    dir: &Path,
    name: &str,
    spec: &SpectralScalar,
    resolution: usize,
) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let res = resolution.max(grid::alias_free_resolution(spec.cutoff()));
    let g = grid::to_grid(spec, res)?;
    let pts = g.points();
    let mut out = String::new();
    for i in 0..spec.dim() {
        out.push_str(&format!("x{}{}", i + 1, if i + 1 < spec.dim() { "," } else { "" }));
    }
    out.push_str(",value\n");
    for (p, v) in pts.iter().zip(g.values()) {
        for (i, c) in p.iter().enumerate() {
            out.push_str(&format!("{c}{}", if i + 1 < p.len() { "," } else { "" }));
        }
        out.push_str(&format!(",{v:.17e}\n"));
    }
    let path = dir.join(name);
    fs::write(&path, out)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Columns: n, ln_q_n, ln_q_next, russmann_ratio, diophantine_ratio,
/// bruno_term, bruno_partial_sum.
pub fn write_cf_table(dir: &Path, name: &str, rec: &ContinuedFractionRecord) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let mut out = String::from(
        "n,ln_q_n,ln_q_next,russmann_ratio,diophantine_ratio,bruno_term,bruno_partial_sum\n",
    );
    for r in &rec.rows {
        out.push_str(&format!(
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            r.n, r.ln_q_n, r.ln_q_next, r.russmann_ratio, r.diophantine_ratio, r.bruno_term,
            r.bruno_partial_sum
        ));
    }
    let path = dir.join(name);
    fs::write(&path, out)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Columns: j, u_j, cutoff_N_j, diff_norm, envelope_ratio, limit_ratio.
pub fn write_decay_csv(
    dir: &Path,
    name: &str,
    schedule: &SmoothingSchedule,
    report: &PopovReport,
) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let mut out = String::from("j,u_j,cutoff_N_j,diff_norm,envelope_ratio,limit_ratio\n");
    for j in 0..report.limit_ratios.len() {
        out.push_str(&format!(
            "{},{:.12e},{},{},{},{:.12e}\n",
            j,
            schedule.widths[j],
            schedule.cutoffs[j],
            report
                .diff_norms
                .get(j)
                .map_or(String::new(), |v| format!("{v:.12e}")),
            report
                .diff_ratios
                .get(j)
                .map_or(String::new(), |v| format!("{v:.12e}")),
            report.limit_ratios[j]
        ));
    }
    let path = dir.join(name);
    fs::write(&path, out)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Columns: stage, cutoff, s, sigma, input_l1, inner_iterations,
/// final_inner_residual, lambda_increment, lambda_envelope, lambda_ratio,
/// phi_increment, phi_envelope, phi_ratio, dphi_defect, trivial.
pub fn write_stages_csv(
    dir: &Path,
    name: &str,
    cert: &GevreyKamCertificate,
) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    let mut out = String::from(
        "stage,cutoff,s,sigma,input_l1,inner_iterations,final_inner_residual,\
         lambda_increment,lambda_envelope,lambda_ratio,phi_increment,phi_envelope,\
         phi_ratio,dphi_defect,trivial\n",
    );
    for s in &cert.stages {
        out.push_str(&format!(
            "{},{},{:.12e},{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}\n",
            s.stage,
            s.cutoff,
            s.width_s,
            s.width_sigma,
            s.input_l1,
            s.inner_iterations,
            s.final_inner_residual,
            s.lambda_increment,
            s.lambda_envelope,
            s.lambda_ratio,
            s.phi_increment,
            s.phi_envelope,
            s.phi_ratio,
            s.dphi_defect,
            s.trivial
        ));
    }
    let path = dir.join(name);
    fs::write(&path, out)?;
    println!("wrote {}", path.display());
    Ok(())
}
