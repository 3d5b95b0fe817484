//! TOML run configuration with full validation at parse time.

use crate::Cli;
use serde::Deserialize;
use std::path::Path;
use toruskam::arithmetic::Frequency;
use toruskam::error::CoreError;
use toruskam::fixtures;
use toruskam::fourier::{SpectralScalar, SpectralVectorField};
use toruskam::kam::KamConfig;
use num_complex::Complex64;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub a: f64,
    pub r0: f64,
    pub r: f64,
    pub tau: f64,
    pub tau0: f64,
    pub kappa: f64,
    #[serde(default = "default_k_max")]
    pub k_max: i64,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default = "default_tol")]
    pub tol_residual: f64,
    #[serde(default = "default_max_inner")]
    pub max_inner: usize,
    #[serde(default = "default_max_outer")]
    pub max_outer: usize,
    #[serde(default = "default_one")]
    pub c2: f64,
    #[serde(default = "default_one")]
    pub c4: f64,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "default_scan")]
    pub alpha_scan_cutoff: i64,
    pub omega: OmegaSpec,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
}

fn default_k_max() -> i64 {
    48
}
fn default_oversample() -> usize {
    4
}
fn default_tol() -> f64 {
    1e-12
}
fn default_max_inner() -> usize {
    24
}
fn default_max_outer() -> usize {
    16
}
fn default_one() -> f64 {
    1.0
}
fn default_scan() -> i64 {
    128
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OmegaSpec {
    /// ω = (1, φ) with the exact golden continued fraction.
    Golden {
        #[serde(default = "default_terms")]
        terms: usize,
    },
    /// Explicit numeric components.
    Numeric { values: Vec<f64> },
}

fn default_terms() -> usize {
    40
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// Seeded random field under the Gevrey envelope, rescaled to ε₀.
    Gevrey { k: i64, epsilon0: f64 },
    /// Reparametrized perturbation of f = 1 + amplitude·cos(2π(x₁−x₂)).
    Reparam { amplitude: f64 },
}

pub fn load(cli: &Cli) -> anyhow::Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CoreError::InvalidParameter("--config is required".into()))?;
    parse(path)
}

pub fn parse(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CoreError::InvalidParameter(format!("cannot read {path:?}: {e}")))?;
    let cfg: RunConfig =
        toml::from_str(&text).map_err(|e| CoreError::InvalidParameter(format!("config: {e}")))?;
    cfg.kam_config()?; // re-validate parameter ranges now
    Ok(cfg)
}

impl RunConfig {
    pub fn kam_config(&self) -> anyhow::Result<KamConfig> {
        let mut cfg = KamConfig::new(self.a, self.r0, self.r, self.tau, self.tau0, self.kappa)?;
        if self.k_max < 1 || self.oversample < 2 || self.tol_residual <= 0.0 {
            return Err(CoreError::InvalidParameter(
                "k_max ≥ 1, oversample ≥ 2, tol_residual > 0 required".into(),
            )
            .into());
        }
        cfg.k_max = self.k_max;
        cfg.oversample = self.oversample;
        cfg.tol_residual = self.tol_residual;
        cfg.max_inner = self.max_inner;
        cfg.max_outer = self.max_outer;
        cfg.c2 = self.c2;
        cfg.c4 = self.c4;
        cfg.strict = self.strict;
        cfg.alpha_scan_cutoff = self.alpha_scan_cutoff;
        Ok(cfg)
    }

    pub fn frequency(&self) -> anyhow::Result<Frequency> {
        Ok(match &self.omega {
            OmegaSpec::Golden { terms } => Frequency::golden(*terms),
            OmegaSpec::Numeric { values } => Frequency::numeric(values.clone())?,
        })
    }

    /// The scalar f of a reparametrized fixture.
    pub fn reparam_scalar(&self) -> anyhow::Result<SpectralScalar> {
        let amplitude = match &self.generator {
            Some(GeneratorSpec::Reparam { amplitude }) => *amplitude,
            _ => 0.05,
        };
        Ok(SpectralScalar::from_entries(
            2,
            1,
            [
                (vec![0, 0], Complex64::new(1.0, 0.0)),
                (vec![1, -1], Complex64::new(amplitude / 2.0, 0.0)),
            ],
        )?)
    }

    /// Input field: file wins; otherwise the configured generator.
    pub fn generate_field(
        &self,
        file: Option<&Path>,
        omega: &Frequency,
        seed: u64,
        kam: &KamConfig,
    ) -> anyhow::Result<SpectralVectorField> {
        if let Some(path) = file {
            let scalar: SpectralScalar = crate::emit::read_json(path)?;
            return Ok(SpectralVectorField::from_scalar_times_vector(
                &scalar,
                omega.components(),
            )?);
        }
        match &self.generator {
            Some(GeneratorSpec::Gevrey { k, epsilon0 }) => Ok(fixtures::random_gevrey_field(
                omega.dim(),
                *k,
                self.r0,
                self.a,
                *epsilon0,
                seed,
            )?),
            Some(GeneratorSpec::Reparam { .. }) => {
                let f = self.reparam_scalar()?;
                let k_work = kam.working_cutoff(f.cutoff());
                Ok(fixtures::reparametrized_perturbation(
                    &f,
                    omega.components(),
                    k_work,
                    kam.grid_resolution(k_work),
                )?)
            }
            None => Err(CoreError::InvalidParameter(
                "no input file and no [generator] block in config".into(),
            )
            .into()),
        }
    }
}
