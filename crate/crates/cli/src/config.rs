//! The JSON run configuration.
//!
//! Every section is optional in the input and filled with defaults on load;
//! the resolved form written next to the results contains every field, so
//! feeding it back reproduces the run exactly.

use std::fs;
use std::path::Path;

use ruinlab::{ClaimDistribution, ModelParams, PremiumSchedule};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default = "default_claims")]
    pub claims: ClaimDistribution,
    #[serde(default = "default_premium")]
    pub premium: PremiumSchedule,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub perpetuity: PerpetuitySection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub ergodic: ErgodicSection,
}

fn default_claims() -> ClaimDistribution {
    ClaimDistribution::Exponential { mean: 1.0 }
}

fn default_premium() -> PremiumSchedule {
    PremiumSchedule::Zero
}

/// Exactly one of `sigma` and `sigma_sq` must be given. The resolved form
/// always carries `sigma_sq`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_sq: Option<f64>,
    pub alpha: f64,
}

impl ModelSection {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let p = match (self.sigma, self.sigma_sq) {
            (Some(s), None) => ModelParams::new(self.a, s, self.alpha)?,
            (None, Some(s2)) => ModelParams::from_variance(self.a, s2, self.alpha)?,
            _ => return Err(CliError::Usage("model needs exactly one of `sigma` and `sigma_sq`".into())),
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub n_paths: u64,
    pub max_jumps: u64,
    pub bridge_points: usize,
    pub survival_tolerance: f64,
    pub u_grid: Vec<f64>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            n_paths: 10_000,
            max_jumps: 10_000,
            bridge_points: 64,
            survival_tolerance: 1e-9,
            u_grid: vec![20.0, 40.0, 80.0, 160.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerpetuitySection {
    pub n_samples: u64,
    pub k_max: u64,
    pub eps_prod: f64,
    pub bridge_points: usize,
    /// Upper fraction of the `R` samples written to the tail CSV.
    pub tail_fraction: f64,
    /// Moment slack for the hypothesis checks.
    pub delta: f64,
}

impl Default for PerpetuitySection {
    fn default() -> Self {
        Self { n_samples: 100_000, k_max: 100_000, eps_prod: 1e-12, bridge_points: 64, tail_fraction: 0.01, delta: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub u: Vec<f64>,
    pub n_paths: u64,
    /// Defaults to `10⁻³/α`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Defaults to `20/α`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    pub bridge_points: usize,
    /// Largest `|z|` accepted before the check fails.
    pub z_limit: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { u: vec![5.0, 20.0], n_paths: 10_000, dt: None, t_max: None, bridge_points: 64, z_limit: 4.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErgodicSection {
    /// AR(1) coefficient and noise scale for the Cesàro check.
    pub ar_coefficient: f64,
    pub noise_sd: f64,
    pub n_steps: usize,
    pub n_limit_samples: u64,
    /// Horizons for `√n P(t₁ > n)`.
    pub ladder_n: Vec<usize>,
    pub n_reps: u64,
    /// Critical-case demo: initial capital, claim budgets and paths.
    pub u: f64,
    pub budgets: Vec<u64>,
    pub n_paths: u64,
    pub bridge_points: usize,
}

impl Default for ErgodicSection {
    fn default() -> Self {
        Self {
            ar_coefficient: 0.5,
            noise_sd: 1.0,
            n_steps: 100_000,
            n_limit_samples: 100_000,
            ladder_n: vec![100, 1000, 10_000],
            n_reps: 100_000,
            u: 10.0,
            budgets: vec![1000, 2000, 4000],
            n_paths: 1000,
            bridge_points: 64,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: None,
            model: None,
            claims: default_claims(),
            premium: default_premium(),
            simulation: SimulationSection::default(),
            perpetuity: PerpetuitySection::default(),
            oracle: OracleSection::default(),
            ergodic: ErgodicSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Usage(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        self.model
            .as_ref()
            .ok_or_else(|| CliError::Usage("config has no `model` section".into()))?
            .params()
    }

    /// Replaces `sigma` by `sigma_sq` so the emitted config carries the
    /// exact stored variance.
    pub fn canonicalise(&mut self) -> Result<(), CliError> {
        if let Some(m) = self.model {
            let p = m.params()?;
            self.model = Some(ModelSection { a: p.a(), sigma: None, sigma_sq: Some(p.sigma_sq()), alpha: p.alpha() });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}
