//! Market and claim-arrival parameters.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Long-run behaviour of the ruin probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `β > 0`: `Ψ(u)` decays like `u^{−β}`.
    PowerLaw,
    /// `β ≤ 0`: `Ψ(u) = 1` for every `u ≥ 0`.
    CertainRuin,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::PowerLaw => f.write_str("power-law"),
            Regime::CertainRuin => f.write_str("certain-ruin"),
        }
    }
}

/// Drift `a`, variance `σ²` of the risky asset and claim intensity `α`.
///
/// Only the primitive parameters are stored; `κ = a − σ²/2` and
/// `β = 2a/σ² − 1` are always recomputed from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    a: f64,
    sigma_sq: f64,
    alpha: f64,
}

impl ModelParams {
    /// Validated parameters from the volatility `σ`.
    pub fn new(a: f64, sigma: f64, alpha: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::domain(format!("volatility must be positive, got {sigma}")));
        }
        Self::from_variance(a, sigma * sigma, alpha)
    }

    /// Validated parameters from the variance `σ²`.
    pub fn from_variance(a: f64, sigma_sq: f64, alpha: f64) -> Result<Self> {
        if !sigma_sq.is_finite() || sigma_sq <= 0.0 {
            return Err(Error::domain(format!("variance must be positive, got {sigma_sq}")));
        }
        let p = Self::degenerate(a, sigma_sq, alpha)?;
        Ok(p)
    }

    /// Parameters that may have `σ = 0`. Only the brute-force oracle and the
    /// deterministic quadrature checks accept these.
    pub fn degenerate(a: f64, sigma_sq: f64, alpha: f64) -> Result<Self> {
        if !a.is_finite() || a < 0.0 {
            return Err(Error::domain(format!("drift must be finite and non-negative, got {a}")));
        }
        if !sigma_sq.is_finite() || sigma_sq < 0.0 {
            return Err(Error::domain(format!("variance must be non-negative, got {sigma_sq}")));
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::domain(format!("claim intensity must be positive, got {alpha}")));
        }
        Ok(Self { a, sigma_sq, alpha })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Drift of the log-price, `a − σ²/2`.
    pub fn kappa(&self) -> f64 {
        self.a - self.sigma_sq / 2.0
    }

    /// Tail exponent `2a/σ² − 1`. Infinite when `σ = 0` and `a > 0`.
    pub fn beta(&self) -> f64 {
        2.0 * self.a / self.sigma_sq - 1.0
    }

    pub fn regime(&self) -> Regime {
        if self.beta() > 0.0 {
            Regime::PowerLaw
        } else {
            Regime::CertainRuin
        }
    }

    /// Fails unless the parameters are usable by the exact simulators.
    pub fn require_volatile(&self) -> Result<()> {
        if self.sigma_sq > 0.0 {
            Ok(())
        } else {
            Err(Error::domain("simulation requires positive volatility"))
        }
    }

    /// Same parameters with `σ` multiplied by `factor`.
    pub fn with_sigma_scaled(&self, factor: f64) -> Result<Self> {
        Self::degenerate(self.a, self.sigma_sq * factor * factor, self.alpha)
    }
}

/// Validates `(a, σ, α)` and returns the derived parameter set.
pub fn derive_params(a: f64, sigma: f64, alpha: f64) -> Result<ModelParams> {
    ModelParams::new(a, sigma, alpha)
}
